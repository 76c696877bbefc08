"""Experiment runner: size and composition sweeps over class-structured
communities, comparing each approximation with the exact class Shapley value.

At each scenario point one coalition cost table is built and shared by the
exact method, marginal contribution and the adaptive sampler; SEV evaluates
its fictitious coalitions directly. Timings go to a separate file so the
numeric outputs are byte-identical across runs.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .allocation import (
    ClassStructure,
    CountingCost,
    adaptive_sampling_alloc,
    average_relative_difference,
    build_cost_table,
    exact_shapley_kclass,
    marginal_contribution_alloc,
    relative_difference,
    sev_alloc,
)
from .config import RunConfig
from .cost import CostModel
from .errors import InfeasibleComposition, InvalidSpec
from .profiles import annual_profile, synthesize_class_profiles
from .timeseries import read_demand_table

METHODS = ("exact", "mc", "sev", "sampling")
EFFICIENCY_TOL = 1e-9


def largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    """Integer class sizes summing to ``n``; ties go to the earlier class."""
    r = np.asarray(ratios, dtype=float)
    if n < 0 or np.any(r < 0) or not math.isclose(float(r.sum()), 1.0, abs_tol=1e-9):
        raise InfeasibleComposition(f"ratios {list(ratios)} must be non-negative and sum to 1")
    quotas = r * n
    base = np.floor(quotas + 1e-9).astype(int)
    rest = n - int(base.sum())
    order = sorted(range(len(r)), key=lambda k: (-(quotas[k] - base[k]), k))
    for k in order[:rest]:
        base[k] += 1
    return [int(x) for x in base]


@dataclass
class ScenarioConfig:
    """Class profiles (K x T, kW per agent) plus the run settings."""

    labels: list
    class_profiles: np.ndarray
    ratios: list
    sizes: list
    model: CostModel
    methods: tuple = METHODS
    samples_per_agent: int = 1000
    seed: int = 0
    beta: float = 0.075
    gamma: float = 0.2
    reference_kwh_per_agent: float | None = None
    workers: int | None = None

    def __post_init__(self):
        self.class_profiles = np.atleast_2d(np.asarray(self.class_profiles, dtype=float))
        if len(self.labels) != self.class_profiles.shape[0] or len(self.ratios) != len(self.labels):
            raise InvalidSpec("labels, ratios and class profiles must agree in length")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise InvalidSpec(f"unknown methods {sorted(unknown)}")


@dataclass
class ExperimentReport:
    kind: str = "size"
    allocations: list = field(default_factory=list)  # point, n, method, class, size, cost, rd
    summary: list = field(default_factory=list)  # point, n, method, avg rd, evaluations
    timings: list = field(default_factory=list)  # point, n, stage, seconds
    compositions: list = field(default_factory=list)  # point -> {label: size}

    def average_rd(self, method: str) -> dict:
        """``{n or point: average RD}`` for one method."""
        key = 1 if self.kind == "size" else 0
        return {row[key]: row[3] for row in self.summary if row[2] == method}


def _profiles_for(scn: ScenarioConfig, sizes: list[int]) -> np.ndarray:
    if scn.reference_kwh_per_agent is None:
        return scn.class_profiles
    # total-preserving rescale; the reference is in kWh so divide by the step
    n = sum(sizes)
    dt_h = scn.model.timestep_hours
    return synthesize_class_profiles(scn.class_profiles, [max(s, 1) for s in sizes],
                                     scn.reference_kwh_per_agent * n / dt_h)


def run_point(scn: ScenarioConfig, sizes: list[int], point, report: ExperimentReport) -> None:
    """Evaluate every selected method for one community composition."""
    n = sum(sizes)
    profiles = _profiles_for(scn, sizes)
    keep = [k for k, s in enumerate(sizes) if s > 0]
    if not keep or n < 2:
        raise InfeasibleComposition(f"composition {sizes} leaves fewer than two agents")
    classes = ClassStructure(profiles[keep], [sizes[k] for k in keep],
                             labels=[scn.labels[k] for k in keep])
    model = scn.model

    t0 = time.perf_counter()
    counted = CountingCost(model.class_cost_fn(classes.class_demands))
    table = build_cost_table(classes, counted, scn.workers)
    report.timings.append([point, n, "cost_table", time.perf_counter() - t0])

    results = {}
    evaluations = {}
    t0 = time.perf_counter()
    exact = exact_shapley_kclass(table, classes)
    report.timings.append([point, n, "exact", time.perf_counter() - t0])
    if exact.efficiency_gap() > EFFICIENCY_TOL:
        raise ArithmeticError(f"exact allocation violates efficiency by {exact.efficiency_gap():.3g}")
    if "exact" in scn.methods:
        results["exact"] = exact
        evaluations["exact"] = table.eval_count

    if "mc" in scn.methods:
        before = model.evaluations
        t0 = time.perf_counter()
        res = marginal_contribution_alloc(classes, table.lookup)
        report.timings.append([point, n, "mc", time.perf_counter() - t0])
        results["mc"] = res
        evaluations["mc"] = model.evaluations - before  # table reuse: no new simulations

    if "sev" in scn.methods:
        before = model.evaluations
        t0 = time.perf_counter()
        res = sev_alloc(classes, model.total, community_total=table.grand_total, workers=scn.workers)
        report.timings.append([point, n, "sev", time.perf_counter() - t0])
        results["sev"] = res
        evaluations["sev"] = model.evaluations - before

    if "sampling" in scn.methods:
        before = model.evaluations
        t0 = time.perf_counter()
        res = adaptive_sampling_alloc(classes, table.lookup, scn.samples_per_agent, scn.seed,
                                      scn.beta, scn.gamma, scn.workers)
        report.timings.append([point, n, "sampling", time.perf_counter() - t0])
        results["sampling"] = res
        evaluations["sampling"] = model.evaluations - before

    truth = exact.per_class_cost
    report.compositions.append([point, dict(zip(scn.labels, sizes))])
    for method, res in results.items():
        rds = np.array([relative_difference(e, t) for e, t in zip(res.per_class_cost, truth)])
        for label, size, cost, rd in zip(res.labels, res.class_sizes, res.per_class_cost, rds):
            report.allocations.append([point, n, method, label, int(size), float(cost), float(rd)])
        avg = average_relative_difference(rds, res.class_sizes)
        report.summary.append([point, n, method, float(avg), int(evaluations[method])])


def run_size_sweep(scn: ScenarioConfig) -> ExperimentReport:
    report = ExperimentReport("size")
    for i, n in enumerate(scn.sizes):
        run_point(scn, largest_remainder(n, scn.ratios), i, report)
    return report


def composition_ratios(ratios: Sequence[float], vary: tuple[int, int], step: float,
                       points: int | None = None) -> list[list[float]]:
    """Move ``step`` of the community from class ``vary[0]`` to ``vary[1]`` per point."""
    a, b = vary
    if points is None:
        points = int(math.floor(ratios[a] / step + 1e-9)) + 1
    out = []
    for p in range(points):
        r = list(ratios)
        r[a] = round(ratios[a] - p * step, 12)
        r[b] = round(ratios[b] + p * step, 12)
        if r[a] < -1e-12 or r[b] > 1 + 1e-12:
            raise InfeasibleComposition(f"point {p} drives a class ratio outside [0, 1]")
        r[a] = max(r[a], 0.0)
        out.append(r)
    return out


def run_composition_sweep(scn: ScenarioConfig, fixed_n: int, vary: tuple[int, int], step: float,
                          points: int | None = None) -> ExperimentReport:
    report = ExperimentReport("composition")
    for p, ratios in enumerate(composition_ratios(scn.ratios, vary, step, points)):
        run_point(scn, largest_remainder(fixed_n, ratios), p, report)
    return report


# --- output ---------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return v


def _write(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _plot(report: ExperimentReport, outdir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    methods = [m for m in METHODS if m != "exact" and any(r[2] == m for r in report.summary)]
    if report.kind == "size":
        name, xlabel = "rd_vs_n.png", "community size N"
    else:
        name, xlabel = "rd_vs_composition.png", "composition point"
    fig, ax = plt.subplots(figsize=(6, 4))
    for m in methods:
        series = report.average_rd(m)
        xs = sorted(series)
        ax.plot(xs, [series[x] for x in xs], marker="o", label=m)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("average relative difference (%)")
    if methods:
        ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / name, dpi=120, metadata={"Software": None})
    plt.close(fig)


def emit_report(report: ExperimentReport, outdir, plots: bool = True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {
        "allocations.csv": (["point", "n", "method", "class_id", "class_size", "cost_gbp",
                             "rd_vs_exact_percent"], report.allocations),
        "relative_differences.csv": (["point", "n", "method", "class_id", "rd_percent"],
                                     [[r[0], r[1], r[2], r[3], r[6]] for r in report.allocations
                                      if r[2] != "exact"]),
        "summary.csv": (["point", "n", "method", "average_rd_percent", "cost_evaluations"],
                        report.summary),
        "timings.csv": (["point", "n", "stage", "seconds"], report.timings),
    }
    written = []
    for name, (header, rows) in files.items():
        _write(outdir / name, header, rows)
        written.append(outdir / name)
    if plots:
        _plot(report, outdir)
    return written


# --- building scenarios from a config ---------------------------------------

def class_profiles_from_config(cfg: RunConfig) -> tuple[list, np.ndarray]:
    sw = cfg.sweep
    if sw.class_csv is not None:
        labels, values = read_demand_table(sw.class_csv)
        if np.isnan(values).any():
            raise InvalidSpec("class profile CSV must not have gaps")
        return labels, values[:, : sw.timesteps]
    if len(sw.annual_kwh) != len(sw.classes):
        raise InvalidSpec("annual_kwh needs one value per class")
    profiles = np.array([
        annual_profile(name, kwh, sw.timesteps, sw.timestep_hours)
        for name, kwh in zip(sw.classes, sw.annual_kwh)
    ])
    return list(sw.classes), profiles


def scenario_from_config(cfg: RunConfig, workers: int | None = None) -> ScenarioConfig:
    labels, profiles = class_profiles_from_config(cfg)
    sw = cfg.sweep
    model = cfg.cost_model(profiles.shape[1], sw.timestep_hours)
    return ScenarioConfig(
        labels=labels,
        class_profiles=profiles,
        ratios=sw.ratios,
        sizes=sw.sizes,
        model=model,
        methods=tuple(sw.methods),
        samples_per_agent=cfg.sampler_samples,
        seed=cfg.sampler_seed,
        beta=cfg.sampler_beta,
        gamma=cfg.sampler_gamma,
        reference_kwh_per_agent=sw.reference_kwh_per_agent,
        workers=workers,
    )


def resolve_pair(labels: list, vary: Sequence) -> tuple[int, int]:
    """Accept class labels or indices for the traded pair."""
    out = []
    for v in vary:
        if v in labels:
            out.append(labels.index(v))
        else:
            try:
                out.append(int(v))
            except ValueError:
                raise InvalidSpec(f"unknown class {v!r}") from None
    if len(out) != 2 or out[0] == out[1] or not all(0 <= i < len(labels) for i in out):
        raise InvalidSpec(f"composition_vary must name two distinct classes, got {list(vary)}")
    return out[0], out[1]
