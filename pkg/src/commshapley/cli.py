"""Command-line entry point: ``commshapley <subcommand> ...``."""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as dt
import sys
from pathlib import Path

import numpy as np

from .allocation import (
    ClassStructure,
    adaptive_sampling_alloc,
    build_cost_table,
    exact_shapley_kclass,
    exact_shapley_naive,
    marginal_contribution_alloc,
    relative_difference,
    sev_alloc,
)
from .config import load_config
from .errors import CommunityError, InvalidSpec, MissingFile
from .experiments import (
    emit_report,
    resolve_pair,
    run_composition_sweep,
    run_size_sweep,
    scenario_from_config,
)
from .profiles import (
    ClassSpec,
    CommunitySpec,
    daily_shape_profiles,
    kmeans,
    write_centroids,
    write_clusters,
)
from .timeseries import load_demand_csv, load_generation_csv, read_demand_table, write_demand_csv

ALLOC_METHODS = ("exact", "mc", "sev", "sampling")


def _demand(args):
    return load_demand_csv(args.demand, expected_timesteps=None)


def cmd_simulate(args) -> None:
    cfg = load_config(args.config)
    demands = _demand(args)
    generation = load_generation_csv(args.generation, demands.n_steps) if args.generation else None
    model = cfg.cost_model(demands.n_steps, demands.timestep_hours, generation)
    aggregate = demands.values.sum(axis=0)
    n = demands.n_agents
    trace = model.simulate(aggregate, n)
    cost = model.evaluate(aggregate, n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out / "trace.csv")
    with (out / "cost.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agents", "grid_gbp", "wind_gbp", "battery_gbp", "total_gbp", "depreciation_factor"])
        w.writerow([n] + ["%.17g" % v for v in (cost.grid, cost.wind, cost.battery, cost.total, cost.df)])
    print(f"{n} agents: total {cost.total:.2f} GBP/year "
          f"(grid {cost.grid:.2f}, wind {cost.wind:.2f}, battery {cost.battery:.2f})")


def _read_classes(path, agent_ids) -> list:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        mapping = {row["agent_id"].strip(): row["class"].strip() for row in csv.DictReader(fh)}
    missing = [a for a in agent_ids if a not in mapping]
    if missing:
        raise InvalidSpec(f"agents without a class: {missing[:5]}")
    return [mapping[a] for a in agent_ids]


def _write_allocation(path: Path, results: dict, truth) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "class_id", "class_size", "cost_gbp", "rd_vs_exact_percent"])
        for method, res in results.items():
            for i, (label, size, cost) in enumerate(zip(res.labels, res.class_sizes, res.per_class_cost)):
                rd = "" if truth is None else "%.17g" % relative_difference(cost, truth[i])
                w.writerow([method, label, int(size), "%.17g" % cost, rd])


def cmd_allocate(args) -> None:
    cfg = load_config(args.config)
    demands = _demand(args)
    model = cfg.cost_model(demands.n_steps, demands.timestep_hours)
    methods = ALLOC_METHODS if args.method == "all" else (args.method,)
    results = {}
    truth = None

    if args.classes:
        labels = _read_classes(args.classes, demands.agent_ids)
        names = sorted(set(labels), key=labels.index)
        profiles = []
        for name in names:
            rows = demands.values[[i for i, l in enumerate(labels) if l == name]]
            profiles.append(rows.mean(axis=0))
        classes = ClassStructure(np.array(profiles), [labels.count(n) for n in names], labels=names)
        needs_table = any(m in methods for m in ("exact", "mc", "sampling"))
        table = build_cost_table(classes, model.class_cost_fn(classes.class_demands)) if needs_table else None
        if table is not None:
            results["exact"] = exact_shapley_kclass(table, classes)
            truth = results["exact"].per_class_cost
            if "exact" not in methods:
                results.pop("exact")
        if "mc" in methods:
            results["mc"] = marginal_contribution_alloc(classes, table.lookup)
        if "sev" in methods:
            results["sev"] = sev_alloc(classes, model.total,
                                       community_total=table.grand_total if table else None)
        if "sampling" in methods:
            results["sampling"] = adaptive_sampling_alloc(classes, table.lookup, cfg.sampler_samples,
                                                          cfg.sampler_seed, cfg.sampler_beta, cfg.sampler_gamma)
    else:
        n = demands.n_agents
        cost = model.subset_cost_fn(demands)
        exact = exact_shapley_naive(n, cost) if n <= 12 else None
        truth = exact.per_class_cost if exact is not None else None
        if "exact" in methods:
            if exact is None:
                raise InvalidSpec("exact allocation without classes needs at most 12 agents; pass --classes")
            results["exact"] = exact
        if "mc" in methods:
            results["mc"] = marginal_contribution_alloc(n, cost)
        if "sev" in methods:
            results["sev"] = sev_alloc(demands, model.total)
        if "sampling" in methods:
            results["sampling"] = adaptive_sampling_alloc(n, cost, cfg.sampler_samples, cfg.sampler_seed,
                                                          cfg.sampler_beta, cfg.sampler_gamma)
        for res in results.values():
            res.labels = list(demands.agent_ids)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_allocation(out / "allocations.csv", results, truth)
    for method, res in results.items():
        print(f"{method}: " + ", ".join(f"{l}={c:.2f}" for l, c in zip(res.labels, res.per_class_cost)))


def cmd_sweep_size(args) -> None:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg)
    report = run_size_sweep(scn)
    emit_report(report, args.out)
    print(f"{len(scn.sizes)} community sizes written to {args.out}")


def cmd_sweep_composition(args) -> None:
    cfg = load_config(args.config)
    scn = scenario_from_config(cfg)
    sw = cfg.sweep
    pair = resolve_pair(scn.labels, sw.composition_vary)
    report = run_composition_sweep(scn, sw.composition_n, pair, sw.composition_step, sw.composition_points)
    emit_report(report, args.out)
    print(f"{len(report.compositions)} composition points written to {args.out}")


def cmd_cluster(args) -> None:
    ids, values = read_demand_table(args.demand)
    start = dt.date.fromisoformat(args.start_date)
    kept, profiles = daily_shape_profiles(values, start, args.min_coverage)
    model = kmeans(profiles, args.k, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_clusters(out / "clusters.csv", [ids[i] for i in kept], model)
    write_centroids(out / "centroids.csv", model)
    print(f"clustered {len(kept)} of {len(ids)} agents into {args.k} groups, inertia {model.inertia:.6g}")


def read_synth_spec(path) -> CommunitySpec:
    """INI: ``[community]`` plus one ``[class NAME]`` section per class."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"spec file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read(path, encoding="utf-8")
    com = cp["community"] if cp.has_section("community") else {}
    classes = []
    for name in cp.sections():
        if not name.startswith("class "):
            continue
        sec = cp[name]
        label = name[len("class "):].strip()
        classes.append(ClassSpec(label, sec.getint("size"), sec.getfloat("annual_kwh", 3000.0),
                                 sec.get("template", None)))
    if not classes:
        raise InvalidSpec("spec defines no [class NAME] sections")
    start = com.get("start_date", "2013-01-01")
    return CommunitySpec(
        classes=tuple(classes),
        n_steps=int(com.get("n_steps", 17520)),
        timestep_hours=float(com.get("timestep_hours", 0.5)),
        noise=float(com.get("noise", 0.0)),
        seed=int(com.get("seed", 0)),
        start=dt.date.fromisoformat(start),
    )


def cmd_synth(args) -> None:
    from .profiles import generate_synthetic_community

    demands, _ = generate_synthetic_community(read_synth_spec(args.spec))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_demand_csv(demands, args.out)
    print(f"wrote {demands.n_agents} agents x {demands.n_steps} steps to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commshapley", description="Energy-community cost sharing.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate the whole community and cost it")
    s.add_argument("--demand", required=True)
    s.add_argument("--generation", help="one reference turbine's output (column generation_kw)")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("allocate", help="split the community cost between agents")
    s.add_argument("--demand", required=True)
    s.add_argument("--classes", help="CSV with columns agent_id,class")
    s.add_argument("--method", choices=ALLOC_METHODS + ("all",), default="all")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_allocate)

    for name, fn in (("sweep-size", cmd_sweep_size), ("sweep-composition", cmd_sweep_composition)):
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--out", required=True)
        s.set_defaults(func=fn)

    s = sub.add_parser("cluster", help="k-means on normalised winter-weekday profiles")
    s.add_argument("--demand", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start-date", default="2013-01-01")
    s.add_argument("--min-coverage", type=float, default=0.95)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("synth", help="write a synthetic community demand CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CommunityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
