import numpy as np
import pytest

from commshapley.errors import InfeasibleComposition, InvalidSpec
from commshapley.experiments import (
    ExperimentReport, ScenarioConfig, composition_ratios, emit_report, largest_remainder, resolve_pair,
    run_composition_sweep, run_size_sweep,
)
from commshapley.profiles import annual_profile

from conftest import WEEK, small_model


def scenario(names=("small_consumer", "large_consumer"), ratios=(0.9, 0.1), sizes=(10,), kwh=(3000, 9000), **kw):
    profiles = np.array([annual_profile(n, k, WEEK) for n, k in zip(names, kwh)])
    kw.setdefault("samples_per_agent", 60)
    return ScenarioConfig(list(names), profiles, list(ratios), list(sizes), small_model(), **kw)


@pytest.mark.parametrize("n, ratios, expected", [
    (10, [0.9, 0.1], [9, 1]),
    (15, [0.9, 0.1], [14, 1]),  # tie on .5 goes to the earlier class
    (7, [1 / 3, 1 / 3, 1 / 3], [3, 2, 2]),
    (200, [0.65, 0.05, 0.15, 0.15], [130, 10, 30, 30]),
    (10, [0.25, 0.25, 0.25, 0.25], [3, 3, 2, 2]),
])
def test_largest_remainder(n, ratios, expected):
    assert largest_remainder(n, ratios) == expected


def test_largest_remainder_rejects_bad_ratios():
    with pytest.raises(InfeasibleComposition):
        largest_remainder(10, [0.5, 0.4])
    with pytest.raises(InfeasibleComposition):
        largest_remainder(10, [1.2, -0.2])


def test_single_class_all_zero_rd():
    scn = scenario(names=("evening_peak",), ratios=(1.0,), kwh=(3000,), sizes=(10,))
    report = run_size_sweep(scn)
    assert {row[2] for row in report.summary} == {"exact", "mc", "sev", "sampling"}
    for row in report.allocations:
        assert row[6] == pytest.approx(0.0, abs=1e-9)


def test_size_sweep_shape_and_efficiency():
    sizes = list(range(10, 61, 10))
    report = run_size_sweep(scenario(sizes=sizes))
    for method in ("exact", "mc", "sev", "sampling"):
        assert sorted(report.average_rd(method)) == sizes
    by_point = {}
    for point, n, method, label, size, cost, rd in report.allocations:
        by_point.setdefault((point, method), []).append(size * cost)
    for (point, method), parts in by_point.items():
        exact_total = sum(s * c for p, _, m, _, s, c, _ in report.allocations if p == point and m == "exact")
        assert sum(parts) == pytest.approx(exact_total, rel=1e-9)


def test_cost_table_reuse_counters():
    report = run_size_sweep(scenario(sizes=(20,)))
    evals = {row[2]: row[4] for row in report.summary}
    assert evals["exact"] == (18 + 1) * (2 + 1)
    assert evals["mc"] == 0 and evals["sampling"] == 0
    assert 0 < evals["sev"] <= 2 * 20 * 2


def test_composition_points():
    ratios = composition_ratios([0.05, 0.65, 0.15, 0.15], (1, 0), 0.05, 13)
    assert len(ratios) == 13
    assert ratios[0][:2] == [0.05, 0.65] and ratios[-1][:2] == [0.65, 0.05]
    assert all(abs(sum(r) - 1) < 1e-12 for r in ratios)
    with pytest.raises(InfeasibleComposition):
        composition_ratios([0.1, 0.9], (0, 1), 0.05, 4)


def test_composition_sweep_drops_empty_class():
    scn = scenario(ratios=(0.9, 0.1), sizes=(10,))
    report = run_composition_sweep(scn, 10, (1, 0), 0.05, points=3)
    assert len(report.compositions) == 3
    last = [row for row in report.allocations if row[0] == 2]
    assert {row[3] for row in last} == {"small_consumer"}
    for row in last:
        assert row[6] == pytest.approx(0.0, abs=1e-9)


def test_resolve_pair():
    assert resolve_pair(["a", "b", "c"], ["c", "a"]) == (2, 0)
    assert resolve_pair(["a", "b"], ["0", "1"]) == (0, 1)
    with pytest.raises(InvalidSpec):
        resolve_pair(["a", "b"], ["a", "a"])
    with pytest.raises(InvalidSpec):
        resolve_pair(["a", "b"], ["z", "a"])


def test_empty_report_headers_only(tmp_path):
    emit_report(ExperimentReport(), tmp_path)
    for name in ("allocations.csv", "relative_differences.csv", "summary.csv", "timings.csv"):
        assert len((tmp_path / name).read_text().splitlines()) == 1
    assert (tmp_path / "allocations.csv").read_text().startswith(
        "point,n,method,class_id,class_size,cost_gbp,rd_vs_exact_percent")


def read_outputs(d):
    return {n: (d / n).read_bytes() for n in ("allocations.csv", "relative_differences.csv", "summary.csv")}


def test_byte_identical_reruns_and_thread_counts(tmp_path, monkeypatch):
    outs = []
    for i, threads in enumerate(("1", "1", "4")):
        monkeypatch.setenv("COALITION_THREADS", threads)
        report = run_size_sweep(scenario(sizes=(10, 20), seed=3))
        emit_report(report, tmp_path / str(i))
        outs.append(read_outputs(tmp_path / str(i)))
    assert outs[0] == outs[1] == outs[2]


def test_plots_with_method_subset(tmp_path):
    report = run_size_sweep(scenario(sizes=(10, 20), methods=("exact", "sev")))
    emit_report(report, tmp_path)
    assert (tmp_path / "rd_vs_n.png").stat().st_size > 0
    comp = run_composition_sweep(scenario(methods=("exact", "mc")), 10, (0, 1), 0.1, 2)
    emit_report(comp, tmp_path / "c")
    assert (tmp_path / "c" / "rd_vs_composition.png").exists()


def test_unknown_method():
    with pytest.raises(InvalidSpec):
        scenario(methods=("exact", "magic"))
