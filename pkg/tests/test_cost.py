import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commshapley.cost import (
    FIXED_COMMUNITY, AssetConfig, CostModel, TariffSchedule, battery_cost, coalition_cost, grid_cost, wind_cost,
)
from commshapley.errors import InvalidSpec, LengthMismatch
from commshapley.simulation import BatterySpec, SimulationTrace
from commshapley.timeseries import DemandMatrix, GenerationSeries

from conftest import WEEK, small_model, smooth_shape


def trace(e_b, e_s):
    z = np.zeros(len(e_b))
    return SimulationTrace(z, z, z, np.asarray(e_b, float), np.asarray(e_s, float))


def test_grid_cost_examples():
    assert grid_cost(trace([1, 1], [0, 0]), TariffSchedule(16.0, 0.0)) == pytest.approx(0.32)
    assert grid_cost(trace([0, 0], [3, 2]), TariffSchedule(16.0, 0.0)) == 0.0
    assert grid_cost(trace([0, 0], [0, 0]), TariffSchedule()) == 0.0
    assert grid_cost(trace([0, 0], [1, 1]), TariffSchedule(16.0, 5.0)) == pytest.approx(-0.10)


def test_tariff_vectors():
    tau = TariffSchedule(np.array([10.0, 20.0]), 0.0)
    assert grid_cost(trace([1, 1], [0, 0]), tau) == pytest.approx(0.30)
    with pytest.raises(LengthMismatch):
        grid_cost(trace([1, 1, 1], [0, 0, 0]), tau)
    with pytest.raises(ValueError):
        TariffSchedule(-1.0)


def test_wind_cost_examples():
    cfg = AssetConfig()
    assert wind_cost(0, cfg) == 0.0
    assert wind_cost(200, cfg) == pytest.approx(21225.60, rel=1e-12)
    assert wind_cost(100, cfg) == wind_cost(200, cfg) / 2


def test_battery_cost_examples():
    cfg = AssetConfig()
    assert battery_cost(1000.0, 1 / 25, cfg) == pytest.approx(6000.0)
    assert battery_cost(1000.0, 0.0, cfg) == 7500.0
    assert battery_cost(0.0, 0.3, cfg) == 0.0
    # faster wear than the rated life does not raise the annual cost
    assert battery_cost(1000.0, 1 / 10, cfg) == 7500.0


def test_asset_config_validation():
    with pytest.raises(InvalidSpec):
        AssetConfig(wind_cost_per_kw=0)
    with pytest.raises(InvalidSpec):
        AssetConfig(asset_sizing="bogus")
    with pytest.raises(InvalidSpec):
        AssetConfig(asset_sizing=FIXED_COMMUNITY)


def community(n=3, t=WEEK, seed=0):
    rng = np.random.default_rng(seed)
    return DemandMatrix(tuple(f"a{i}" for i in range(n)), np.array([smooth_shape(rng, t) for _ in range(n)]))


def test_empty_coalition_is_free(model):
    dm = community()
    c = coalition_cost([], dm, model.generation_base, model.battery, model.tariffs, model.assets)
    assert c.total == 0.0 and c.grid == 0.0


def test_zero_demand_costs_assets_only(model):
    dm = DemandMatrix(("z",), np.zeros((1, WEEK)))
    c = coalition_cost([0], dm, model.generation_base, model.battery, TariffSchedule(16.0, 0.0), AssetConfig())
    assert c.grid == 0.0
    assert c.total == c.wind + c.battery
    assert c.wind == wind_cost(1, AssetConfig())


def test_total_is_sum_of_parts(model):
    dm = community()
    c = model.evaluate(dm.values.sum(axis=0), 3)
    assert c.total == c.grid + c.wind + c.battery
    assert c.wind >= 0 and c.battery >= 0


def test_complementary_profiles_are_subadditive():
    t = np.arange(WEEK)
    hour = (t % 48) / 2.0
    day = np.where((hour >= 8) & (hour < 18), 2.0, 0.1)
    night = np.where((hour >= 8) & (hour < 18), 0.1, 2.0)
    gen = GenerationSeries(np.where((hour >= 8) & (hour < 18), 400.0, 0.0))
    dm = DemandMatrix(("day", "night"), np.array([day, night]))
    args = (dm, gen, BatterySpec(5.0, 2.5), TariffSchedule(), AssetConfig())
    both = coalition_cost([0, 1], *args).total
    assert both <= coalition_cost([0], *args).total + coalition_cost([1], *args).total


def test_permutation_invariant(model):
    dm = community(4)
    cost = model.subset_cost_fn(dm)
    assert cost((0, 2, 3)) == cost((3, 0, 2)) == cost([2, 3, 0])


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12))
def test_zero_demand_linear_in_size(a, b):
    m = small_model()
    zero = np.zeros(m.n_steps)
    ca, cb = m.total(zero, a), m.total(zero, b)
    assert ca / a == pytest.approx(cb / b, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(1.0, 5.0), st.integers(0, 1000))
def test_demand_scaling_raises_grid_cost(lam, seed):
    m = small_model()
    d = community(2, seed=seed).values.sum(axis=0)
    assert m.evaluate(lam * d, 2).grid >= m.evaluate(d, 2).grid - 1e-9


def test_fixed_community_sizing():
    m = small_model(assets=AssetConfig(asset_sizing=FIXED_COMMUNITY, community_size=10))
    zero = np.zeros(m.n_steps)
    assert m.evaluate(zero, 1).wind == m.evaluate(zero, 7).wind == wind_cost(10, m.assets)
    assert m.evaluate(zero, 0).total == 0.0


def test_evaluation_counter(model):
    model.reset_counter()
    for n in range(4):
        model.total(np.zeros(model.n_steps), n)
    assert model.evaluations == 4


def test_class_cost_fn_matches_subset_cost(model):
    rng = np.random.default_rng(4)
    a, b = smooth_shape(rng, WEEK), smooth_shape(rng, WEEK)
    dm = DemandMatrix(("a1", "a2", "b1"), np.array([a, a, b]))
    by_class = model.class_cost_fn([a, b])
    by_subset = model.subset_cost_fn(dm)
    assert by_class((2, 1)) == pytest.approx(by_subset((0, 1, 2)), rel=1e-12)
    assert by_class((0, 0)) == 0.0


def test_length_mismatch(model):
    with pytest.raises(LengthMismatch):
        model.total(np.zeros(5), 1)
