import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commshapley.allocation import (
    ClassStructure, adaptive_sampling_alloc, build_cost_table, exploration_weight, stratum_probabilities,
)
from commshapley.errors import InsufficientSamples, InvalidCounts

from conftest import WEEK, small_model, smooth_shape


def test_exploration_weight_endpoints():
    assert exploration_weight(0, 1000) == pytest.approx(1.0, abs=1e-15)
    # exploration never switches off entirely: it settles at 1/(1+e^(gamma/beta))
    floor = 1.0 / (1.0 + np.exp(0.2 / 0.075))
    assert exploration_weight(1000, 1000) == pytest.approx(floor, abs=1e-4)
    ws = [exploration_weight(m, 1000) for m in range(0, 1001, 50)]
    assert all(a >= b for a, b in zip(ws, ws[1:]))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.lists(st.floats(0, 1e6), min_size=1, max_size=50))
def test_pi_is_a_distribution(eps, sigma):
    pi = stratum_probabilities(eps, np.array(sigma))
    assert np.all(pi >= 0)
    assert abs(pi.sum() - 1.0) <= 1e-12


def class_game(sizes=(6, 3), seed=2):
    m = small_model()
    rng = np.random.default_rng(seed)
    cs = ClassStructure(np.array([smooth_shape(rng, WEEK) for _ in sizes]), sizes)
    table = build_cost_table(cs, m.class_cost_fn(cs.class_demands))
    return cs, table


def test_efficiency_and_edge_strata():
    cs, table = class_game()
    res = adaptive_sampling_alloc(cs, table.lookup, n_samples=200, seed=3)
    assert res.efficiency_gap() <= 1e-9
    for visits, used in zip(res.diagnostics["stratum_visits"], res.diagnostics["samples"]):
        assert visits[0] == 1 and visits[-1] == 1
        assert visits.sum() == used == 200
    assert res.diagnostics["mc_evaluations"] <= cs.K * 200
    assert res.diagnostics["pi_sum_error"] <= 1e-12


def test_deterministic_and_thread_invariant():
    cs, table = class_game()
    runs = [adaptive_sampling_alloc(cs, table.lookup, 150, seed=9, workers=w) for w in (1, 1, 4)]
    for r in runs[1:]:
        assert r.per_class_cost.tobytes() == runs[0].per_class_cost.tobytes()
    other = adaptive_sampling_alloc(cs, table.lookup, 150, seed=10)
    assert other.per_class_cost.tobytes() != runs[0].per_class_cost.tobytes()


def test_additive_recovers_weights_unique_mode():
    a = np.array([2.0, 7.0, 1.0, 4.5, 3.25])
    res = adaptive_sampling_alloc(5, lambda s: float(a[list(s)].sum()), n_samples=1000, seed=0)
    np.testing.assert_allclose(res.per_class_cost, a, rtol=1e-6)


def test_insufficient_samples():
    with pytest.raises(InsufficientSamples):
        adaptive_sampling_alloc(10, lambda s: float(len(s)), n_samples=9)
    with pytest.raises(InvalidCounts):
        adaptive_sampling_alloc(1, lambda s: float(len(s)), n_samples=9)


def test_close_to_exact_on_small_game():
    from commshapley.allocation import exact_shapley_kclass

    cs, table = class_game((5, 4))
    phi = exact_shapley_kclass(table, cs).per_class_cost
    est = adaptive_sampling_alloc(cs, table.lookup, 1000, seed=1).per_class_cost
    np.testing.assert_allclose(est, phi, rtol=0.02)
