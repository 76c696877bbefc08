import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commshapley.errors import CalendarMismatch, KTooLarge, ZeroDenominator, ZeroVector
from commshapley.profiles import (
    ARCHETYPES, ClassSpec, CommunitySpec, annual_profile, daily_shape_profiles, filter_winter_weekdays,
    generate_synthetic_community, kmeans, l2_normalize, synthesize_class_profiles, synthetic_wind_speed,
    write_centroids, write_clusters,
)


def test_l2_examples():
    np.testing.assert_allclose(l2_normalize([3.0, 4.0]), [0.6, 0.8], rtol=1e-15)
    u = np.array([0.0, 1.0, 0.0])
    np.testing.assert_array_equal(l2_normalize(u), u)
    with pytest.raises(ZeroVector):
        l2_normalize([0.0, 0.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60).filter(lambda v: np.linalg.norm(v) > 1e-6))
def test_l2_idempotent(x):
    once = l2_normalize(x)
    assert np.linalg.norm(once) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(l2_normalize(once), once, atol=1e-12)


def test_july_only_is_empty():
    out = filter_winter_weekdays(np.ones(31 * 48), dt.date(2013, 7, 1))
    assert out.shape == (0, 48)


def test_full_year_keeps_sixty_days():
    out = filter_winter_weekdays(np.arange(365 * 48, dtype=float), dt.date(2013, 1, 1))
    assert out.shape == (60, 48)
    assert out.size == 2880


def test_saturday_excluded():
    # 2013-01-12 was a Saturday, 2013-01-14 a Monday
    sat = filter_winter_weekdays(np.ones(48), dt.date(2013, 1, 12))
    mon = filter_winter_weekdays(np.ones(48), dt.date(2013, 1, 14))
    assert sat.shape[0] == 0 and mon.shape[0] == 1


def test_holidays_excluded():
    # 2013-01-03 (Thu) and 2013-12-23 (Mon) fall in the excluded holiday windows
    assert filter_winter_weekdays(np.ones(48), dt.date(2013, 1, 3)).shape[0] == 0
    assert filter_winter_weekdays(np.ones(48), dt.date(2013, 12, 23)).shape[0] == 0


def test_calendar_mismatch():
    with pytest.raises(CalendarMismatch):
        filter_winter_weekdays(np.ones(47))


def two_clouds(rng, n=20):
    a = rng.normal(0.0, 0.1, (n, 5))
    b = rng.normal(10.0, 0.1, (n, 5))
    return np.vstack([a, b])


def test_kmeans_separates_clouds():
    x = two_clouds(np.random.default_rng(0))
    model = kmeans(x, 2, seed=1)
    labels = model.assignments
    assert len(set(labels[:20])) == 1 and len(set(labels[20:])) == 1 and labels[0] != labels[20]


def test_kmeans_k_equals_rows():
    x = np.random.default_rng(1).normal(size=(7, 3))
    assert kmeans(x, 7, seed=0).inertia == pytest.approx(0.0, abs=1e-20)


def test_kmeans_identical_rows():
    model = kmeans(np.ones((6, 4)), 2, seed=0)
    assert model.inertia == 0.0
    assert len(set(model.assignments.tolist())) == 1


def test_kmeans_errors_and_determinism():
    x = np.random.default_rng(2).normal(size=(10, 3))
    with pytest.raises(KTooLarge):
        kmeans(x, 11)
    a, b = kmeans(x, 3, seed=5), kmeans(x, 3, seed=5)
    assert np.array_equal(a.centroids, b.centroids) and np.array_equal(a.assignments, b.assignments)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_kmeans_inertia_non_increasing(seed, k):
    x = np.random.default_rng(seed).normal(size=(30, 4))
    model = kmeans(x, k, seed=seed)
    h = model.inertia_history
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(h, h[1:]))
    assert np.all(np.isfinite(model.centroids))
    assert model.assignments.min() >= 0 and model.assignments.max() < k


def test_synthesize_single_class_closed_form():
    shape = np.array([1.0, 2.0, 3.0])
    out = synthesize_class_profiles(shape[None, :], [4], 48.0)
    np.testing.assert_allclose(out[0], shape * 48.0 / (4 * 6.0))
    assert 4 * out.sum() == pytest.approx(48.0, rel=1e-12)


def test_synthesize_homogeneous_in_sizes():
    rng = np.random.default_rng(3)
    shapes = rng.uniform(0, 1, (3, 10))
    a = synthesize_class_profiles(shapes, [5, 3, 2], 1000.0)
    b = synthesize_class_profiles(shapes, [10, 6, 4], 2000.0)
    np.testing.assert_allclose(a, b, rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.floats(1.0, 1e7))
def test_synthesize_preserves_total(seed, k, ref):
    rng = np.random.default_rng(seed)
    shapes = rng.uniform(0, 1, (k, 48))
    sizes = rng.integers(1, 50, k)
    out = synthesize_class_profiles(shapes, sizes, ref)
    assert float(np.dot(sizes, out.sum(axis=1))) == pytest.approx(ref, rel=1e-9)


def test_synthesize_errors():
    with pytest.raises(ZeroDenominator):
        synthesize_class_profiles(np.zeros((2, 4)), [1, 1], 10.0)
    with pytest.raises(ValueError):
        synthesize_class_profiles(-np.ones((1, 4)), [1], 10.0)


def test_synthetic_community_reproducible():
    spec = CommunitySpec((ClassSpec("small_consumer", 9, 3000.0), ClassSpec("large_consumer", 1, 9000.0)),
                         n_steps=96 * 7, noise=0.1, seed=4)
    a, ca = generate_synthetic_community(spec)
    b, cb = generate_synthetic_community(spec)
    assert np.array_equal(a.values, b.values) and a.agent_ids == b.agent_ids
    assert a.n_agents == 10 and ca.class_sizes == (9, 1)


def test_noise_free_rows_identical():
    spec = CommunitySpec((ClassSpec("evening_peak", 4, 3000.0),), n_steps=48 * 10, noise=0.0)
    dm, _ = generate_synthetic_community(spec)
    assert all(np.array_equal(dm.values[0], row) for row in dm.values)


def test_non_coincident_peaks():
    day = annual_profile("stay_at_home", 3000.0, 48 * 7)
    night = annual_profile("night_owl", 3000.0, 48 * 7)
    assert (day + night).max() < day.max() + night.max()


def test_annual_profile_energy():
    for name in ARCHETYPES:
        p = annual_profile(name, 4000.0)
        assert p.sum() * 0.5 == pytest.approx(4000.0, rel=1e-12)
        assert np.all(p > 0)
    with pytest.raises(KeyError):
        annual_profile("nope", 1.0)


def test_synthetic_wind():
    v = synthetic_wind_speed(48 * 365, seed=1)
    assert np.all(v >= 0) and 5.0 < v.mean() < 10.0
    assert np.array_equal(v, synthetic_wind_speed(48 * 365, seed=1))


def test_daily_shapes_coverage_and_outputs(tmp_path):
    rng = np.random.default_rng(5)
    values = rng.uniform(0.1, 2.0, (4, 365 * 48))
    values[1, :1000] = np.nan  # 94% present: dropped
    values[2, 5:10] = np.nan  # small gap: kept
    values[3] = 0.0  # no demand at all: dropped
    kept, profiles = daily_shape_profiles(values)
    assert kept == [0, 2] and profiles.shape == (2, 48)
    model = kmeans(profiles, 2, seed=0)
    write_clusters(tmp_path / "c.csv", ["a", "c"], model)
    write_centroids(tmp_path / "k.csv", model)
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "agent_id,cluster"
    header = (tmp_path / "k.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "cluster" and header[1] == "h00" and header[-1] == "h47" and len(header) == 49


def test_short_profile_is_prefix_of_year():
    year = annual_profile("evening_peak", 4000.0)
    week = annual_profile("evening_peak", 4000.0, 48 * 7)
    np.testing.assert_allclose(week, year[: 48 * 7], rtol=1e-12)
    longer = annual_profile("evening_peak", 4000.0, 48 * 400)
    np.testing.assert_allclose(longer[: year.size], year, rtol=1e-12)
