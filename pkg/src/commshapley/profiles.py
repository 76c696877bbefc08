"""Demand-profile preparation: normalisation, winter-weekday filtering,
k-means clustering, total-preserving class scaling and synthetic communities.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import gamma as gamma_fn, ndtr

from .allocation.game import ClassStructure
from .errors import CalendarMismatch, KTooLarge, ZeroDenominator, ZeroVector
from .timeseries import DemandMatrix, GenerationSeries, PowerCurve, wind_power_from_speed

STEPS_PER_DAY = 48
WINTER_MONTHS = (1, 2, 11, 12)
DEFAULT_START = dt.date(2013, 1, 1)


def l2_normalize(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ZeroVector("cannot normalise an all-zero series")
    return x / norm


def coverage(values) -> np.ndarray:
    """Fraction of present (non-NaN) readings per row."""
    values = np.atleast_2d(values)
    return 1.0 - np.isnan(values).mean(axis=1)


def fill_gaps(series) -> np.ndarray:
    """Linear interpolation inside the series, nearest value at the edges."""
    x = np.array(series, dtype=float)
    missing = np.isnan(x)
    if missing.all():
        raise ZeroVector("series has no readings")
    if missing.any():
        idx = np.arange(x.size)
        x[missing] = np.interp(idx[missing], idx[~missing], x[~missing])
    return x


def _retained(day: dt.date) -> bool:
    if day.month not in WINTER_MONTHS:
        return False
    if day.month == 1 and day.day <= 6:
        return False
    if day.month == 12 and day.day >= 22:
        return False
    return day.weekday() <= 3  # Monday..Thursday


def filter_winter_weekdays(series, start: dt.date = DEFAULT_START,
                           steps_per_day: int = STEPS_PER_DAY) -> np.ndarray:
    """Daily rows (days x steps_per_day) of winter Mon-Thu outside the holidays."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size % steps_per_day:
        raise CalendarMismatch(f"series of {x.size} steps is not a whole number of days")
    days = x.reshape(-1, steps_per_day)
    keep = [i for i in range(days.shape[0]) if _retained(start + dt.timedelta(days=i))]
    return days[keep]


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: list = field(default_factory=list)
    n_iter: int = 0


def _sq_dist(x, centroids):
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp(x, k, rng):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(closest.sum())
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # every point coincides with a centre already
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        closest = np.minimum(closest, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def kmeans(profiles, k: int, seed: int = 0, max_iters: int = 300, tol: float = 1e-10) -> ClusterModel:
    """Lloyd's algorithm from a seeded k-means++ start."""
    x = np.atleast_2d(np.asarray(profiles, dtype=float))
    if not 1 <= k <= x.shape[0]:
        raise KTooLarge(f"k={k} with {x.shape[0]} rows")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(x, k, rng)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        d2 = _sq_dist(x, centroids)
        labels = d2.argmin(axis=1)
        history.append(float(d2[np.arange(x.shape[0]), labels].sum()))
        updated = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                updated[c] = x[members].mean(axis=0)
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift < tol:
            break
    d2 = _sq_dist(x, centroids)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(x.shape[0]), labels].sum())
    history.append(inertia)
    return ClusterModel(k, centroids, labels, inertia, history, n_iter)


def daily_shape_profiles(values, start: dt.date = DEFAULT_START, min_coverage: float = 0.95):
    """Per-agent mean normalised winter-weekday day (48 points).

    Agents below ``min_coverage`` present readings, or with no demand at all,
    are dropped. Returns ``(kept_row_indices, profiles)``.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    kept, rows = [], []
    cov = coverage(values)
    for i, row in enumerate(values):
        if cov[i] < min_coverage:
            continue
        filled = fill_gaps(row)
        try:
            normed = l2_normalize(filled)
        except ZeroVector:
            continue
        days = filter_winter_weekdays(normed, start)
        if days.shape[0] == 0:
            raise CalendarMismatch("no winter weekdays in the series")
        kept.append(i)
        rows.append(days.mean(axis=0))
    return kept, np.array(rows).reshape(len(rows), STEPS_PER_DAY)


def write_clusters(path, agent_ids: Sequence, model: ClusterModel) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agent_id", "cluster"])
        for a, c in zip(agent_ids, model.assignments):
            w.writerow([a, int(c)])


def write_centroids(path, model: ClusterModel) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster"] + [f"h{i:02d}" for i in range(model.centroids.shape[1])])
        for c, row in enumerate(model.centroids):
            w.writerow([c] + ["%.17g" % v for v in row])


def synthesize_class_profiles(normalized_shapes, class_sizes: Sequence[int], reference_total: float) -> np.ndarray:
    """Scale class shapes by one common factor so the community total matches.

    After scaling, ``sum_k N_k * sum_t d_k(t) == reference_total``.
    """
    shapes = np.atleast_2d(np.asarray(normalized_shapes, dtype=float))
    sizes = np.asarray(class_sizes, dtype=float)
    if np.any(shapes < 0):
        raise ValueError("shapes must be non-negative")
    if np.any(sizes < 1):
        raise ValueError("class sizes must be at least 1")
    denom = float(np.dot(sizes, shapes.sum(axis=1)))
    if denom == 0.0:
        raise ZeroDenominator("class shapes carry no demand")
    return shapes * (reference_total / denom)


# --- synthetic data -------------------------------------------------------

_HOURS = (np.arange(STEPS_PER_DAY) + 0.5) / 2.0


def _bump(centre, width):
    d = np.abs(_HOURS - centre)
    d = np.minimum(d, 24.0 - d)  # wrap around midnight
    return np.exp(-0.5 * (d / width) ** 2)


def _plateau(begin, end, edge=1.0):
    span = (end - begin) % 24.0
    mid = (begin + span / 2.0) % 24.0
    d = np.abs(_HOURS - mid)
    d = np.minimum(d, 24.0 - d)
    return 1.0 / (1.0 + np.exp((d - span / 2.0) / (edge / 4.0)))


# Daily shapes (arbitrary units) for behavioural archetypes.
ARCHETYPES = {
    "evening_peak": lambda: 0.25 + 0.35 * _bump(7.5, 1.0) + 1.0 * _bump(18.5, 1.6),
    "stay_at_home": lambda: 0.3 + 0.55 * _plateau(8.5, 21.5, 1.5) + 0.3 * _bump(18.5, 1.5),
    "m_shape": lambda: 0.25 + 0.9 * _bump(7.5, 1.2) + 0.8 * _bump(19.0, 1.4),
    "night_owl": lambda: 0.15 + 1.0 * _plateau(22.0, 5.0, 1.5),
    "small_consumer": lambda: 0.2 + 0.25 * _bump(7.5, 1.0) + 0.6 * _bump(18.0, 1.8),
    "large_consumer": lambda: 0.55 + 0.5 * _plateau(0.5, 6.5, 1.0) + 0.45 * _bump(8.0, 1.5)
    + 0.9 * _bump(18.5, 2.2),
}


def archetype_day(name: str) -> np.ndarray:
    try:
        return np.asarray(ARCHETYPES[name](), dtype=float)
    except KeyError:
        raise KeyError(f"unknown archetype {name!r}; choose from {sorted(ARCHETYPES)}") from None


def annual_profile(name: str, annual_kwh: float, n_steps: int = 365 * STEPS_PER_DAY,
                   timestep_hours: float = 0.5, start: dt.date = DEFAULT_START,
                   seasonal_amplitude: float = 0.3) -> np.ndarray:
    """Tile an archetype over the year with winter uplift and softer weekends.

    The level is set so that a full year from ``start`` uses ``annual_kwh``;
    shorter series are a prefix of that year, longer ones keep going.
    """
    day = archetype_day(name)
    n_days = max(math.ceil(n_steps / STEPS_PER_DAY), 365)
    rows = []
    flat = np.full(STEPS_PER_DAY, day.mean())
    for i in range(n_days):
        date = start + dt.timedelta(days=i)
        doy = date.timetuple().tm_yday
        season = 1.0 + seasonal_amplitude * math.cos(2.0 * math.pi * (doy - 15) / 365.0)
        shape = 0.7 * day + 0.3 * flat if date.weekday() >= 5 else day
        rows.append(season * shape)
    series = np.concatenate(rows)
    year = series[: 365 * STEPS_PER_DAY]
    return series[:n_steps] * (annual_kwh / (year.sum() * timestep_hours))


def _smooth_noise(rng, n, rho=0.98):
    eps = rng.standard_normal(n)
    out = np.empty(n)
    acc = 0.0
    scale = math.sqrt(1.0 - rho * rho)
    for t in range(n):
        acc = rho * acc + scale * eps[t]
        out[t] = acc
    return out


@dataclass(frozen=True)
class ClassSpec:
    name: str
    size: int
    annual_kwh: float
    template: str | None = None  # defaults to name

    @property
    def archetype(self) -> str:
        return self.template or self.name


@dataclass(frozen=True)
class CommunitySpec:
    classes: tuple
    n_steps: int = 365 * STEPS_PER_DAY
    timestep_hours: float = 0.5
    noise: float = 0.0
    seed: int = 0
    start: dt.date = DEFAULT_START


def generate_synthetic_community(spec: CommunitySpec) -> tuple[DemandMatrix, ClassStructure]:
    """Deterministic synthetic households built from archetype shapes.

    Each class's demand is its archetype scaled to ``annual_kwh``; each agent
    row multiplies that by ``1 + noise * z(t)`` for smooth unit noise ``z``.
    """
    rng = np.random.default_rng(spec.seed)
    class_rows, ids, rows = [], [], []
    for cls in spec.classes:
        base = annual_profile(cls.archetype, cls.annual_kwh, spec.n_steps,
                              spec.timestep_hours, spec.start)
        class_rows.append(base)
        for a in range(cls.size):
            ids.append(f"{cls.name}_{a:03d}")
            if spec.noise:
                row = base * (1.0 + spec.noise * _smooth_noise(rng, spec.n_steps))
                rows.append(np.clip(row, 0.0, None))
            else:
                rows.append(base.copy())
    demands = DemandMatrix(tuple(ids), np.array(rows), spec.timestep_hours)
    classes = ClassStructure(np.array(class_rows), [c.size for c in spec.classes],
                             labels=[c.name for c in spec.classes])
    return demands, classes


def synthetic_wind_speed(n_steps: int = 365 * STEPS_PER_DAY, seed: int = 0, mean_speed: float = 7.5,
                         weibull_shape: float = 2.0, persistence: float = 0.985) -> np.ndarray:
    """Autocorrelated Weibull wind speeds (m/s) via a Gaussian copula."""
    rng = np.random.default_rng(seed)
    z = _smooth_noise(rng, n_steps, persistence)
    u = np.clip(ndtr(z), 1e-12, 1.0 - 1e-12)
    scale = mean_speed / float(gamma_fn(1.0 + 1.0 / weibull_shape))
    t = np.arange(n_steps)
    season = 1.0 + 0.15 * np.cos(2.0 * np.pi * (t / STEPS_PER_DAY - 15.0) / 365.0)
    return season * scale * (-np.log1p(-u)) ** (1.0 / weibull_shape)


def synthetic_generation(n_steps: int = 365 * STEPS_PER_DAY, seed: int = 0, mean_speed: float = 7.5,
                         curve: PowerCurve | None = None) -> GenerationSeries:
    """Output of one reference turbine driven by synthetic wind."""
    curve = curve or PowerCurve.enercon_e33()
    return wind_power_from_speed(synthetic_wind_speed(n_steps, seed, mean_speed), curve, 1.0)
