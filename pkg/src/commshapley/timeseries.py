"""Half-hourly demand and generation series: loading, validation, aggregation.

Demand CSV files carry one column per agent (header = agent ids) and one row
per timestep. An empty cell marks a missing reading.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BoundaryGap,
    EmptyCurve,
    IndexOutOfRange,
    LengthMismatch,
    MalformedRow,
    MissingFile,
    NegativeDemand,
)

HALF_HOURS_PER_YEAR = 365 * 48

# Approximate manufacturer curve for a 330 kW Enercon E-33 (m/s, kW).
E33_POWER_CURVE = (
    (2.0, 0.0),
    (3.0, 5.0),
    (4.0, 13.7),
    (5.0, 30.0),
    (6.0, 55.0),
    (7.0, 92.0),
    (8.0, 138.0),
    (9.0, 196.0),
    (10.0, 250.0),
    (11.0, 292.8),
    (12.0, 320.0),
    (13.0, 330.0),
    (25.0, 330.0),
)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DemandMatrix:
    """Per-agent power demand in kW, shape ``(N, T)``."""

    agent_ids: tuple
    values: np.ndarray
    timestep_hours: float = 0.5

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[0] < 1:
            raise LengthMismatch("demand matrix must be 2-D with at least one agent")
        if len(self.agent_ids) != values.shape[0]:
            raise LengthMismatch(
                f"{len(self.agent_ids)} agent ids for {values.shape[0]} demand rows"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("demand values must be finite")
        bad = np.argwhere(values < 0)
        if bad.size:
            i, t = bad[0]
            raise NegativeDemand(self.agent_ids[i], int(t))
        if self.timestep_hours <= 0:
            raise ValueError("timestep_hours must be positive")
        object.__setattr__(self, "agent_ids", tuple(self.agent_ids))
        object.__setattr__(self, "values", values)

    @property
    def n_agents(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def annual_energy_kwh(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.timestep_hours


@dataclass(frozen=True)
class GenerationSeries:
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise ValueError("generation must be a 1-D series")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("generation values must be finite and non-negative")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class PowerCurve:
    speeds: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        speeds = _frozen(self.speeds)
        powers = _frozen(self.powers)
        if speeds.size == 0:
            raise EmptyCurve("power curve has no knots")
        if speeds.shape != powers.shape:
            raise ValueError("speeds and powers must have equal length")
        if np.any(np.diff(speeds) <= 0):
            raise ValueError("power-curve speeds must be strictly increasing")
        if np.any(powers < 0):
            raise ValueError("power-curve outputs must be non-negative")
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "powers", powers)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "PowerCurve":
        pairs = list(pairs)
        if not pairs:
            raise EmptyCurve("power curve has no knots")
        speeds, powers = zip(*pairs)
        return cls(np.array(speeds), np.array(powers))

    @classmethod
    def enercon_e33(cls) -> "PowerCurve":
        return cls.from_pairs(E33_POWER_CURVE)


def _open_csv(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    return path.open(newline="", encoding="utf-8")


def _parse_cell(cell: str, row: int):
    cell = cell.strip()
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise MalformedRow(row, f"unparseable value {cell!r}") from None


def read_demand_table(path) -> tuple[list[str], np.ndarray]:
    """Read a demand CSV without validation; missing cells become NaN."""
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(0, "empty file") from None
        rows = []
        for r, row in enumerate(reader):
            if not row:
                if len(header) != 1:
                    continue
                row = [""]  # blank line in a one-column file is a missing reading
            if len(row) != len(header):
                raise MalformedRow(r, f"expected {len(header)} values, got {len(row)}")
            rows.append([_parse_cell(c, r) for c in row])
    values = np.array(rows, dtype=float).reshape(len(rows), len(header)).T
    return header, values


def load_demand_csv(path, expected_timesteps: int | None = HALF_HOURS_PER_YEAR,
                    timestep_hours: float = 0.5) -> DemandMatrix:
    """Load a demand CSV into a :class:`DemandMatrix`.

    Gaps are filled by linear interpolation. ``expected_timesteps=None``
    accepts any length.
    """
    ids, values = read_demand_table(path)
    if expected_timesteps is not None and values.shape[1] != expected_timesteps:
        raise LengthMismatch(
            f"{values.shape[1]} timesteps in {path}, expected {expected_timesteps}"
        )
    bad = np.argwhere(values < 0)
    if bad.size:
        i, t = bad[0]
        raise NegativeDemand(ids[i], int(t))
    if np.isnan(values).any():
        values = np.vstack([interpolate_missing(row) for row in values])
    return DemandMatrix(tuple(ids), values, timestep_hours)


def write_demand_csv(demands: DemandMatrix, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(demands.agent_ids)
        for row in demands.values.T:
            writer.writerow(["%.17g" % v for v in row])


def read_column_csv(path, column: str | None = None) -> np.ndarray:
    """Read one numeric column (by name, or the first column)."""
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(0, "empty file") from None
        idx = 0 if column is None else header.index(column) if column in header else None
        if idx is None:
            raise MalformedRow(0, f"missing column {column!r}")
        out = []
        for r, row in enumerate(reader):
            if not row:
                if len(header) != 1:
                    continue
                row = [""]  # blank line in a one-column file is a missing reading
            if len(row) != len(header):
                raise MalformedRow(r, f"expected {len(header)} values, got {len(row)}")
            out.append(_parse_cell(row[idx], r))
    return np.array(out, dtype=float)


def load_generation_csv(path, expected_timesteps: int | None = None) -> GenerationSeries:
    values = read_column_csv(path, "generation_kw")
    if expected_timesteps is not None and values.size != expected_timesteps:
        raise LengthMismatch(f"{values.size} generation steps, expected {expected_timesteps}")
    if np.isnan(values).any():
        values = interpolate_missing(values)
    return GenerationSeries(values)


def write_generation_csv(series: GenerationSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("generation_kw\n")
        for v in series.values:
            fh.write("%.17g\n" % v)


def load_power_curve_csv(path) -> PowerCurve:
    speeds = read_column_csv(path, "wind_speed_ms")
    powers = read_column_csv(path, "power_kw")
    return PowerCurve(speeds, powers)


def interpolate_missing(values: Sequence[float]) -> np.ndarray:
    """Fill NaN gaps by linear interpolation between present neighbours."""
    arr = np.array(values, dtype=float)
    missing = np.isnan(arr)
    if not missing.any():
        return arr
    if missing[0] or missing[-1]:
        raise BoundaryGap("series starts or ends with a gap")
    idx = np.arange(arr.size)
    arr[missing] = np.interp(idx[missing], idx[~missing], arr[~missing])
    return arr


def aggregate_demand(demands: DemandMatrix, members: Iterable[int]) -> np.ndarray:
    """Coalition demand: sum of member rows, accumulated in index order."""
    members = sorted(set(members))
    total = np.zeros(demands.n_steps)
    for i in members:
        if not 0 <= i < demands.n_agents:
            raise IndexOutOfRange(f"agent index {i} outside 0..{demands.n_agents - 1}")
        total += demands.values[i]
    return total


def wind_power_from_speed(speeds, curve: PowerCurve, scale: float = 1.0) -> GenerationSeries:
    """Turbine output for a wind-speed series, zero outside the curve's domain."""
    if scale < 0:
        raise ValueError("scale must be non-negative")
    speeds = np.asarray(speeds, dtype=float)
    power = np.interp(speeds, curve.speeds, curve.powers, left=0.0, right=0.0)
    return GenerationSeries(power * scale)
