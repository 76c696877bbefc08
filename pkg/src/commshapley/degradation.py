"""Rainflow cycle counting and the battery depreciation factor.

SoC is expressed in percent of the maximum usable SoC, so a value of 100 means
the battery is at ``SoC^max``. A cycle starting from 100 % is *regular*; any
other start is *irregular*. The depreciation factor sums per-cycle damage
``1 / N(DoD)`` for regular cycles and the damage difference between the two
end points for irregular ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import EmptyTable, OutOfRange
from .timeseries import read_column_csv

FULL = 100.0
# tolerance for "starts at 100 %"
FULL_TOL = 1e-9


@dataclass(frozen=True)
class Cycle:
    kind: str  # "full" | "half"
    regularity: str  # "regular" | "irregular"
    dod_percent: float
    soc_start_percent: float
    soc_end_percent: float

    @property
    def weight(self) -> float:
        return 1.0 if self.kind == "full" else 0.5


@dataclass(frozen=True)
class CycleLifeTable:
    """Cycles to end of life as a function of depth of discharge.

    Between knots the cycle count is linearly interpolated and beyond the last
    knot it is held constant. Below the first knot the per-cycle damage
    ``1/N`` falls linearly to zero at DoD 0, so a zero-depth swing costs
    nothing.
    """

    dod_percent: np.ndarray
    max_cycles: np.ndarray

    def __post_init__(self):
        dod = np.array(self.dod_percent, dtype=float)
        cyc = np.array(self.max_cycles, dtype=float)
        if dod.size == 0:
            raise EmptyTable("cycle-life table has no knots")
        if dod.shape != cyc.shape:
            raise ValueError("dod and cycle columns differ in length")
        if np.any(np.diff(dod) <= 0):
            raise ValueError("DoD knots must be strictly increasing")
        if np.any(cyc <= 0) or np.any(np.diff(cyc) > 0):
            raise ValueError("cycle counts must be positive and non-increasing in DoD")
        if dod[0] < 0 or dod[-1] > 100:
            raise ValueError("DoD knots must lie within [0, 100]")
        dod.setflags(write=False)
        cyc.setflags(write=False)
        object.__setattr__(self, "dod_percent", dod)
        object.__setattr__(self, "max_cycles", cyc)

    @classmethod
    def synthetic(cls, cycles_at_full_depth: float = 3000.0) -> "CycleLifeTable":
        """``N(DoD) = cycles_at_full_depth * 100 / DoD`` sampled every 10 %."""
        dod = np.arange(10.0, 101.0, 10.0)
        return cls(dod, cycles_at_full_depth * 100.0 / dod)

    @classmethod
    def from_csv(cls, path) -> "CycleLifeTable":
        return cls(read_column_csv(path, "dod_percent"), read_column_csv(path, "max_cycles"))

    def cycles_at(self, dod) -> np.ndarray:
        return 1.0 / self.damage(dod)

    def damage(self, dod) -> np.ndarray:
        """Fraction of life consumed by one full cycle of the given depth."""
        dod = np.asarray(dod, dtype=float)
        life = np.interp(dod, self.dod_percent, self.max_cycles)
        dmg = 1.0 / life
        first = self.dod_percent[0]
        if first > 0:
            low = dod < first
            dmg = np.where(low, np.clip(dod, 0.0, None) / first / self.max_cycles[0], dmg)
        return dmg


def dod_equivalent(soc_percent: float) -> float:
    """Depth of a cycle from 100 % down to ``soc_percent``."""
    if not 0 <= soc_percent <= 100:
        raise OutOfRange(f"SoC {soc_percent} % outside [0, 100]")
    return FULL - soc_percent


def cycle_arrays(soc_percent) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counted cycles as ``(start, end, weight)`` arrays.

    Full cycles that reach 100 % are oriented to start there, since a closed
    loop has no intrinsic starting point.
    """
    series = np.ascontiguousarray(soc_percent, dtype=float)
    start, end, weight = kernels.rainflow(series)
    flip = (weight == 1.0) & (end > start) & (end >= FULL - FULL_TOL)
    if flip.any():
        start, end = np.where(flip, end, start), np.where(flip, start, end)
    return start, end, weight


def rainflow_count(soc_percent: Sequence[float]) -> list[Cycle]:
    series = np.asarray(soc_percent, dtype=float)
    if series.size and (series.min() < -FULL_TOL or series.max() > FULL + FULL_TOL):
        raise OutOfRange("SoC series must lie within [0, 100] %")
    start, end, weight = cycle_arrays(series)
    return [
        Cycle(
            kind="full" if w == 1.0 else "half",
            regularity="regular" if s >= FULL - FULL_TOL else "irregular",
            dod_percent=abs(s - e),
            soc_start_percent=s,
            soc_end_percent=e,
        )
        for s, e, w in zip(start.tolist(), end.tolist(), weight.tolist())
    ]


def _df(start, end, weight, regular, dod, table: CycleLifeTable) -> float:
    if start.size == 0:
        return 0.0
    reg = weight[regular] * table.damage(dod[regular])
    irr_s = np.clip(FULL - start[~regular], 0.0, FULL)
    irr_e = np.clip(FULL - end[~regular], 0.0, FULL)
    irr = weight[~regular] * np.abs(table.damage(irr_s) - table.damage(irr_e))
    return float(np.sum(reg) + np.sum(irr))


def depreciation_factor(cycles: Iterable[Cycle], table: CycleLifeTable) -> float:
    if table is None:
        raise EmptyTable("no cycle-life table given")
    cycles = list(cycles)
    start = np.array([c.soc_start_percent for c in cycles], dtype=float)
    end = np.array([c.soc_end_percent for c in cycles], dtype=float)
    weight = np.array([c.weight for c in cycles], dtype=float)
    regular = np.array([c.regularity == "regular" for c in cycles], dtype=bool)
    dod = np.array([c.dod_percent for c in cycles], dtype=float)
    return _df(start, end, weight, regular, dod, table)


def trace_depreciation_factor(soc_percent, table: CycleLifeTable) -> float:
    """DF of a SoC trace (percent of SoC^max) without building Cycle objects."""
    start, end, weight = cycle_arrays(soc_percent)
    return _df(start, end, weight, start >= FULL - FULL_TOL, np.abs(start - end), table)
