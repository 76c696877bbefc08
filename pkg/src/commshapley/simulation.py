"""Rule-based battery dispatch over a demand/generation horizon.

Surplus generation charges the battery (limited by surplus, power rating and
headroom) and the remainder is exported; a deficit discharges the battery
(limited by deficit, power rating and stored energy) and the remainder is
imported. State of charge is tracked in kWh.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InvalidSpec, LengthMismatch


@dataclass(frozen=True)
class BatterySpec:
    capacity_kwh: float
    p_max_kw: float
    soc_min_frac: float = 0.1
    soc_max_frac: float = 1.0
    eta_c: float = 0.95
    eta_d: float = 0.95
    soc_init_frac: float | None = None  # None -> start at soc_min_frac

    def __post_init__(self):
        if not 0 <= self.soc_min_frac < self.soc_max_frac <= 1:
            raise InvalidSpec("need 0 <= soc_min_frac < soc_max_frac <= 1")
        if self.capacity_kwh < 0 or self.p_max_kw < 0:
            raise InvalidSpec("capacity and power rating must be non-negative")
        if not (0 < self.eta_c <= 1 and 0 < self.eta_d <= 1):
            raise InvalidSpec("efficiencies must lie in (0, 1]")
        init = self.initial_frac
        if not self.soc_min_frac <= init <= self.soc_max_frac:
            raise InvalidSpec("initial SoC must lie within [soc_min_frac, soc_max_frac]")

    @property
    def initial_frac(self) -> float:
        return self.soc_min_frac if self.soc_init_frac is None else self.soc_init_frac

    @property
    def soc_min_kwh(self) -> float:
        return self.soc_min_frac * self.capacity_kwh

    @property
    def soc_max_kwh(self) -> float:
        return self.soc_max_frac * self.capacity_kwh

    @property
    def soc_init_kwh(self) -> float:
        return self.initial_frac * self.capacity_kwh

    @property
    def c_rate(self) -> float:
        """Power rating per kWh of capacity (0 for an empty battery)."""
        return self.p_max_kw / self.capacity_kwh if self.capacity_kwh > 0 else 0.0

    def resized(self, capacity_kwh: float) -> "BatterySpec":
        """Same chemistry and C-rate, different capacity."""
        return replace(self, capacity_kwh=capacity_kwh, p_max_kw=self.c_rate * capacity_kwh)


@dataclass(frozen=True)
class SimulationTrace:
    """Per-step dispatch: ``p_bat`` < 0 charges, ``p_grid`` > 0 imports."""

    p_bat: np.ndarray
    soc: np.ndarray
    p_grid: np.ndarray
    e_b: np.ndarray
    e_s: np.ndarray
    soc_init: float = 0.0

    def __len__(self):
        return self.p_bat.shape[0]

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "p_bat_kw", "soc_kwh", "p_grid_kw", "e_b_kwh", "e_s_kwh"])
            for t, row in enumerate(zip(self.p_bat, self.soc, self.p_grid, self.e_b, self.e_s)):
                writer.writerow([t] + ["%.17g" % v for v in row])


def simulate(demand, generation, battery: BatterySpec, timestep_hours: float = 0.5) -> SimulationTrace:
    demand = np.ascontiguousarray(demand, dtype=float)
    generation = np.ascontiguousarray(generation, dtype=float)
    if demand.shape != generation.shape or demand.ndim != 1:
        raise LengthMismatch(
            f"demand has {demand.size} steps but generation has {generation.size}"
        )
    if not timestep_hours > 0:
        raise InvalidSpec("timestep_hours must be positive")
    p_bat, soc, p_grid, e_b, e_s = kernels.dispatch(
        demand,
        generation,
        battery.soc_init_kwh,
        battery.soc_min_kwh,
        battery.soc_max_kwh,
        battery.p_max_kw,
        battery.eta_c,
        battery.eta_d,
        timestep_hours,
    )
    return SimulationTrace(p_bat, soc, p_grid, e_b, e_s, soc_init=battery.soc_init_kwh)
