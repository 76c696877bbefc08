"""Annual coalition cost: grid exchange, wind amortisation, battery amortisation.

``CostModel`` is the characteristic function of the cost-sharing game. A
coalition owns assets proportional to its size (``scale_with_coalition``) or,
optionally, the full community's assets (``fixed_community``).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .degradation import CycleLifeTable, trace_depreciation_factor
from .errors import InvalidSpec, LengthMismatch
from .simulation import BatterySpec, SimulationTrace, simulate
from .timeseries import DemandMatrix, GenerationSeries, aggregate_demand

SCALE_WITH_COALITION = "scale_with_coalition"
FIXED_COMMUNITY = "fixed_community"


@dataclass(frozen=True)
class TariffSchedule:
    """Import and export prices in pence/kWh, scalar or per-step."""

    import_price: float | np.ndarray = 16.0
    export_price: float | np.ndarray = 0.0

    def __post_init__(self):
        for name in ("import_price", "export_price"):
            v = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ValueError(f"{name} must be finite and non-negative")

    def arrays(self, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
        out = []
        for v in (self.import_price, self.export_price):
            v = np.asarray(v, dtype=float)
            if v.ndim == 0:
                v = np.full(n_steps, float(v))
            elif v.shape != (n_steps,):
                raise LengthMismatch(f"tariff has {v.size} steps, trace has {n_steps}")
            out.append(v)
        return out[0], out[1]


@dataclass(frozen=True)
class AssetConfig:
    wind_cost_per_kw: float = 1072.0
    wind_lifetime_years: float = 20.0
    battery_cost_per_kwh: float = 150.0
    battery_lifetime_years: float = 20.0
    battery_kwh_per_agent: float = 5.0
    wind_scale_per_agent: float = 0.006
    turbine_rated_kw: float = 330.0
    asset_sizing: str = SCALE_WITH_COALITION
    community_size: int | None = None  # required for fixed_community

    def __post_init__(self):
        positive = (
            self.wind_cost_per_kw, self.wind_lifetime_years, self.battery_cost_per_kwh,
            self.battery_lifetime_years, self.battery_kwh_per_agent,
            self.wind_scale_per_agent, self.turbine_rated_kw,
        )
        if any(not v > 0 for v in positive):
            raise InvalidSpec("asset parameters must be positive")
        if self.asset_sizing not in (SCALE_WITH_COALITION, FIXED_COMMUNITY):
            raise InvalidSpec(f"unknown asset_sizing {self.asset_sizing!r}")
        if self.asset_sizing == FIXED_COMMUNITY and not self.community_size:
            raise InvalidSpec("fixed_community sizing needs community_size")

    def size_basis(self, coalition_size: int) -> int:
        if self.asset_sizing == FIXED_COMMUNITY:
            return self.community_size
        return coalition_size


@dataclass(frozen=True)
class CoalitionCost:
    grid: float
    wind: float
    battery: float
    total: float
    df: float

    @classmethod
    def zero(cls) -> "CoalitionCost":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)


def grid_cost(trace: SimulationTrace, tariffs: TariffSchedule) -> float:
    """Net cost of grid exchange in GBP (tariffs are in pence)."""
    tau_b, tau_s = tariffs.arrays(len(trace))
    return float(np.sum(trace.e_b * tau_b) - np.sum(trace.e_s * tau_s)) / 100.0


def wind_cost(coalition_size: int, cfg: AssetConfig) -> float:
    capacity_kw = cfg.wind_scale_per_agent * cfg.size_basis(coalition_size) * cfg.turbine_rated_kw
    return capacity_kw * cfg.wind_cost_per_kw / cfg.wind_lifetime_years


def battery_cost(capacity_kwh: float, df: float, cfg: AssetConfig) -> float:
    """Annualised battery cost; wear slower than the rated lifetime lowers it."""
    if capacity_kwh < 0 or df < 0:
        raise ValueError("capacity and DF must be non-negative")
    life = cfg.battery_lifetime_years
    if df > 0:
        life = max(life, 1.0 / df)
    return capacity_kwh * cfg.battery_cost_per_kwh / life


@dataclass
class CostModel:
    """Characteristic function ``c(S)`` evaluated from a coalition's demand.

    ``generation_base`` is the output of one reference turbine; a coalition
    receives ``wind_scale_per_agent * basis`` times that. ``battery`` is a
    template whose chemistry and C-rate are kept while its capacity is set to
    ``battery_kwh_per_agent * basis``.
    """

    generation_base: GenerationSeries
    battery: BatterySpec
    tariffs: TariffSchedule = field(default_factory=TariffSchedule)
    assets: AssetConfig = field(default_factory=AssetConfig)
    cycle_life: CycleLifeTable = field(default_factory=CycleLifeTable.synthetic)
    timestep_hours: float = 0.5

    def __post_init__(self):
        self._lock = threading.Lock()
        self.evaluations = 0

    @property
    def n_steps(self) -> int:
        return len(self.generation_base)

    def reset_counter(self) -> None:
        with self._lock:
            self.evaluations = 0

    def _count(self) -> None:
        with self._lock:
            self.evaluations += 1

    def sized_assets(self, size: int) -> tuple[BatterySpec, np.ndarray]:
        basis = self.assets.size_basis(size)
        battery = self.battery.resized(self.assets.battery_kwh_per_agent * basis)
        generation = self.generation_base.values * (self.assets.wind_scale_per_agent * basis)
        return battery, generation

    def simulate(self, demand, size: int) -> SimulationTrace:
        battery, generation = self.sized_assets(size)
        return simulate(demand, generation, battery, self.timestep_hours)

    def evaluate(self, demand, size: int) -> CoalitionCost:
        """Cost of a coalition of ``size`` agents with aggregate ``demand`` (kW)."""
        self._count()
        if size == 0:
            return CoalitionCost.zero()
        demand = np.asarray(demand, dtype=float)
        if demand.shape != (self.n_steps,):
            raise LengthMismatch(f"demand has {demand.size} steps, generation {self.n_steps}")
        battery, generation = self.sized_assets(size)
        trace = simulate(demand, generation, battery, self.timestep_hours)
        df = 0.0
        if battery.soc_max_kwh > 0:
            df = trace_depreciation_factor(trace.soc / battery.soc_max_kwh * 100.0, self.cycle_life)
        grid = grid_cost(trace, self.tariffs)
        wind = wind_cost(size, self.assets)
        bat = battery_cost(battery.capacity_kwh, df, self.assets)
        return CoalitionCost(grid, wind, bat, grid + wind + bat, df)

    def total(self, demand, size: int) -> float:
        return self.evaluate(demand, size).total

    def class_cost_fn(self, class_demands):
        """``counts -> c(S)`` for a coalition holding ``counts[k]`` agents of class k."""
        class_demands = [np.asarray(d, dtype=float) for d in class_demands]

        def cost(counts) -> float:
            size = int(sum(counts))
            agg = np.zeros(self.n_steps)
            for n, d in zip(counts, class_demands):
                if n:
                    agg += n * d
            return self.total(agg, size)

        return cost

    def subset_cost_fn(self, demands: DemandMatrix):
        """``members -> c(S)`` over agent indices of a demand matrix."""

        def cost(members) -> float:
            members = sorted(set(members))
            return self.total(aggregate_demand(demands, members), len(members))

        return cost


def coalition_cost(members: Iterable[int], demands: DemandMatrix, generation_base: GenerationSeries,
                   battery: BatterySpec, tariffs: TariffSchedule, cfg: AssetConfig,
                   cycle_life: CycleLifeTable | None = None) -> CoalitionCost:
    """One-shot coalition cost; see :class:`CostModel` for repeated use."""
    model = CostModel(
        generation_base, battery, tariffs, cfg,
        cycle_life if cycle_life is not None else CycleLifeTable.synthetic(),
        demands.timestep_hours,
    )
    members = sorted(set(members))
    return model.evaluate(aggregate_demand(demands, members), len(members))
