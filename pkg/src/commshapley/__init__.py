"""Cost sharing for energy communities that jointly own a wind turbine and a
battery: coalition simulation, battery wear, and exact or approximate Shapley
allocation."""

from .cost import AssetConfig, CoalitionCost, CostModel, TariffSchedule, coalition_cost
from .degradation import CycleLifeTable, depreciation_factor, rainflow_count
from .kernels import BACKEND
from .simulation import BatterySpec, SimulationTrace, simulate
from .timeseries import DemandMatrix, GenerationSeries, PowerCurve

__version__ = "0.1.0"

__all__ = [
    "AssetConfig",
    "BACKEND",
    "BatterySpec",
    "CoalitionCost",
    "CostModel",
    "CycleLifeTable",
    "DemandMatrix",
    "GenerationSeries",
    "PowerCurve",
    "SimulationTrace",
    "TariffSchedule",
    "coalition_cost",
    "depreciation_factor",
    "rainflow_count",
    "simulate",
]
