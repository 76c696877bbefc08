"""INI configuration for the CLI and experiment runners.

Sections ``[battery]``, ``[wind]``, ``[tariffs]``, ``[assets]``, ``[sampler]``
and ``[sweep]``; every key is optional. Relative paths resolve against the
config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cost import SCALE_WITH_COALITION, AssetConfig, CostModel, TariffSchedule
from .degradation import CycleLifeTable
from .errors import InvalidSpec, MissingFile
from .simulation import BatterySpec
from .timeseries import (
    HALF_HOURS_PER_YEAR,
    GenerationSeries,
    PowerCurve,
    load_generation_csv,
    load_power_curve_csv,
    read_column_csv,
    wind_power_from_speed,
)

DEFAULT_CONFIG = """\
[battery]
soc_min_frac = 0.1
soc_max_frac = 1.0
c_rate = 0.5
eta_c = 0.95
eta_d = 0.95

[wind]
cost_per_kw = 1072
lifetime_years = 20
scale_per_agent = 0.006
rated_kw = 330
# generation_csv = turbine.csv      (one reference turbine, column generation_kw)
# wind_speed_csv = speeds.csv       (column wind_speed_ms) with optional power_curve_csv
synthetic_seed = 7
mean_speed_ms = 7.5

[tariffs]
import_pence = 16
export_pence = 0

[assets]
battery_kwh_per_agent = 5
battery_cost_per_kwh = 150
battery_lifetime_years = 20
sizing = scale_with_coalition
# cycle_life_csv = cycles.csv       (columns dod_percent,max_cycles)

[sampler]
samples_per_agent = 1000
beta = 0.075
gamma = 0.2
seed = 0

[sweep]
classes = small_consumer, large_consumer
ratios = 0.9, 0.1
annual_kwh = 3376, 9262
sizes = 10:200:10
methods = exact, mc, sev, sampling
timesteps = 17520
timestep_hours = 0.5
profile_seed = 0
composition_n = 200
composition_vary = 0, 1
composition_step = 0.05
"""


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _words(text: str) -> list[str]:
    return [x.strip() for x in text.replace(";", ",").split(",") if x.strip()]


def parse_sizes(text: str) -> list[int]:
    """``10:200:10`` (inclusive range) or a comma list."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        return list(range(start, stop + 1, step))
    return [int(x) for x in _words(text)]


@dataclass
class SweepConfig:
    classes: list = field(default_factory=lambda: ["small_consumer", "large_consumer"])
    ratios: list = field(default_factory=lambda: [0.9, 0.1])
    annual_kwh: list = field(default_factory=lambda: [3376.0, 9262.0])
    class_csv: Path | None = None  # one column per class, overrides templates
    sizes: list = field(default_factory=lambda: list(range(10, 201, 10)))
    methods: list = field(default_factory=lambda: ["exact", "mc", "sev", "sampling"])
    timesteps: int = HALF_HOURS_PER_YEAR
    timestep_hours: float = 0.5
    profile_seed: int = 0
    reference_kwh_per_agent: float | None = None
    composition_n: int = 200
    composition_vary: tuple = (0, 1)
    composition_step: float = 0.05
    composition_points: int | None = None


@dataclass
class RunConfig:
    battery: BatterySpec
    assets: AssetConfig
    tariffs: TariffSchedule
    sampler_samples: int = 1000
    sampler_beta: float = 0.075
    sampler_gamma: float = 0.2
    sampler_seed: int = 0
    generation_csv: Path | None = None
    wind_speed_csv: Path | None = None
    power_curve_csv: Path | None = None
    wind_seed: int = 7
    mean_speed_ms: float = 7.5
    cycle_life_csv: Path | None = None
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def cycle_life(self) -> CycleLifeTable:
        if self.cycle_life_csv is not None:
            return CycleLifeTable.from_csv(self.cycle_life_csv)
        return CycleLifeTable.synthetic()

    def generation(self, n_steps: int) -> GenerationSeries:
        """Output of one reference turbine over ``n_steps``."""
        if self.generation_csv is not None:
            series = load_generation_csv(self.generation_csv)
        elif self.wind_speed_csv is not None:
            curve = (load_power_curve_csv(self.power_curve_csv) if self.power_curve_csv
                     else PowerCurve.enercon_e33())
            series = wind_power_from_speed(read_column_csv(self.wind_speed_csv, "wind_speed_ms"), curve)
        else:
            from .profiles import synthetic_generation
            return synthetic_generation(n_steps, self.wind_seed, self.mean_speed_ms)
        if len(series) < n_steps:
            raise InvalidSpec(f"generation has {len(series)} steps, need {n_steps}")
        return GenerationSeries(np.array(series.values[:n_steps]))

    def cost_model(self, n_steps: int, timestep_hours: float = 0.5, generation=None) -> CostModel:
        gen = generation if generation is not None else self.generation(n_steps)
        return CostModel(gen, self.battery, self.tariffs, self.assets, self.cycle_life(), timestep_hours)


def _path(section, key, base: Path):
    raw = section.get(key, fallback="").strip()
    if not raw:
        return None
    p = Path(raw)
    return p if p.is_absolute() else base / p


def parse_config(text: str, base_dir: Path | str = ".") -> RunConfig:
    base = Path(base_dir)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(DEFAULT_CONFIG)
    cp.read_string(text)
    b, w, t, a, s, sw = (cp[name] for name in ("battery", "wind", "tariffs", "assets", "sampler", "sweep"))

    kwh = a.getfloat("battery_kwh_per_agent")
    init = b.get("soc_init_frac", fallback="").strip()
    battery = BatterySpec(
        capacity_kwh=kwh,
        p_max_kw=b.getfloat("c_rate") * kwh,
        soc_min_frac=b.getfloat("soc_min_frac"),
        soc_max_frac=b.getfloat("soc_max_frac"),
        eta_c=b.getfloat("eta_c"),
        eta_d=b.getfloat("eta_d"),
        soc_init_frac=float(init) if init else None,
    )
    community = a.get("community_size", fallback="").strip()
    assets = AssetConfig(
        wind_cost_per_kw=w.getfloat("cost_per_kw"),
        wind_lifetime_years=w.getfloat("lifetime_years"),
        battery_cost_per_kwh=a.getfloat("battery_cost_per_kwh"),
        battery_lifetime_years=a.getfloat("battery_lifetime_years"),
        battery_kwh_per_agent=kwh,
        wind_scale_per_agent=w.getfloat("scale_per_agent"),
        turbine_rated_kw=w.getfloat("rated_kw"),
        asset_sizing=a.get("sizing", fallback=SCALE_WITH_COALITION).strip(),
        community_size=int(community) if community else None,
    )
    tariffs = TariffSchedule(t.getfloat("import_pence"), t.getfloat("export_pence"))

    ref = sw.get("reference_kwh_per_agent", fallback="").strip()
    points = sw.get("composition_points", fallback="").strip()
    vary = _words(sw.get("composition_vary"))
    sweep = SweepConfig(
        classes=_words(sw.get("classes")),
        ratios=_floats(sw.get("ratios")),
        annual_kwh=_floats(sw.get("annual_kwh")),
        class_csv=_path(sw, "class_csv", base),
        sizes=parse_sizes(sw.get("sizes")),
        methods=_words(sw.get("methods")),
        timesteps=sw.getint("timesteps"),
        timestep_hours=sw.getfloat("timestep_hours"),
        profile_seed=sw.getint("profile_seed"),
        reference_kwh_per_agent=float(ref) if ref else None,
        composition_n=sw.getint("composition_n"),
        composition_vary=tuple(vary),
        composition_step=sw.getfloat("composition_step"),
        composition_points=int(points) if points else None,
    )
    return RunConfig(
        battery=battery,
        assets=assets,
        tariffs=tariffs,
        sampler_samples=s.getint("samples_per_agent"),
        sampler_beta=s.getfloat("beta"),
        sampler_gamma=s.getfloat("gamma"),
        sampler_seed=s.getint("seed"),
        generation_csv=_path(w, "generation_csv", base),
        wind_speed_csv=_path(w, "wind_speed_csv", base),
        power_curve_csv=_path(w, "power_curve_csv", base),
        wind_seed=w.getint("synthetic_seed"),
        mean_speed_ms=w.getfloat("mean_speed_ms"),
        cycle_life_csv=_path(a, "cycle_life_csv", base),
        sweep=sweep,
    )


def load_config(path=None) -> RunConfig:
    """Read an INI file; ``None`` gives the built-in defaults."""
    if path is None:
        return parse_config("")
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent)
