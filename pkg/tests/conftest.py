import numpy as np
import pytest

from commshapley.cost import CostModel
from commshapley.simulation import BatterySpec
from commshapley.timeseries import GenerationSeries

WEEK = 7 * 48


def smooth_shape(rng, n_steps, n_bumps=3):
    """Random positive daily-periodic load built from a few Gaussian bumps."""
    hours = (np.arange(n_steps) % 48 + 0.5) / 2.0
    out = np.full(n_steps, rng.uniform(0.1, 0.4))
    for _ in range(n_bumps):
        c, w, h = rng.uniform(0, 24), rng.uniform(0.7, 3.0), rng.uniform(0.2, 1.5)
        d = np.abs(hours - c)
        out += h * np.exp(-0.5 * (np.minimum(d, 24 - d) / w) ** 2)
    return out


def small_model(n_steps=WEEK, seed=1, **kw):
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps)
    gen = 180.0 * (0.5 + 0.5 * np.sin(2 * np.pi * t / 97.0) * np.cos(2 * np.pi * t / 31.0)) * rng.uniform(0.3, 1.0, n_steps)
    battery = BatterySpec(5.0, 2.5)
    return CostModel(GenerationSeries(gen), battery, **kw)


@pytest.fixture
def model():
    return small_model()


# --- acceptance summary -------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda n: int(n.split("_")[1])):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")
