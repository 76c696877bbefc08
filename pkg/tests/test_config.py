import pytest

from commshapley.config import load_config, parse_config, parse_sizes
from commshapley.errors import InvalidSpec, MissingFile


def test_defaults():
    cfg = load_config()
    assert cfg.tariffs.import_price == 16.0 and cfg.tariffs.export_price == 0.0
    assert cfg.assets.battery_kwh_per_agent == 5.0
    assert cfg.assets.wind_scale_per_agent == 0.006
    assert cfg.assets.turbine_rated_kw == 330.0
    assert cfg.assets.wind_cost_per_kw == 1072.0 and cfg.assets.battery_cost_per_kwh == 150.0
    assert cfg.assets.wind_lifetime_years == 20.0 and cfg.assets.battery_lifetime_years == 20.0
    assert (cfg.sampler_samples, cfg.sampler_beta, cfg.sampler_gamma) == (1000, 0.075, 0.2)
    assert cfg.sweep.sizes == list(range(10, 201, 10))
    assert cfg.battery.p_max_kw == 2.5


def test_overrides_and_paths(tmp_path):
    (tmp_path / "c.ini").write_text(
        "[tariffs]\nimport_pence = 20  # peak\n[sweep]\nsizes = 4, 8\nclass_csv = prof.csv\n"
        "[sampler]\nsamples_per_agent = 50\n"
    )
    cfg = load_config(tmp_path / "c.ini")
    assert cfg.tariffs.import_price == 20.0
    assert cfg.sweep.sizes == [4, 8]
    assert cfg.sweep.class_csv == tmp_path / "prof.csv"
    assert cfg.sampler_samples == 50


def test_parse_sizes():
    assert parse_sizes("10:30:10") == [10, 20, 30]
    assert parse_sizes("5, 7") == [5, 7]


def test_missing_and_invalid():
    with pytest.raises(MissingFile):
        load_config("/nonexistent/config.ini")
    with pytest.raises(InvalidSpec):
        parse_config("[assets]\nsizing = sometimes\n")


def test_generation_length_check(tmp_path):
    (tmp_path / "g.csv").write_text("generation_kw\n1\n2\n")
    cfg = parse_config("[wind]\ngeneration_csv = g.csv\n", tmp_path)
    assert list(cfg.generation(2).values) == [1.0, 2.0]
    with pytest.raises(InvalidSpec):
        cfg.generation(3)
