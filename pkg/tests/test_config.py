import json
from pathlib import Path

import pytest

from confnodal.config import RunConfig, get_settings, load_run_config, reset_settings
from confnodal.shared.errors import ConfigError, GridRefinementWarning


def test_defaults():
    cfg = load_run_config(None)
    assert cfg.alpha == 1.0
    assert cfg.preset == "roundtrip"
    assert cfg.n_use_sweep == [50, 100, 200]
    assert cfg.resolved_grid() == 4001
    assert cfg.resolved_scheme() == "magnus4"


def test_grid_from_environment(monkeypatch):
    monkeypatch.setenv("CONFNODAL_GRID", "2001")
    reset_settings()
    assert get_settings().grid == 2001
    assert RunConfig().resolved_grid() == 2001


def test_refine_doubles_intervals():
    assert RunConfig(refine=1).resolved_grid() == 8001
    assert RunConfig(grid_size=101, refine=2).resolved_grid() == 401


def test_toml_file_with_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        'alpha = 0.5\npreset = "cosine"\nn_max = 12\n\n[thresholds]\np = 0.2\n',
        encoding="utf-8",
    )
    cfg = load_run_config(path, {"n_max": 30, "out_dir": None})
    assert cfg.alpha == 0.5
    assert cfg.n_max == 30
    assert cfg.thresholds.p == 0.2


def test_json_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"alpha": 0.75, "p": {"cos": [0.1]}, "q": {"constant": 0.2}}), encoding="utf-8")
    cfg = load_run_config(path)
    assert cfg.p.cos == [0.1]
    assert cfg.q.constant == 0.2


def test_malformed_toml_names_the_file(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("alpha = \n", encoding="utf-8")
    with pytest.raises(ConfigError, match="broken.toml"):
        load_run_config(path)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "alpha": 0.5,\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError, match="line 3"):
        load_run_config(path)


@pytest.mark.parametrize(
    "data, where",
    [
        ({"alpha": 1.5}, "alpha"),
        ({"n_use": 4}, "n_use"),
        ({"n_min": 5, "n_max": 3}, "n_min"),
        ({"n_use_sweep": [4, 50]}, "n_use_sweep"),
        ({"unknown_key": 1}, "unknown_key"),
    ],
)
def test_validation_errors_name_the_field(tmp_path, data, where):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ConfigError, match=where):
        load_run_config(path)


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(Path("nope.toml"))


def test_samples_spec_needs_path():
    with pytest.raises(ConfigError, match="path"):
        load_run_config(None, {"p": {"kind": "samples"}})


def test_raised_lambda_cap_warns():
    cfg = RunConfig(lambda_cap=800.0)
    with pytest.warns(GridRefinementWarning):
        assert cfg.resolved_lambda_cap() == 800.0


def test_second_index_defaults_to_double():
    cfg = RunConfig(n_use=100, n_use2=150)
    assert cfg.second_index() == 150
    assert cfg.second_index(50) == 100


def test_echo_is_resolved():
    echo = RunConfig(refine=1).echo()
    assert echo["grid_size"] == 8001
    assert echo["scheme"] == "magnus4"
    assert echo["lambda_cap"] == 500.0


def test_out_dir_falls_back_to_the_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("CONFNODAL_OUT_DIR", str(tmp_path / "results"))
    reset_settings()
    assert RunConfig().resolved_out_dir() == (tmp_path / "results").resolve()
    assert RunConfig(out_dir=Path("here")).resolved_out_dir() == Path("here")
    assert RunConfig().echo()["out_dir"] == str((tmp_path / "results").resolve())
