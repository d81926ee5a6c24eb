import json
import math

import numpy as np
import pytest

from confnodal.checks.acceptance import reconstruction_errors
from confnodal.config import PotentialSpec, RunConfig
from confnodal.forward.nodal import compute_nodes
from confnodal.inverse.reconstruct import ReconstructOptions, reconstruct
from confnodal.pipeline.runner import build_pair, run_forward, run_inverse, run_roundtrip
from confnodal.shared.errors import ConfigError, ConstantPotentialError, DegenerateDenominatorError
from confnodal.shared.types import NodalInput, NodalSet


def _cfg(tmp_path, **kw) -> RunConfig:
    base = {"preset": "zero", "alpha": 1.0, "n_max": 6, "grid_size": 1001, "out_dir": tmp_path}
    return RunConfig(**(base | kw))


def test_forward_outputs(tmp_path):
    outcome = run_forward(_cfg(tmp_path / "a", cross_check=True, write_shots=True))
    names = sorted(p.name for p in outcome.files)
    assert names == ["config.json", "forward_report.json", "nodes.json", "shots.csv", "spectrum.csv"]
    report = json.loads((tmp_path / "a" / "forward_report.json").read_text(encoding="utf-8"))
    assert sorted(report) == ["anomalies", "cross_check", "nodal", "schema_version"]
    assert all(item["agrees"] for item in report["cross_check"])
    # header, column names, one row per grid point per eigenvalue
    assert len((tmp_path / "a" / "shots.csv").read_text(encoding="utf-8").splitlines()) == 2 + 6 * 1001
    config = json.loads((tmp_path / "a" / "config.json").read_text(encoding="utf-8"))
    assert config["grid_size"] == 1001
    assert config["scheme"] == "magnus4"


def test_forward_run_is_deterministic(tmp_path):
    run_forward(_cfg(tmp_path / "a", preset="cosine", alpha=0.75))
    run_forward(_cfg(tmp_path / "b", preset="cosine", alpha=0.75))
    for name in ("spectrum.csv", "nodes.json", "forward_report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rk4_forward_run_matches_magnus(tmp_path):
    magnus = run_forward(_cfg(tmp_path / "m", preset="cosine", grid_size=None, n_max=8))
    rk4 = run_forward(_cfg(tmp_path / "r", preset="cosine", grid_size=None, n_max=8, scheme="rk4"))
    np.testing.assert_allclose(rk4.spectrum.lambdas, magnus.spectrum.lambdas, rtol=1e-8)
    for n in (2, 5, 8):
        np.testing.assert_allclose(rk4.nodal_set.nodes(n), magnus.nodal_set.nodes(n), atol=1e-8)
    config = json.loads((tmp_path / "r" / "config.json").read_text(encoding="utf-8"))
    assert config["scheme"] == "rk4"


def test_forward_adds_the_ladder_indices(tmp_path):
    outcome = run_forward(_cfg(tmp_path), extra_indices=[10, 15])
    assert outcome.nodal_set.indices == [1, 2, 3, 4, 5, 6, 10, 15]
    np.testing.assert_allclose(outcome.nodal_set.nodes(10), math.pi * np.arange(1, 10) / 10, atol=1e-8)


def test_spectrum_only_run(tmp_path):
    outcome = run_forward(_cfg(tmp_path, n_min=-2, n_max=2), with_nodes=False)
    assert outcome.nodal_set is None
    assert outcome.spectrum.indices == [-2, -1, 1, 2]


def test_forward_report_checks_guess_growth(tmp_path):
    outcome = run_forward(_cfg(tmp_path, preset="cosine", n_min=10, n_max=16), with_nodes=False)
    growth = outcome.report["guess_growth"]
    assert growth["ok"]
    assert (growth["n_min"], growth["n_max"]) == (10, 16)
    report = json.loads((tmp_path / "forward_report.json").read_text(encoding="utf-8"))
    assert report["guess_growth"]["slope"] <= 0.2


def test_build_pair_from_samples(tmp_path):
    x = np.linspace(0.0, math.pi, 401)
    path = tmp_path / "p.csv"
    path.write_text("x,value\n" + "".join(f"{a!r},{0.2 * math.cos(a)!r}\n" for a in x), encoding="utf-8")
    cfg = _cfg(tmp_path, preset="shifted", p=PotentialSpec(kind="samples", path=path))
    pp = build_pair(cfg)
    t = np.linspace(0.1, math.pi - 0.1, 7)
    np.testing.assert_allclose(pp.p.value_at(t), 0.2 * np.cos(t), atol=1e-6)
    np.testing.assert_allclose(pp.q.value_at(t), 0.1, atol=1e-12)


def test_build_pair_errors(tmp_path):
    with pytest.raises(ConfigError, match="unknown preset"):
        build_pair(_cfg(tmp_path, preset="square"))
    with pytest.raises(ConstantPotentialError):
        build_pair(_cfg(tmp_path, p=PotentialSpec(constant=0.0)))


def test_inverse_of_exact_zero_nodes(tmp_path, zero_nodes):
    cfg = _cfg(tmp_path, n_use=10)
    with pytest.raises(DegenerateDenominatorError):
        run_inverse(cfg, zero_nodes(1.0, [10, 15, 20]))
    assert (tmp_path / "reconstruction.csv").exists()
    assert (tmp_path / "diagnostics.json").exists()


@pytest.mark.slow
def test_roundtrip_recovers_the_potentials(tmp_path):
    cfg = _cfg(tmp_path, preset="roundtrip", grid_size=None, n_use=100, n_use_sweep=[100], asymptotic_compare=True)
    report = run_roundtrip(cfg)
    assert report["passed"]
    final = report["sweeps"]["numeric"][-1]
    assert final["errors"]["p"] < 0.10
    assert final["errors"]["q"] < 0.15
    assert final["errors"]["mean_q"] < 0.15
    assert len(report["sweeps"]["asymptotic"]) == 1
    assert (tmp_path / "roundtrip_report.json").exists()


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_roundtrip_errors_shrink_over_the_sweep(tmp_path, alpha):
    cfg = _cfg(tmp_path, preset="roundtrip", alpha=alpha, grid_size=None, n_use_sweep=[50, 100, 200])
    report = run_roundtrip(cfg)
    assert report["passed"]
    assert report["verdict"]["monotone_p"]
    assert report["verdict"]["monotone_q"]
    sweep = report["sweeps"]["numeric"]
    assert [row["n_use"] for row in sweep] == [50, 100, 200]
    for metric in ("q", "mean_q"):
        column = [row["errors"][metric] for row in sweep]
        assert column[2] < column[1] < column[0]
    final = sweep[-1]["errors"]
    assert final["p"] < 0.10
    assert final["q"] < 0.15
    assert final["mean_q"] < 0.15


@pytest.mark.slow
def test_roundtrip_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        run_roundtrip(_cfg(tmp_path / name, preset="roundtrip", grid_size=None, n_use_sweep=[50, 100]))
    for name in ("roundtrip_report.json", "reconstruction.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.slow
def test_numeric_nodes_recover_the_mean_of_q_with_endpoint_terms(pair):
    # p(0) + p(pi) is about -0.127, so the endpoint convention matters
    pp = pair("mixed", 1.0)
    nodal_set = NodalSet(alpha=1.0, entries={n: compute_nodes(pp, n) for n in (200, 300, 400)})
    data = NodalInput(pp.alpha, nodal_set, n_use=200, n_use2=400)
    errors = reconstruction_errors(reconstruct(data, ReconstructOptions()), pp)
    assert errors["mean_q"] < 0.15
    assert errors["q"] < 0.15
    mismatched = reconstruction_errors(reconstruct(data, ReconstructOptions(step4_endpoint_term=True)), pp)
    assert mismatched["mean_q"] > 0.3
