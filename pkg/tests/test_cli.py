import json

import pytest
import yaml

from catenoid_lab import acceptance, cli
from catenoid_lab.acceptance import CriterionResult

SMALL = {"grid": {"rho_max": 20.0, "n_points": 801}, "evolution": {"T_final": 2.0}, "seed": 3}


@pytest.fixture
def cfg_path(tmp_path, monkeypatch):
    p = tmp_path / "cfg.yaml"
    p.write_text(yaml.safe_dump(SMALL))
    monkeypatch.setenv(cli.ENV_OUTPUT, str(tmp_path / "out"))
    return p


def _files(d):
    return {p.name: p.read_bytes() for p in d.iterdir() if p.name != "manifest.json"}


def test_profile_rows_and_manifest(cfg_path, tmp_path):
    assert cli.main(["profile", "--config", str(cfg_path)]) == 0
    out = tmp_path / "out" / "profile"
    lines = (out / "profile.csv").read_text().splitlines()
    assert len(lines) == 801 + 1
    man = json.loads((out / "manifest.json").read_text())
    assert man["subcommand"] == "profile"
    assert "profile.csv" in man["outputs"]
    assert "total" in man["timings"]


@pytest.mark.parametrize("command", [["profile"], ["spectrum", "--ell", "0"], ["evolve", "--track-modulation"]])
def test_rerun_is_byte_identical(cfg_path, tmp_path, command):
    assert cli.main(command + ["--config", str(cfg_path)]) == 0
    first = _files(tmp_path / "out" / command[0])
    assert cli.main(command + ["--config", str(cfg_path)]) == 0
    assert _files(tmp_path / "out" / command[0]) == first


def test_spectrum_ell0_has_one_positive(cfg_path, tmp_path):
    assert cli.main(["spectrum", "--ell", "0", "--config", str(cfg_path)]) == 0
    data = json.loads((tmp_path / "out" / "spectrum" / "spectrum_ell0.json").read_text())
    assert sum(v > 1e-6 for v in data["eigenvalues"]) == 1
    assert set(data) >= {"ell", "eigenvalues", "mu2", "residuals"}


def test_evolve_with_modulation_outputs(cfg_path, tmp_path):
    assert cli.main(["evolve", "--config", str(cfg_path), "--track-modulation", "--rctf", "4"]) == 0
    d = tmp_path / "out" / "evolve"
    header = (d / "modulation.csv").read_text().splitlines()[0]
    assert header.startswith("t,a_plus,a_minus,omega1")
    assert "le_integral" in (d / "evolve.csv").read_text().splitlines()[0]


def test_invalid_config_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text(yaml.safe_dump({"grid": {"n_points": 10}}))
    assert cli.main(["profile", "--config", str(p)]) == 1
    assert "grid.n_points" in capsys.readouterr().err


def test_missing_config_exit_1(tmp_path):
    assert cli.main(["profile", "--config", str(tmp_path / "nope.yaml")]) == 1


def test_module_error_exit_3(cfg_path, capsys):
    # ell=0 eigenvalue check with an impossible tolerance
    assert cli.main(["spectrum", "--ell", "0", "--rtol", "1e-14", "--config", str(cfg_path)]) == 3
    assert "spectrum" in capsys.readouterr().err


def _stub(passed):
    def fn(cfg):
        return CriterionResult(99, "stub", passed, {"x": 1.0}, {"x": "== 1"}, 0.0, 1.0, {"x": passed})
    return fn


@pytest.mark.parametrize("passed, code", [(True, 0), (False, 2)])
def test_suite_exit_codes_and_schema(cfg_path, tmp_path, monkeypatch, passed, code):
    monkeypatch.setattr(acceptance, "CRITERIA", {99: _stub(passed)})
    assert cli.main(["suite", "--config", str(cfg_path)]) == code
    rep = json.loads((tmp_path / "out" / "suite" / "report.json").read_text())
    assert rep["passed"] is passed
    (c,) = rep["criteria"]
    assert set(c) == {"number", "name", "passed", "measured", "target", "budget", "checks"}


def test_suite_runs_real_criterion(cfg_path, tmp_path):
    assert cli.main(["suite", "--only", "1", "--config", str(cfg_path)]) == 0
    rep = json.loads((tmp_path / "out" / "suite" / "report.json").read_text())
    assert rep["criteria"][0]["number"] == 1
