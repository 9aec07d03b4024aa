import json

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from catenoid_lab.config import (
    ConfigError,
    ExperimentConfig,
    GridConfig,
    SectorData,
    load_config,
)


def test_defaults_valid():
    cfg = ExperimentConfig().validate()
    assert cfg.grid.n_points % 2 == 1


@settings(max_examples=40)
@given(
    half=st.integers(16, 4000),
    rho_max=st.floats(1.0, 500.0),
    alpha=st.floats(0.01, 0.99),
    R=st.floats(1.0, 64.0),
    seed=st.integers(0, 2 ** 32),
)
def test_roundtrip(half, rho_max, alpha, R, seed):
    cfg = ExperimentConfig().replace(
        grid=GridConfig(rho_max, 2 * half + 1), seed=seed,
    )
    from dataclasses import replace

    cfg = replace(cfg, evolution=replace(cfg.evolution, alpha=alpha), modulation=replace(cfg.modulation, R_ctf=R))
    back = ExperimentConfig.from_dict(json.loads(cfg.canonical_json()))
    assert back == cfg
    assert back.hash() == cfg.hash()


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"grid": {"n_points": 100}}, "grid.n_points"),
        ({"evolution": {"alpha": 1.5}}, "evolution.alpha"),
        ({"evolution": {"dt_safety": 0.9}}, "evolution.dt_safety"),
        ({"shooting": {"precision": "quad"}}, "shooting.precision"),
        ({"tails": {"a": 2.0}}, "tails.a"),
        ({"version": 2}, "version"),
        ({"seed": -1}, "seed"),
        ({"modulation": {"R_ctf": "big"}}, "modulation.R_ctf"),
        ({"evolution": {"sectors": [{"ell": 1, "m": 5}]}}, "evolution.sectors[0].m"),
    ],
)
def test_invalid_values_name_field(patch, field):
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(patch)
    assert exc.value.field == field


def test_unknown_field_rejected():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict({"grid": {"rho_max": 10.0, "spacing": 0.1}})
    assert exc.value.field == "grid.spacing"


def test_load_yaml_and_json(tmp_path):
    data = {"grid": {"rho_max": 30.0, "n_points": 1201}, "evolution": {"sectors": [{"ell": 1, "m": 2}]}, "seed": 5}
    y = tmp_path / "c.yaml"
    y.write_text(yaml.safe_dump(data))
    j = tmp_path / "c.json"
    j.write_text(json.dumps(data))
    a, b = load_config(y), load_config(j)
    assert a == b
    assert a.evolution.sectors == (SectorData(ell=1, m=2),)
    assert load_config(None) == ExperimentConfig()


def test_unparseable_file(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("grid: [unclosed")
    with pytest.raises(ConfigError):
        load_config(p)
