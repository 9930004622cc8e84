import sys
from pathlib import Path

import pytest

# Ensure the repository root is on path
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from cylindex.config import RunConfig, read_config_file, resolve_config
from cylindex.errors import ConfigError


def test_defaults():
    config = RunConfig()
    assert config.discretization().N == 2399
    assert config.thresholds().tau_gap == 1e-3
    assert RunConfig.from_dict(config.to_dict()) == config


def test_invalid_values_raise():
    with pytest.raises(ValueError):
        RunConfig(h=0.5)
    with pytest.raises(ValueError):
        RunConfig(tau_zero=1.0)
    with pytest.raises(ValueError):
        RunConfig(jobs=0)
    with pytest.raises(ValueError):
        RunConfig(rho_smoothing="spline")


def test_read_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("R = 16  # wider box\n\n# comment\njobs=4\n", encoding="utf-8")
    assert read_config_file(path) == {"R": "16", "jobs": "4"}
    config = RunConfig.load(path)
    assert config.R == 16.0 and config.jobs == 4

    path.write_text("R 16\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(path)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.cfg")


def test_bad_config_values(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"jobs": "many"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"colour": "red"})


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("h = 0.02\noutput = csv\n", encoding="utf-8")
    config = resolve_config(path, {"h": None, "output": "json", "jobs": 2})
    assert config.h == 0.02
    assert config.output == "json"
    assert config.jobs == 2
    assert resolve_config(None, {}) == RunConfig()
