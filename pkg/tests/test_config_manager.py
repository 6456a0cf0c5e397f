"""配置管理测试"""

import json

import pytest
import yaml

from src.core.config_manager import ConfigManager
from src.core.errors import QConfigError, QUsageError
from src.core.qcore import Precision
from src.core.qsturm import Coupling


def test_defaults_are_valid():
    manager = ConfigManager()
    assert manager.validate_config() == (True, "")
    run = manager.to_run_config()
    assert run.q == 0.5
    assert (run.k_min, run.k_max) == (-40, 60)
    assert run.precision is Precision.BINARY64
    assert run.coupling is Coupling.POINT
    assert run.q_param().structural_m == 1


def test_missing_file_falls_back_to_defaults(tmp_path):
    manager = ConfigManager(str(tmp_path / "absent.json"))
    assert manager.config == manager.default_config
    assert not (tmp_path / "absent.json").exists()


def test_json_file_is_merged(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"q": 0.3, "grid": {"k_max": 20}}), encoding="utf-8")
    manager = ConfigManager(str(path))
    assert manager.get_config_value("q") == 0.3
    assert manager.get_config_value("grid.k_max") == 20
    assert manager.get_config_value("grid.k_min") == -40


def test_yaml_file_is_merged(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"q_structural": 2, "tolerances": {"fit": 1e-4}}),
                    encoding="utf-8")
    run = ConfigManager(str(path)).to_run_config()
    assert run.q_structural == 2
    assert run.fit_tol == 1e-4
    assert run.pivot_tol == 1e-8
    assert run.q_param().structural_m == 2


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_malformed_file(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(QConfigError):
        ConfigManager(str(path))


def test_config_error_is_usage_error():
    assert issubclass(QConfigError, QUsageError)
    assert QConfigError("x").exit_code == 2


def test_overrides_skip_none():
    manager = ConfigManager()
    manager.apply_overrides({"q": 0.25, "grid.k_min": -5, "jobs": None})
    assert manager.get_config_value("q") == 0.25
    assert manager.get_config_value("grid.k_min") == -5
    assert manager.get_config_value("jobs") == 1


def test_get_missing_key():
    manager = ConfigManager()
    assert manager.get_config_value("grid.nope") is None
    assert manager.get_config_value("q.deeper", "fallback") == "fallback"


@pytest.mark.parametrize("key, value", [
    ("q", 1.5),
    ("q", "half"),
    ("q_structural", 0),
    ("grid.k_min", 100),
    ("tolerances.fit", -1.0),
    ("precision", "quad"),
    ("jobs", 0),
    ("coupling", "sideways"),
    ("out_dir", ""),
])
def test_invalid_values(key, value):
    manager = ConfigManager()
    manager.update_config(key, value)
    valid, message = manager.validate_config()
    assert not valid
    assert message
    with pytest.raises(QConfigError):
        manager.to_run_config()


@pytest.mark.parametrize("name", ["saved.json", "saved.yml"])
def test_save_and_reload(tmp_path, name):
    manager = ConfigManager()
    manager.update_config("grid.k_max", 30)
    path = tmp_path / name
    assert manager.save_config(str(path))
    assert ConfigManager(str(path)).get_config_value("grid.k_max") == 30


def test_save_without_path():
    assert not ConfigManager().save_config()
