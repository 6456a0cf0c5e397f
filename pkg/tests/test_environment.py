"""环境检查测试"""

from src.utils import environment


def test_python_version_is_supported():
    assert environment.check_python_version()


def test_required_packages_are_installed():
    ok, missing = environment.check_dependencies()
    assert ok, missing


def test_missing_package_is_reported(monkeypatch):
    monkeypatch.setitem(environment.REQUIRED_PACKAGES, "no_such_module_xyz", "no-such-dist")
    ok, missing = environment.check_dependencies()
    assert not ok
    assert missing == ["no-such-dist"]
    assert not environment.check_environment()


def test_environment_record():
    record = environment.describe_environment()
    assert record["os_type"] in (environment.OS_TYPE_WINDOWS, environment.OS_TYPE_MACOS,
                                 environment.OS_TYPE_LINUX, environment.OS_TYPE_UNKNOWN)
    assert record["packages"]["mpmath"] != "missing"
    assert set(record["packages"]) >= {"mpmath", "numpy", "rich", "pyyaml", "flask"}
