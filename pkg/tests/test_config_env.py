"""
Unit tests for Config environment loading and protected settings
"""

import logging

import pytest

from primerace.config import Config, DevConfig, ProdConfig, _auto_detect
from primerace.errors import ConfigurationError


def test_env_class_structure():
    """Test that Env class is properly nested"""
    assert hasattr(Config, 'Env')
    assert Config.Env.file == ".env"
    assert Config.Env.auto_load is True
    assert Config.Env.override is True


def test_devconfig_env():
    """Test DevConfig has its own Env configuration"""
    assert DevConfig.Env.file == ".env.dev"
    assert DevConfig.Env.override is True
    assert DevConfig.LOG_LEVEL == "DEBUG"
    assert DevConfig.MC_SAMPLES < Config.MC_SAMPLES


def test_prodconfig_env():
    """Test ProdConfig has its own Env configuration"""
    assert ProdConfig.Env.file == ".env.prod"
    assert ProdConfig.Env.auto_load is True
    assert ProdConfig.Env.override is False  # system env wins in long runs


def test_load_env_with_primerace_prefix(monkeypatch):
    """Only PRIMERACE_* variables are loaded"""
    monkeypatch.setenv('PRIMERACE_WORKERS', '3')
    monkeypatch.setenv('PRIMERACE_B_ROUTE', 'char')
    monkeypatch.setenv('PRIMERACE_ZERO_SUM_LOG_PI', 'true')
    monkeypatch.setenv('MC_SAMPLES', '5')

    class TestConfig(Config):
        pass

    TestConfig.load_from_env()

    assert TestConfig.WORKERS == 3
    assert TestConfig.B_ROUTE == 'char'
    assert TestConfig.ZERO_SUM_LOG_PI is True
    assert TestConfig.MC_SAMPLES == Config.MC_SAMPLES
    assert Config.B_ROUTE == 'residue'


def test_env_type_conversion():
    """Test automatic type conversion for environment values"""
    assert _auto_detect('true') is True
    assert _auto_detect('off') is False
    assert _auto_detect('42') == 42
    assert _auto_detect('-7') == -7
    assert _auto_detect('1e-3') == pytest.approx(0.001)
    assert _auto_detect('2,5,11') == ['2', '5', '11']
    assert _auto_detect('residue') == 'residue'
    for empty in ('', '~', 'null', 'None'):
        assert _auto_detect(empty) is None


def test_log_level_is_validated(monkeypatch, caplog):
    monkeypatch.setenv('PRIMERACE_LOG_LEVEL', 'chatty')

    class TestConfig(Config):
        pass

    with caplog.at_level(logging.WARNING, logger="primerace.config"):
        TestConfig.load_from_env()

    assert TestConfig.LOG_LEVEL == "INFO"
    assert "Invalid LOG_LEVEL" in caplog.text


def test_log_level_is_uppercased(monkeypatch):
    monkeypatch.setenv('PRIMERACE_LOG_LEVEL', 'debug')

    class TestConfig(Config):
        pass

    TestConfig.load_from_env()
    assert TestConfig.LOG_LEVEL == "DEBUG"


def test_internal_class_cannot_be_overridden():
    """Test that Config.Internal class cannot be overridden in child classes"""
    with pytest.raises(TypeError, match="Cannot override Config.Internal"):
        class BadConfig(Config):
            class Internal:
                CACHE_MAGIC = b"XXXX"


def test_internal_settings_ignore_environment(monkeypatch, caplog):
    monkeypatch.setenv('PRIMERACE_MAX_RACE_X', '5')

    class TestConfig(Config):
        pass

    with caplog.at_level(logging.WARNING, logger="primerace.config"):
        TestConfig.load_from_env()

    assert TestConfig.Internal.MAX_RACE_X == 10 ** 10
    assert not hasattr(TestConfig, 'MAX_RACE_X')
    assert "Cannot override internal setting" in caplog.text


def test_internal_class_structure():
    assert Config.Internal.CACHE_MAGIC == b"PRCS"
    assert Config.Internal.TRACE_MAGIC == b"PRTR"
    assert Config.Internal.MIN_SIMPLEX_R == 2
    assert Config.Internal.MAX_SIMPLEX_R == 8
    assert Config.Internal.B_MATRIX_HEADER[0] == "a"


def test_calibration_from_environment(monkeypatch):
    monkeypatch.setenv('PRIMERACE_CALIBRATION_EXTREME_TAU', '0.02')
    derived = Config.derive("EnvCalibrated")
    derived.load_from_env()

    assert derived.Calibration.EXTREME_TAU == pytest.approx(0.02)
    assert Config.Calibration.EXTREME_TAU == pytest.approx(0.01)


def test_unknown_calibration_from_environment_is_ignored(monkeypatch, caplog):
    monkeypatch.setenv('PRIMERACE_CALIBRATION_NOT_A_CONSTANT', '3')
    derived = Config.derive("EnvCalibrated")

    with caplog.at_level(logging.WARNING, logger="primerace.config"):
        derived.load_from_env()

    assert "Failed to parse PRIMERACE_CALIBRATION_NOT_A_CONSTANT" in caplog.text
    assert not hasattr(derived.Calibration, 'NOT_A_CONSTANT')


def test_derive_does_not_leak():
    derived = Config.derive("Tweaked", calibration={"small_b_c": 12.0}, MC_SAMPLES=10 ** 4)

    assert derived.Calibration.SMALL_B_C == 12.0
    assert derived.MC_SAMPLES == 10 ** 4
    assert Config.Calibration.SMALL_B_C == 30.0
    assert Config.MC_SAMPLES == 10 ** 6
    assert issubclass(derived, Config)


def test_apply_unknown_calibration():
    derived = Config.derive("Tweaked")
    with pytest.raises(ConfigurationError, match="Unknown calibration constant"):
        derived.apply_calibration({"NOPE": 1.0})


def test_calibration_snapshot_lists_constants():
    snapshot = Config.calibration_snapshot()
    assert snapshot["CROSS_ROUTE_C0"] == 20.0
    assert all(name.isupper() for name in snapshot)


def test_cache_path_reads_environment_at_call_time(monkeypatch, tmp_path):
    monkeypatch.setenv('PRIMERACE_CACHE_DIR', str(tmp_path / "elsewhere"))
    assert Config.cache_path() == tmp_path / "elsewhere"


def test_load_env_from_file(monkeypatch, tmp_path):
    """Test loading from .env file"""
    pytest.importorskip("dotenv")
    env_file = tmp_path / ".env.test"
    env_file.write_text("PRIMERACE_SEGMENT_SIZE=131072\nPRIMERACE_CHECKPOINTS_PER_DECADE=4\n")
    # registered so monkeypatch restores them after load_dotenv writes
    monkeypatch.setenv('PRIMERACE_SEGMENT_SIZE', '65536')
    monkeypatch.setenv('PRIMERACE_CHECKPOINTS_PER_DECADE', '10')

    class TestConfig(Config):
        class Env:
            file = str(env_file)
            auto_load = True
            override = True

    TestConfig.load_from_env()

    assert TestConfig.SEGMENT_SIZE == 131072
    assert TestConfig.CHECKPOINTS_PER_DECADE == 4


def test_env_file_does_not_override_when_disabled(monkeypatch, tmp_path):
    pytest.importorskip("dotenv")
    env_file = tmp_path / ".env.prod"
    env_file.write_text("PRIMERACE_WORKERS=7\n")
    monkeypatch.setenv('PRIMERACE_WORKERS', '2')

    class TestConfig(ProdConfig):
        pass

    TestConfig.load_from_env(str(env_file))
    assert TestConfig.WORKERS == 2


@pytest.mark.parametrize("setting,value,match", [
    ("LOG_LEVEL", "LOUD", "LOG_LEVEL"),
    ("WORKERS", 0, "WORKERS"),
    ("SEGMENT_SIZE", 100, "SEGMENT_SIZE"),
    ("SMOOTHING_Y_CAP", 10, "SMOOTHING_Y_CAP"),
    ("B_ROUTE", "zeros", "B_ROUTE"),
])
def test_validate_rejects_bad_settings(setting, value, match):
    derived = Config.derive("Broken", **{setting: value})
    with pytest.raises(ConfigurationError, match=match):
        derived.validate()


def test_validate_rejects_bad_calibration():
    with pytest.raises(ConfigurationError, match="CROSS_ROUTE_C0"):
        Config.derive("Broken", calibration={"CROSS_ROUTE_C0": 40.0}).validate()


def test_default_configs_validate():
    assert Config.validate() is True
    assert DevConfig.validate() is True
    assert ProdConfig.validate() is True


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
