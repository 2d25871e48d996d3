"""Unit tests for runtime settings and the error hierarchy."""

import pytest

from favard import config
from favard.exceptions import (
    ConfigurationError,
    ContourError,
    EXIT_USAGE,
    EXIT_VERDICT,
    IndexRangeError,
    PoleProximityError,
    SpecFileError,
    VerificationError,
    exit_code_for,
)


@pytest.fixture
def clean_env(monkeypatch):
    for name in ("FAVARD_SEED", "FAVARD_FORMAT", "FAVARD_LOG_LEVEL", "FAVARD_RUNTIME_YAML"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestSettings:
    """Test loading of config/runtime.yaml and environment overrides."""

    def test_defaults(self, clean_env):
        settings = config.load_settings()
        assert settings["REPORT_FORMAT"] == "json"
        assert settings["FLOAT_DIGITS"] == 17
        assert settings["TOLERANCES"]["gauss_borel"] == 1e-7

    def test_env_overrides(self, clean_env):
        clean_env.setenv("FAVARD_SEED", "7")
        clean_env.setenv("FAVARD_FORMAT", "CSV")
        clean_env.setenv("FAVARD_LOG_LEVEL", "debug")
        settings = config.load_settings()
        assert settings["SEED"] == 7
        assert settings["REPORT_FORMAT"] == "csv"
        assert settings["LOG_LEVEL"] == "DEBUG"

    def test_yaml_override(self, clean_env, tmp_path):
        path = tmp_path / "runtime.yaml"
        path.write_text("tolerances:\n  contour: 1.0e-5\nverify:\n  ensemble_size: 2\n", encoding="utf-8")
        clean_env.setenv("FAVARD_RUNTIME_YAML", str(path))
        settings = config.load_settings()
        assert settings["TOLERANCES"]["contour"] == 1e-5
        assert settings["TOLERANCES"]["weyl_routes"] == 1e-7
        assert settings["ENSEMBLE_SIZE"] == 2

    @pytest.mark.parametrize(
        "text",
        ["tolerances:\n  contour: -1\n", "tolerances:\n  contour: tight\n", "report:\n  format: xml\n"],
    )
    def test_invalid_yaml(self, clean_env, tmp_path, text):
        path = tmp_path / "runtime.yaml"
        path.write_text(text, encoding="utf-8")
        clean_env.setenv("FAVARD_RUNTIME_YAML", str(path))
        with pytest.raises(ConfigurationError):
            config.load_settings()

    def test_invalid_seed(self, clean_env):
        clean_env.setenv("FAVARD_SEED", "abc")
        with pytest.raises(ConfigurationError):
            config.load_settings()

    def test_unknown_tolerance(self):
        assert config.get_tolerance("contour") > 0
        with pytest.raises(ConfigurationError):
            config.get_tolerance("no_such_check")


class TestExitCodes:
    """Test the mapping from exceptions to exit codes."""

    @pytest.mark.parametrize(
        "error,code",
        [
            (SpecFileError("x.json", "bad"), EXIT_USAGE),
            (IndexRangeError(9, 3), EXIT_USAGE),
            (ConfigurationError("report.format", "bad"), EXIT_USAGE),
            (PoleProximityError(1j, 0.0), EXIT_VERDICT),
            (ContourError(0.0, "radius must be positive"), EXIT_VERDICT),
            (VerificationError("uw_identity", 1.0, 1e-7), EXIT_VERDICT),
        ],
    )
    def test_codes(self, error, code):
        assert exit_code_for(error) == code

    def test_error_dict(self):
        payload = VerificationError("uw_identity", 1.0, 1e-7, {"N": 3}).to_dict()
        assert payload["error_type"] == "VerificationError"
        assert payload["error_code"] == "VERIFICATION_FAILED"
        assert payload["details"] == {"check": "uw_identity", "residual": 1.0, "tolerance": 1e-7, "N": 3}
