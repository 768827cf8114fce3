"""Tests for numerical settings."""

import pytest
from pydantic import ValidationError

from refless.core.config import DEFAULT_TOLERANCES, Settings, get_settings


def test_defaults_are_valid() -> None:
    settings = Settings()
    assert settings.metric_grid_n >= 8
    assert settings.tolerances == DEFAULT_TOLERANCES


@pytest.mark.parametrize(
    "overrides",
    [
        {"metric_grid_n": 4},
        {"laurent_samples": 63},
        {"laurent_samples": 32},
        {"eps_ladder": (1e-3,)},
        {"eps_ladder": (1e-3, 1e-3)},
        {"eps_ladder": (1e-3, -1e-4)},
        {"suite_scale": 0.0},
    ],
)
def test_invalid_settings_are_rejected(overrides: dict) -> None:
    with pytest.raises(ValidationError):
        Settings(**overrides)


def test_partial_tolerances_are_merged_with_defaults() -> None:
    settings = Settings(tolerances={"oracle": 1e-9})
    assert settings.tolerances["oracle"] == 1e-9
    assert settings.tolerances["masses"] == DEFAULT_TOLERANCES["masses"]


def test_environment_overrides(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("REFLESS_SUITE_SCALE", "0.25")
    monkeypatch.setenv("REFLESS_TOLERANCES", '{"degeneration": 0.1}')
    settings = get_settings()
    assert settings.suite_scale == 0.25
    assert settings.tolerances["degeneration"] == 0.1
    assert settings.tolerances["oracle"] == DEFAULT_TOLERANCES["oracle"]
