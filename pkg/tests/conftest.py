from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Callable, Iterator

import numpy as np
import pytest

from refless.core.config import get_settings
from refless.services.gapset import GapPoint, classify_set, make_divisor
from refless.services.systems import Normalization, ReflectionlessSystem, build_system

INF = math.inf

FREE_JACOBI_CONFIG: dict[str, Any] = {
    "bands": [[-2, 2]],
    "divisor": [
        {"gap_index": 0, "mu": "-inf", "s": 0},
        {"gap_index": 1, "mu": "inf", "s": 0},
    ],
    "g": -0.5,
    "A_plus": 0,
    "D": 1,
}

DIRAC_CONFIG: dict[str, Any] = {
    "bands": [["-inf", -1], [1, "inf"]],
    "divisor": [{"gap_index": 0, "mu": 0, "s": 1}],
    "A_plus": 0,
    "D": 1,
}


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    """Settings are cached per process; tests that patch the environment need a reset."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def free_jacobi() -> ReflectionlessSystem:
    gap_set = classify_set([(-2.0, 2.0)])
    div = make_divisor(gap_set, [GapPoint(-INF, 0), GapPoint(INF, 0)], g=-0.5)
    return build_system(gap_set, div, Normalization(0.0, 1.0))


@pytest.fixture
def dirac_system() -> ReflectionlessSystem:
    """R minus (-1, 1) with the pole at 0 carried by m_plus; m_plus(infinity) = i."""
    gap_set = classify_set([(-INF, -1.0), (1.0, INF)])
    div = make_divisor(gap_set, [GapPoint(0.0, 1)])
    return build_system(gap_set, div, Normalization(0.0, 1.0))


@pytest.fixture
def two_gap_dirac() -> ReflectionlessSystem:
    gap_set = classify_set([(-INF, -2.0), (-1.0, 0.5), (1.5, INF)])
    div = make_divisor(gap_set, [GapPoint(-1.5, 0), GapPoint(1.0, 1)])
    return build_system(gap_set, div, Normalization(0.3, 1.7))


@pytest.fixture
def schrodinger_system() -> ReflectionlessSystem:
    gap_set = classify_set([(0.0, 1.0), (2.0, INF)])
    div = make_divisor(gap_set, [GapPoint(-1.0, 1), GapPoint(1.4, 0)])
    return build_system(gap_set, div, Normalization(0.5, 2.0))


@pytest.fixture
def one_gap_jacobi() -> ReflectionlessSystem:
    gap_set = classify_set([(-2.0, -0.5), (0.5, 2.0)])
    div = make_divisor(gap_set, [GapPoint(-3.0, 1), GapPoint(0.2, 1), GapPoint(INF, 0)])
    return build_system(gap_set, div, Normalization(-0.4, 1.3))


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    def _write(document: dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def free_jacobi_config() -> dict[str, Any]:
    return json.loads(json.dumps(FREE_JACOBI_CONFIG))


@pytest.fixture
def dirac_config() -> dict[str, Any]:
    return json.loads(json.dumps(DIRAC_CONFIG))
