"""Config documents and grid specifications accepted by the command line."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from refless.services.gapset import DivisorValidationError, GapPoint, classify_set, make_divisor
from refless.services.moebius import INFINITY, to_sphere_point
from refless.services.systems import (
    Normalization,
    ReflectionlessSystem,
    SingularSystem,
    System,
    build_system,
)

logger = logging.getLogger(__name__)

CONSTANT_PREFIX = "const:"


class CommandError(Exception):
    """Base error class for command-line input and output."""

    exit_code: int = 1

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ConfigSchemaError(CommandError):
    exit_code = 2


class OutputError(CommandError):
    exit_code = 4


def parse_extended(value: Any) -> float:
    """Numbers plus the string sentinels "-inf" and "inf"."""

    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf"):
            return math.inf
        if text == "-inf":
            return -math.inf
        try:
            value = float(text)
        except ValueError as exc:
            raise ValueError(f"expected a number, '-inf' or 'inf', got {value!r}") from exc
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers here")
    number = float(value)
    if math.isnan(number):
        raise ValueError("NaN is not allowed")
    return number


def format_extended(value: float) -> float | str:
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return value


def describe_validation_error(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        path = ".".join(str(item) for item in error["loc"]) or "<root>"
        parts.append(f"{path}: {error['msg']}")
    return "; ".join(parts)


# System configs -------------------------------------------------------------


class DivisorEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gap_index: int = Field(..., ge=0)
    mu: float
    s: int = Field(0, ge=0, le=1)

    @field_validator("mu", mode="before")
    @classmethod
    def _parse_mu(cls, value: Any) -> float:
        return parse_extended(value)


class SystemConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bands: list[tuple[float, float]] = Field(..., min_length=1)
    divisor: list[DivisorEntry] = Field(default_factory=list)
    g: Union[float, None] = None
    A_plus: float
    D: float

    @field_validator("bands", mode="before")
    @classmethod
    def _parse_bands(cls, value: Any) -> Any:
        if not isinstance(value, list):
            return value
        parsed = []
        for band in value:
            if isinstance(band, (list, tuple)):
                parsed.append([parse_extended(item) for item in band])
            else:
                parsed.append(band)
        return parsed

    @field_validator("A_plus", "D", "g")
    @classmethod
    def _finite(cls, value: float | None) -> float | None:
        if value is not None and not math.isfinite(value):
            raise ValueError("must be a finite number")
        return value

    def to_system(self) -> ReflectionlessSystem:
        gap_set = classify_set(self.bands)
        by_gap: dict[int, GapPoint] = {}
        for entry in self.divisor:
            if entry.gap_index >= len(gap_set.gaps):
                raise DivisorValidationError(
                    f"divisor gap_index {entry.gap_index} exceeds the {len(gap_set.gaps)} gap(s)"
                )
            if entry.gap_index in by_gap:
                raise DivisorValidationError(f"gap_index {entry.gap_index} is given twice")
            by_gap[entry.gap_index] = GapPoint(entry.mu, entry.s)
        points = [by_gap[index] for index in sorted(by_gap)]
        if len(points) != len(gap_set.gaps):
            missing = sorted(set(range(len(gap_set.gaps))) - set(by_gap))
            raise DivisorValidationError(f"divisor is missing gap_index {missing}")
        div = make_divisor(gap_set, points, self.g)
        return build_system(gap_set, div, Normalization(self.A_plus, self.D))

    @classmethod
    def from_system(cls, system: ReflectionlessSystem) -> SystemConfig:
        return cls(
            bands=[tuple(band) for band in system.gap_set.bands],
            divisor=[
                DivisorEntry(gap_index=index, mu=point.mu, s=point.s)
                for index, point in enumerate(system.div.points)
            ],
            g=system.div.g,
            A_plus=system.norm.A_plus,
            D=system.norm.D,
        )

    def to_document(self) -> dict[str, Any]:
        document: dict[str, Any] = {
            "bands": [[format_extended(lo), format_extended(hi)] for lo, hi in self.bands],
            "divisor": [
                {"gap_index": entry.gap_index, "mu": format_extended(entry.mu), "s": entry.s}
                for entry in self.divisor
            ],
        }
        if self.g is not None:
            document["g"] = self.g
        document["A_plus"] = self.A_plus
        document["D"] = self.D
        return document

    def to_json(self) -> str:
        return json.dumps(self.to_document(), separators=(",", ":"))


def load_config(path: str | Path) -> SystemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigSchemaError(f"Cannot read config {path}: {exc.strerror}") from exc
    try:
        config = SystemConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigSchemaError(f"{path}: {describe_validation_error(exc)}") from exc
    logger.debug(f"Loaded config {path}")
    return config


def load_system(argument: str) -> System:
    """A config path or a "const:a" literal for the singular system K_a."""

    if argument.startswith(CONSTANT_PREFIX):
        literal = argument[len(CONSTANT_PREFIX) :]
        try:
            value = parse_extended(literal)
        except ValueError as exc:
            raise ConfigSchemaError(f"{argument}: {exc}") from exc
        return SingularSystem(INFINITY if math.isinf(value) else to_sphere_point(value))
    return load_config(argument).to_system()


# Grids ----------------------------------------------------------------------


class RectRegion(BaseModel):
    re_lo: float
    re_hi: float
    im_lo: float = Field(..., gt=0)
    im_hi: float

    @model_validator(mode="after")
    def _ordered(self) -> RectRegion:
        if self.re_hi < self.re_lo or self.im_hi < self.im_lo:
            raise ValueError("rect bounds must satisfy re_lo <= re_hi and im_lo <= im_hi")
        return self


class BoundaryRegion(BaseModel):
    t_lo: float
    t_hi: float
    epsilon: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> BoundaryRegion:
        if self.t_hi < self.t_lo:
            raise ValueError("boundary bounds must satisfy t_lo <= t_hi")
        return self


class GridSpec(BaseModel):
    region: Union[RectRegion, BoundaryRegion]
    n: int = Field(..., ge=1)

    @classmethod
    def from_flag(cls, text: str, boundary: bool = False) -> GridSpec:
        """``re_lo,re_hi,im_lo,im_hi,n`` or, for boundary grids, ``t_lo,t_hi,eps,n``."""

        names = ("t_lo", "t_hi", "epsilon") if boundary else ("re_lo", "re_hi", "im_lo", "im_hi")
        items = [item.strip() for item in text.split(",")]
        if len(items) != len(names) + 1:
            raise ConfigSchemaError(
                f"grid: expected {len(names) + 1} comma-separated values, got {len(items)}"
            )
        region_cls = BoundaryRegion if boundary else RectRegion
        try:
            region = region_cls(**dict(zip(names, items[:-1])))
            return cls(region=region, n=items[-1])
        except ValidationError as exc:
            raise ConfigSchemaError(f"grid: {describe_validation_error(exc)}") from exc

    @property
    def is_boundary(self) -> bool:
        return isinstance(self.region, BoundaryRegion)

    @property
    def header(self) -> tuple[str, ...]:
        if self.is_boundary:
            return ("t", "epsilon", "re_m", "im_m")
        return ("re_z", "im_z", "re_m", "im_m")

    def points(self) -> np.ndarray:
        """Sample points, row-major: imaginary part outer, real part inner."""

        region = self.region
        if isinstance(region, BoundaryRegion):
            return np.linspace(region.t_lo, region.t_hi, self.n) + 1j * region.epsilon
        re = np.linspace(region.re_lo, region.re_hi, self.n)
        im = np.linspace(region.im_lo, region.im_hi, self.n)
        return (re[None, :] + 1j * im[:, None]).ravel()
