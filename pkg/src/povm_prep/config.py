"""Run configuration for the command-line front end.

A config is one JSON document. All angles are in units of pi, so ``0.8``
means ``4 pi / 5``. Unknown fields are rejected.
"""

from __future__ import annotations

import json
import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

COMMANDS = ("validate", "prepare", "sweep", "generate", "repeat", "oracle")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


PolarPi = Annotated[float, Field(ge=0.0, le=1.0, allow_inf_nan=False)]
AnglePi = Annotated[float, Field(allow_inf_nan=False)]


class Angle(_Strict):
    theta: PolarPi
    phi: AnglePi = 0.0


class PrimedPsi(Angle):
    """Explicit primed psi vector; its squared norm is free."""

    norm2: Annotated[float, Field(gt=0.0, allow_inf_nan=False)] = 1.0


class ExplicitBlock(_Strict):
    kind: Literal["explicit"]
    phi: list[Angle] = Field(min_length=2, max_length=4)


class Case1Block(_Strict):
    kind: Literal["case1"]
    theta_b1: PolarPi
    theta_b2: PolarPi
    k: Literal[1] = 1
    l: Literal[0, 1] = 0
    phi_b3_gauge: AnglePi = 0.0
    theta_b3_branch: Literal["principal", "supplement"] = "principal"


class Case2Block(_Strict):
    kind: Literal["case2"]
    theta_b1: PolarPi
    k: Literal[0, 1] = 0
    branch: Literal["same", "mirror"] = "same"


class Case3Block(_Strict):
    kind: Literal["case3"]
    theta_b1: PolarPi
    delta12: AnglePi
    delta13: AnglePi
    branch: tuple[Literal["principal", "supplement"], Literal["principal", "supplement"]] = (
        "supplement", "principal")


class EqualOverlapCase1Block(_Strict):
    kind: Literal["equal_overlap_case1"]
    theta_b3: PolarPi
    variant: Union[str, tuple[int, int, int, int, int]]


class EqualOverlapCase2Block(_Strict):
    kind: Literal["equal_overlap_case2"]
    k: Literal[0, 1] = 0
    branch: Literal["same", "mirror"] = "same"


AngleBlock = Annotated[
    Union[ExplicitBlock, Case1Block, Case2Block, Case3Block, EqualOverlapCase1Block, EqualOverlapCase2Block],
    Field(discriminator="kind"),
]


class TemperatureRange(_Strict):
    min: Annotated[float, Field(ge=0.0, allow_inf_nan=False)] = 0.0
    max: Annotated[float, Field(gt=0.0, allow_inf_nan=False)] = 3.0
    points: Annotated[int, Field(ge=2, le=100_000)] = 201

    @model_validator(mode="after")
    def _ordered(self) -> TemperatureRange:
        if self.max <= self.min:
            raise ValueError("temperature.max must exceed temperature.min")
        return self


KT = Annotated[float, Field(ge=0.0, allow_inf_nan=False)]


class Primed(_Strict):
    psi: Union[Literal["srm", "phi"], list[PrimedPsi]] = "srm"
    phi: Union[Literal["same"], list[Angle]] = "same"


class RunConfig(_Strict):
    command: Literal["validate", "prepare", "sweep", "generate", "repeat", "oracle"] | None = None
    n_outcomes: Annotated[int, Field(ge=2, le=4)] | None = None
    angles: AngleBlock | None = None
    psi: Union[Literal["self_consistent"], list[Angle], None] = None
    temperature: Union[KT, TemperatureRange, None] = None
    t_star: Union[KT, Literal["boundary"], None] = None
    overlap: list[list[Annotated[float, Field(allow_inf_nan=False)]]] | None = None
    oracle_grid_step: Annotated[float, Field(gt=0.0, le=0.1)] = 1e-3
    primed: Primed | None = None
    output_path: str | None = None
    output_format: Literal["csv", "json"] | None = None

    @field_validator("overlap")
    @classmethod
    def _square(cls, v):
        if v is not None and (not 2 <= len(v) <= 4 or any(len(r) != len(v) for r in v)):
            raise ValueError("overlap must be a square matrix of size 2 to 4")
        return v


def _loc(err: dict) -> str:
    return ".".join(str(p) for p in err["loc"]) or "<root>"


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config.

    Raises
    ------
    ConfigError
        With the line/column of a syntax error or the dotted field path of a
        schema violation.
    """
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        msgs = "; ".join(f"{_loc(e)}: {e['msg']}" for e in exc.errors())
        raise ConfigError(f"invalid config: {msgs}") from None


def _reject_constant(name: str) -> float:
    raise ConfigError(f"non-finite number {name} is not allowed in a config")


def pi_units(x: float) -> float:
    return x * math.pi
