from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from sddsim.feasibility.exceptions import FeasibilityException

Paradigm = Literal["FDD_TDD", "IBFD", "SDD"]
PARADIGMS: tuple[Paradigm, ...] = ("FDD_TDD", "IBFD", "SDD")

# Frontier monotonicity slack.
_MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class DirectionalRates:
    r_chan_ab: float
    r_chan_ba: float
    r_src_ab: float
    r_src_ba: float

    def __post_init__(self) -> None:
        values = (self.r_chan_ab, self.r_chan_ba, self.r_src_ab, self.r_src_ba)
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise FeasibilityException("negative_or_non_finite_rate", str(values))


@dataclass(frozen=True)
class FeasibilityPoint:
    f_ab: float
    f_ba: float

    def __post_init__(self) -> None:
        for v in (self.f_ab, self.f_ba):
            if not math.isfinite(v) or v < 0:
                raise FeasibilityException(
                    "invalid_feasibility", f"{self.f_ab}, {self.f_ba}"
                )

    def scaled(self, c: float) -> FeasibilityPoint:
        return FeasibilityPoint(self.f_ab * c, self.f_ba * c)


@dataclass(frozen=True)
class RegionBoundary:
    """
    Achievable frontier as a polyline, walked from the (max f_ab, 0) end
    towards (0, max f_ba). `space` is "rate" (bits/symbol) before the
    efficiency/source-rate mapping and "feasibility" after it.
    """

    paradigm: Paradigm
    vertices: tuple[FeasibilityPoint, ...]
    space: Literal["rate", "feasibility"] = "feasibility"

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise FeasibilityException("boundary_needs_two_vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            scale = max(a.f_ab, a.f_ba, b.f_ab, b.f_ba, 1.0) * _MONOTONE_TOL
            if b.f_ba < a.f_ba - scale or b.f_ab > a.f_ab + scale:
                raise FeasibilityException(
                    "boundary_not_monotone", f"{self.paradigm}: {a} -> {b}"
                )

    @property
    def max_f_ab(self) -> float:
        return max(v.f_ab for v in self.vertices)

    @property
    def max_f_ba(self) -> float:
        return max(v.f_ba for v in self.vertices)


class EfficiencyModel(BaseModel):
    """Coding efficiency per chain and the post-SIC residual (dB above noise)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    eta_sep: float = Field(default=0.75, gt=0, le=1)
    eta_jscc: float = Field(default=0.95, gt=0, le=1)
    residual_si_db: float = 10.0

    @model_validator(mode="after")
    def _check(self) -> EfficiencyModel:
        if self.eta_sep > self.eta_jscc:
            raise ValueError("eta_sep must not exceed eta_jscc")
        return self


class FeasibilityConfig(BaseModel):
    """The `[feasibility]` section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    efficiency: EfficiencyModel = Field(default_factory=EfficiencyModel)
    n_points: int = Field(default=11, ge=2)
    distance_ab_m: float = Field(default=25.0, gt=0)
    distance_ba_m: float = Field(default=50.0, gt=0)
    # Source coding rates (bits/symbol equivalent) per direction.
    source_rate_ab: float = Field(default=1.0, gt=0)
    source_rate_ba: float = Field(default=1.0, gt=0)
    mode: Literal["analytic", "empirical"] = "analytic"
    # Sweep CSV for the empirical mode.
    empirical_csv: str | None = None
