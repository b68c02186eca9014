from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sddsim.baseline_chain.schemas import CodecConfig, ImagePatch, LdpcCode
from sddsim.channel.schemas import ChannelRealization, LinkBudget
from sddsim.feasibility.schemas import Paradigm
from sddsim.metrics.schemas import MetricsConfig
from sddsim.semantic_chain.model import JsccModel
from sddsim.sic.schemas import SicConfig, SicMode

LdpcRate = Literal["1/3", "7/12"]


class ParadigmConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    paradigm: Paradigm
    # Share of the symbol budget given to A->B (FDD_TDD only).
    resource_split_alpha: float = Field(default=0.5, ge=0, le=1)
    sic_mode: SicMode = "nonlinear"
    pre_digital_sinr_db: float = -40.0
    ldpc_rate: LdpcRate = "1/3"
    codec_quality: int = Field(default=20, ge=0, le=63)


class SeriesConfig(BaseModel):
    """One curve of a sweep."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    label: str
    paradigm: Paradigm
    sic_mode: SicMode = "nonlinear"
    ldpc_rate: LdpcRate = "1/3"
    resource_split_alpha: float = Field(default=0.5, ge=0, le=1)


DEFAULT_SERIES = (
    SeriesConfig(label="SDD", paradigm="SDD", sic_mode="nonlinear"),
    SeriesConfig(label="IBFD", paradigm="IBFD", sic_mode="nonlinear"),
    SeriesConfig(label="IBFD_PERFECT_SIC", paradigm="IBFD", sic_mode="perfect"),
)


class DuplexConfig(BaseModel):
    """The `[duplex]` section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # SDD direction counts as failed below this MS-SSIM.
    sdd_outage_ms_ssim: float = Field(default=0.5, ge=0, le=1)
    bp_max_iter: int = Field(default=50, ge=1)
    # Warm-start the canceller on the data frame after the offline fit.
    online_fine_tune: bool = False
    # Pre-digital SINR of the single `demo` run.
    demo_sinr_db: float = -40.0


class SweepConfig(BaseModel):
    """The `[sweep]` section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sinr_db: tuple[float, ...] = tuple(float(s) for s in range(-50, -29, 2))
    trials: int = Field(default=20, ge=1)
    series: tuple[SeriesConfig, ...] = DEFAULT_SERIES
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> SweepConfig:
        if not self.sinr_db:
            raise ValueError("sinr_db must not be empty")
        if not self.series:
            raise ValueError("series must not be empty")
        labels = [s.label for s in self.series]
        if len(set(labels)) != len(labels):
            raise ValueError("series labels must be unique")
        return self


@dataclass(frozen=True)
class TwoWayChannel:
    """Per-trial held realizations: desired links and each terminal's SI channel."""

    distance_m: float
    budget: LinkBudget
    h_ab: ChannelRealization
    h_ba: ChannelRealization
    si_a: ChannelRealization
    si_b: ChannelRealization


@dataclass(frozen=True)
class ChainAssets:
    """Everything the chains need besides the scenario."""

    codes: dict[str, LdpcCode]
    sic: SicConfig
    duplex: DuplexConfig
    model: JsccModel | None = None
    codec: CodecConfig = field(default_factory=CodecConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    # Seed for the shorter FDD_TDD codes built on demand.
    ldpc_seed: int = 2023


@dataclass(frozen=True)
class DirectionResult:
    ms_ssim: float
    ms_ssim_db: float
    psnr: float
    ber: float | None
    failed: bool
    reconstruction: ImagePatch


@dataclass(frozen=True)
class TerminalMeasurement:
    sinr_pre_digital_db: float
    sinr_post_digital_db: float
    digital_suppression_db: float
    suppression_flagged: bool = False


@dataclass(frozen=True)
class SimResult:
    paradigm: Paradigm
    sic_mode: SicMode
    ab: DirectionResult
    ba: DirectionResult
    # Measured at the receiving terminal of each direction (B for ab, A for ba).
    at_b: TerminalMeasurement
    at_a: TerminalMeasurement
    seed: int
    stream: tuple[int, ...]
    runtime_s: float = field(default=0.0, compare=False)

    @property
    def sinr_pre_digital_db(self) -> float:
        return float(np.mean([t.sinr_pre_digital_db for t in (self.at_a, self.at_b)]))

    @property
    def sinr_post_digital_db(self) -> float:
        return float(np.mean([t.sinr_post_digital_db for t in (self.at_a, self.at_b)]))

    @property
    def digital_suppression_db(self) -> float:
        values = [t.digital_suppression_db for t in (self.at_a, self.at_b)]
        return float(np.mean(values))


@dataclass(frozen=True)
class SweepRow:
    series: str
    paradigm: Paradigm
    sic_mode: SicMode
    sinr_db: float
    trials: int
    ms_ssim_mean: float
    ms_ssim_stderr: float
    ms_ssim_db_mean: float
    ber_mean: float | None
    failure_rate: float
    suppression_db_mean: float


@dataclass(frozen=True)
class SweepOutcome:
    rows: list[SweepRow]
    # First trial of every (series, sinr) point, for image dumps.
    samples: dict[tuple[str, float], SimResult]
