from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from pydantic import Field, model_validator
from pydantic_settings import (  # type: ignore[import-not-found]
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from sddsim.baseline_chain.schemas import CodecConfig, ImagePatch, LdpcConfig
from sddsim.channel.schemas import ChannelConfig
from sddsim.duplex_sim.schemas import DuplexConfig, SweepConfig
from sddsim.feasibility.schemas import FeasibilityConfig
from sddsim.metrics.schemas import MetricsConfig
from sddsim.semantic_chain.schemas import ModelSpec, TrainConfig
from sddsim.sic.schemas import SicConfig

Split = Literal["train", "eval"]


class ExperimentConfig(BaseSettings):
    """
    One experiment, parsed from a TOML document.

    The document is the only source: environment variables and dotenv
    files are never consulted, so a config file fully determines a run.
    Unknown keys are rejected at every level.
    """

    model_config = SettingsConfigDict(extra="forbid", frozen=True)

    corpus_dir: str = "corpus"
    out_dir: str = "out"
    seed: int = Field(default=7, ge=0)
    patch_size: int = Field(default=16, ge=8)
    # Share of corpus files (by filename hash) held out for evaluation.
    eval_fraction: float = Field(default=0.25, ge=0, lt=1)
    # Model file read by `sweep`/`demo`; defaults to <out_dir>/model.sddj.
    model_path: str | None = None

    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    ldpc: LdpcConfig = Field(default_factory=LdpcConfig)
    codec: CodecConfig = Field(default_factory=CodecConfig)
    sic: SicConfig = Field(default_factory=SicConfig)
    jscc: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    feasibility: FeasibilityConfig = Field(default_factory=FeasibilityConfig)
    duplex: DuplexConfig = Field(default_factory=DuplexConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @model_validator(mode="after")
    def _check(self) -> ExperimentConfig:
        sizes = {self.patch_size, self.jscc.patch_size, self.train.patch_size}
        if len(sizes) != 1:
            raise ValueError(
                "patch_size, jscc.patch_size and train.patch_size must agree, "
                f"got {sorted(sizes)}"
            )
        built = self.ldpc.rates
        missing = [s.ldpc_rate for s in self.sweep.series if s.ldpc_rate not in built]
        if missing:
            raise ValueError(
                f"sweep series use rates absent from ldpc.rates: {missing}"
            )
        return self


@dataclass(frozen=True)
class Corpus:
    """Patches in filename order, each tagged with its split."""

    patches: tuple[ImagePatch, ...]
    names: tuple[str, ...]
    splits: tuple[Split, ...]

    def __len__(self) -> int:
        return len(self.patches)

    def select(self, split: Split) -> list[ImagePatch]:
        return [p for p, s in zip(self.patches, self.splits) if s == split]
