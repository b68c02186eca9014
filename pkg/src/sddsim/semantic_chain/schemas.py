from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sddsim.semantic_chain.exceptions import JsccException

DIRECTION_AB = 0
DIRECTION_BA = 1
MODEL_VERSION = 1


class ModelSpec(BaseModel):
    """Layer widths of the JSCC pair; hashed into every model file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    patch_size: int = Field(default=16, ge=8)
    k_symbols: int = Field(default=192, ge=1)
    hidden: tuple[int, ...] = (256, 256)
    cond_dim: int = Field(default=16, ge=0)
    n_directions: int = Field(default=2, ge=1)
    conditioning: Literal["embedding", "separate"] = "embedding"

    @model_validator(mode="after")
    def _check(self) -> ModelSpec:
        if not self.hidden or any(w < 1 for w in self.hidden):
            raise ValueError("hidden widths must be positive")
        if self.conditioning == "embedding" and self.cond_dim < 1:
            raise ValueError("embedding conditioning needs cond_dim >= 1")
        return self

    @property
    def pixels(self) -> int:
        return self.patch_size * self.patch_size

    @property
    def _cond(self) -> int:
        return self.cond_dim if self.conditioning == "embedding" else 0

    def encoder_widths(self) -> tuple[int, ...]:
        return (self.pixels + self._cond, *self.hidden, 2 * self.k_symbols)

    def decoder_widths(self) -> tuple[int, ...]:
        return (2 * self.k_symbols + self._cond, *self.hidden, self.pixels)

    @property
    def parameter_count(self) -> int:
        def dense(widths: tuple[int, ...]) -> int:
            return sum(a * b + b for a, b in zip(widths, widths[1:]))

        pair = dense(self.encoder_widths()) + dense(self.decoder_widths())
        if self.conditioning == "embedding":
            return pair + self.n_directions * self.cond_dim
        return self.n_directions * pair

    def canonical(self) -> str:
        return self.model_dump_json()

    def spec_hash(self) -> bytes:
        return hashlib.sha256(self.canonical().encode()).digest()


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(default=0.05, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    batch_size: int = Field(default=32, ge=1)
    steps: int = Field(default=6000, ge=0)
    seed: int = Field(default=7, ge=0)
    sinr_train_range_db: tuple[float, float] = (-50.0, -30.0)
    loss: Literal["mse", "ms_ssim"] = "mse"
    patch_size: int = Field(default=16, ge=8)
    # "measured": alpha * SI(own tx) with alpha from measured digital suppression
    residual_mode: Literal["measured", "gaussian"] = "measured"
    # Desired-link SNR seen during training.
    snr_db: float = 27.0
    init_seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check(self) -> TrainConfig:
        low, high = self.sinr_train_range_db
        if low > high:
            raise ValueError("sinr_train_range_db low > high")
        return self


@dataclass(frozen=True, eq=False)
class SemanticVector:
    values: np.ndarray
    direction_id: int

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise JsccException("non_finite_semantic_vector")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.shape[0])
