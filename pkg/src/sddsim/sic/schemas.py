from __future__ import annotations

from dataclasses import dataclass, field
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sddsim.sic.exceptions import SicException

SicMode = Literal["linear", "lms", "nonlinear", "none", "perfect"]


class MemoryPolynomialBasis(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["memory_polynomial"] = "memory_polynomial"
    orders: tuple[int, ...] = (1, 3)
    # delays 0..memory-1
    memory: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def _check(self) -> MemoryPolynomialBasis:
        if not self.orders or any(p < 1 or p % 2 == 0 for p in self.orders):
            raise ValueError("orders must be odd and >= 1")
        return self

    @property
    def parameter_count(self) -> int:
        return len(self.orders) * self.memory


class NetworkBasis(BaseModel):
    """Feed-forward canceller over the last `memory` transmit symbols."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["network"] = "network"
    memory: int = Field(default=4, ge=1)
    hidden: tuple[int, ...] = (24,)
    steps: int = Field(default=3000, ge=0)
    learning_rate: float = Field(default=0.02, gt=0)
    # None: full-batch gradient steps
    batch_size: int | None = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)

    @property
    def parameter_count(self) -> int:
        widths = (2 * self.memory, *self.hidden, 2)
        mlp = sum(a * b + b for a, b in zip(widths, widths[1:]))
        return mlp + 2 * self.memory * 2  # linear skip path


BasisDescriptor = Annotated[
    MemoryPolynomialBasis | NetworkBasis, Field(discriminator="kind")
]


class SicConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    linear_depth: int = Field(default=4, ge=1)
    ridge_eps: float = Field(default=1e-9, gt=0)
    # sic_mode = "lms": adaptive fit of the linear canceller on the burst
    lms_step: float = Field(default=0.5, gt=0, lt=2)
    lms_passes: int = Field(default=5, ge=1)
    basis: BasisDescriptor = Field(default_factory=MemoryPolynomialBasis)
    # Calibration burst length for offline fitting (remote terminal silent).
    training_symbols: int = Field(default=4096, ge=16)
    fine_tune_step: float = Field(default=0.05, gt=0, lt=2)
    fine_tune_passes: int = Field(default=1, ge=0)
    suppression_cap_db: float = Field(default=100.0, gt=0)


@dataclass(frozen=True, eq=False)
class LinearCanceller:
    taps: np.ndarray
    # ridge fallback was used
    flagged: bool = False

    def __post_init__(self) -> None:
        arr = np.array(self.taps, dtype=np.complex128).reshape(-1)
        if arr.size < 1:
            raise SicException("empty_canceller")
        if not np.all(np.isfinite(arr)):
            raise SicException("non_finite_taps")
        arr.setflags(write=False)
        object.__setattr__(self, "taps", arr)

    @property
    def depth(self) -> int:
        return int(self.taps.shape[0])


@dataclass(frozen=True, eq=False)
class NonlinearCanceller:
    """
    Memory-polynomial coefficients (order-major) or a fitted network.

    Exactly one of `coefficients` / `network` is set, matching `basis.kind`.
    The network is never mutated after fitting; `fine_tune` works on a copy.
    """

    basis: MemoryPolynomialBasis | NetworkBasis
    coefficients: np.ndarray | None = None
    network: object | None = None
    loss_trace: tuple[float, ...] = field(default_factory=tuple)
    flagged: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.basis, MemoryPolynomialBasis):
            if self.coefficients is None:
                raise SicException("missing_coefficients")
            arr = np.array(self.coefficients, dtype=np.complex128).reshape(-1)
            if arr.size != self.basis.parameter_count or not np.all(np.isfinite(arr)):
                raise SicException("invalid_coefficients", f"size={arr.size}")
            arr.setflags(write=False)
            object.__setattr__(self, "coefficients", arr)
        elif self.network is None:
            raise SicException("missing_network")


Canceller = LinearCanceller | NonlinearCanceller


@dataclass(frozen=True)
class SuppressionCurve:
    """Measured digital suppression (dB) against pre-digital SINR (dB)."""

    sinr_db: tuple[float, ...]
    suppression_db: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.sinr_db or len(self.sinr_db) != len(self.suppression_db):
            raise SicException("invalid_suppression_curve")
        if any(b <= a for a, b in zip(self.sinr_db, self.sinr_db[1:])):
            raise SicException("suppression_curve_not_increasing")

    def at(self, sinr_db: float | np.ndarray) -> float | np.ndarray:
        """Linear interpolation, held constant outside the measured range."""
        return np.interp(sinr_db, self.sinr_db, self.suppression_db)
