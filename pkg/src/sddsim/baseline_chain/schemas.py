from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp  # type: ignore[import-not-found]
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sddsim.baseline_chain.exceptions import CodecException, LdpcException

# LLR convention: positive => bit 0 more likely. Values are clamped here.
LLR_MAX = 30.0


@dataclass(frozen=True, eq=False)
class ImagePatch:
    """Grayscale patch, pixels (height, width) in [0, 1], row-major."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise CodecException("patch_not_2d", f"shape={arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min(initial=0.0) < 0 or arr.max(
            initial=0.0
        ) > 1:
            raise CodecException("patch_values_out_of_range")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @classmethod
    def filled(cls, height: int, width: int, value: float) -> ImagePatch:
        return cls(np.full((height, width), value))


@dataclass(frozen=True, eq=False)
class Bitstream:
    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits).reshape(-1)
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise CodecException("non_binary_bitstream")
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    def __len__(self) -> int:
        return int(self.bits.shape[0])

    def __xor__(self, other: Bitstream) -> Bitstream:
        return Bitstream(self.bits ^ other.bits)

    def padded(self, n: int) -> Bitstream:
        out = np.zeros(n, dtype=np.uint8)
        m = min(n, len(self))
        out[:m] = self.bits[:m]
        return Bitstream(out)


@dataclass(frozen=True, eq=False)
class LlrVector:
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64).reshape(-1)
        arr = np.clip(arr, -LLR_MAX, LLR_MAX)
        arr = np.nan_to_num(arr, nan=0.0)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """
    Binary parity-check code with a systematic-by-elimination encoder.

    `info_cols` are the codeword positions carrying message bits (the
    non-pivot columns of H's reduced row echelon form); `parity_cols` are
    the pivots and `parity_map` (len(parity_cols) x k, GF(2)) gives
    c[parity_cols] = parity_map @ msg.
    """

    h: sp.csr_matrix
    info_cols: np.ndarray
    parity_cols: np.ndarray
    parity_map: np.ndarray
    label: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise LdpcException("zero_rate_code", f"n={self.n} rank={self.n - self.k}")

    @property
    def n(self) -> int:
        return int(self.h.shape[1])

    @property
    def m(self) -> int:
        return int(self.h.shape[0])

    @property
    def k(self) -> int:
        return int(self.info_cols.shape[0])

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class DecodeResult:
    message: Bitstream
    converged: bool
    iterations: int


@dataclass(frozen=True)
class CodecResult:
    stream: Bitstream
    bits_per_pixel: float
    step_index: int


@dataclass(frozen=True)
class DecodedPatch:
    patch: ImagePatch
    failed: bool
    concealed_blocks: int = 0


class LdpcConfig(BaseModel):
    """The `[ldpc]` section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    block_length: int = Field(default=384, gt=0, multiple_of=12)
    seed: int = Field(default=2023, ge=0)
    rates: tuple[str, ...] = ("1/3", "7/12")
    # Optional alist file per rate; replaces the generated code of that rate.
    alist: dict[str, str] = Field(default_factory=dict)


class CodecConfig(BaseModel):
    """The `[codec]` section: nominal step index per LDPC rate."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Rate control may only coarsen these.
    quality: dict[str, int] = Field(default_factory=lambda: {"1/3": 20, "7/12": 16})

    @model_validator(mode="after")
    def _check(self) -> CodecConfig:
        bad = {r: q for r, q in self.quality.items() if not 0 <= q <= 63}
        if bad:
            raise ValueError(f"codec quality out of range 0..63: {bad}")
        return self

    def for_rate(self, rate: str) -> int:
        return self.quality.get(rate, 20)
