from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from sddsim.metrics.exceptions import MetricsException

# Standard per-scale exponents, finest scale first.
MS_SSIM_WEIGHTS_RAW = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MS_SSIM_WEIGHTS = tuple(w / sum(MS_SSIM_WEIGHTS_RAW) for w in MS_SSIM_WEIGHTS_RAW)

MS_SSIM_DB_CAP = 60.0
PSNR_CAP_DB = 100.0


def _leading_weights(scales: int) -> tuple[float, ...]:
    head = MS_SSIM_WEIGHTS_RAW[:scales]
    return tuple(w / sum(head) for w in head)


class MsSsimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scales: int = Field(default=5, ge=1, le=len(MS_SSIM_WEIGHTS_RAW))
    weights: tuple[float, ...] = MS_SSIM_WEIGHTS
    window_size: int = 11
    sigma: float = Field(default=1.5, gt=0)
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _check(self) -> MsSsimConfig:
        if len(self.weights) != self.scales:
            raise ValueError(f"expected {self.scales} weights, got {len(self.weights)}")
        if not math.isclose(sum(self.weights), 1.0, abs_tol=1e-9):
            raise ValueError("weights must sum to 1")
        if self.window_size % 2 != 1:
            raise ValueError("window_size must be odd")
        return self

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def min_side(self) -> int:
        return 2 ** (self.scales - 1) * self.window_size

    @classmethod
    def for_size(cls, height: int, width: int, max_scales: int = 5) -> MsSsimConfig:
        """Largest scale count the image supports, leading weights renormalized."""
        side = min(height, width)
        for scales in range(max_scales, 0, -1):
            if side >= 2 ** (scales - 1) * 11:
                return cls(scales=scales, weights=_leading_weights(scales))
        raise MetricsException("image_too_small_for_ms_ssim", f"{height}x{width}")


class MetricsConfig(BaseModel):
    """The `[metrics]` section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_scales: int = Field(default=5, ge=1, le=len(MS_SSIM_WEIGHTS_RAW))
    ms_ssim_db_cap: float = Field(default=MS_SSIM_DB_CAP, gt=0)
    psnr_cap_db: float = Field(default=PSNR_CAP_DB, gt=0)

    def ms_ssim_config(self, height: int, width: int) -> MsSsimConfig:
        return MsSsimConfig.for_size(height, width, self.max_scales)
