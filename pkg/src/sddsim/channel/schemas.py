from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sddsim.channel.exceptions import ChannelDomainException

SPEED_OF_LIGHT = 299_792_458.0


class PathLossConfig(BaseModel):
    """Close-in free-space-reference path loss."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    carrier_hz: float = Field(default=2.9e9, gt=0)
    exponent_n: float = Field(default=2.0, gt=0)
    reference_m: float = Field(default=1.0, gt=0)


class RicianProfile(BaseModel):
    """
    Tap-delay profile of the self-interference channel.

    Tap 0 is Rician (LOS leak plus diffuse part); later taps are Rayleigh
    reflections with mean power `tap_powers_db` relative to tap 0.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_factor_db: float = 10.0
    tap_delays: tuple[int, ...] = (0, 1, 2)
    tap_powers_db: tuple[float, ...] = (0.0, -10.0, -20.0)
    los_phase_rad: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> RicianProfile:
        if not self.tap_delays or len(self.tap_delays) != len(self.tap_powers_db):
            raise ValueError(
                "tap_delays and tap_powers_db must be non-empty, same length"
            )
        if self.tap_delays[0] != 0:
            raise ValueError("first tap delay must be 0")
        if any(b <= a for a, b in zip(self.tap_delays, self.tap_delays[1:])):
            raise ValueError("tap_delays must be strictly increasing")
        if self.tap_powers_db[0] != 0.0:
            raise ValueError("tap_powers_db[0] must be 0 (normalization)")
        return self


class PaModel(BaseModel):
    """
    Memory-polynomial transmit amplifier on the SI path.

    `coefficients` holds (re, im) pairs in order-major layout: every delay
    of `orders[0]`, then every delay of `orders[1]`, ...
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    orders: tuple[int, ...] = (1, 3)
    memory: int = Field(default=2, ge=1)
    coefficients: tuple[tuple[float, float], ...] = (
        (1.0, 0.0),
        (0.08, -0.03),
        (-0.06, 0.02),
        (0.01, 0.005),
    )

    @model_validator(mode="after")
    def _check(self) -> PaModel:
        if any(p < 1 or p % 2 == 0 for p in self.orders):
            raise ValueError("PA orders must be odd and >= 1")
        if len(self.coefficients) != len(self.orders) * self.memory:
            raise ValueError("need len(orders) * memory coefficients")
        return self

    @property
    def coef(self) -> np.ndarray:
        return np.array([complex(re, im) for re, im in self.coefficients])


@dataclass(frozen=True)
class ChannelRealization:
    """Held FIR taps as (delay in symbols, complex gain)."""

    taps: tuple[tuple[int, complex], ...]

    def __post_init__(self) -> None:
        if not self.taps:
            raise ChannelDomainException("empty_realization")
        delays = [d for d, _ in self.taps]
        if any(b <= a for a, b in zip(delays, delays[1:])) or delays[0] < 0:
            raise ChannelDomainException("tap_delays_not_increasing", str(delays))
        if not all(np.isfinite(complex(g)) for _, g in self.taps):
            raise ChannelDomainException("non_finite_tap_gain")

    @classmethod
    def identity(cls) -> ChannelRealization:
        return cls(((0, 1.0 + 0.0j),))

    @property
    def max_delay(self) -> int:
        return self.taps[-1][0]

    @property
    def impulse_response(self) -> np.ndarray:
        h = np.zeros(self.max_delay + 1, dtype=np.complex128)
        for d, g in self.taps:
            h[d] = g
        return h

    @property
    def energy(self) -> float:
        return float(sum(abs(g) ** 2 for _, g in self.taps))


@dataclass(frozen=True)
class LinkBudget:
    """Linear powers in mW; `si_power` is the pre-digital SI after stages 1-2."""

    tx_power: float
    path_loss_db: float
    noise_power: float
    si_power: float = 0.0

    def __post_init__(self) -> None:
        if self.tx_power <= 0:
            raise ChannelDomainException("non_positive_tx_power", f"{self.tx_power}")
        if self.noise_power <= 0:
            raise ChannelDomainException(
                "non_positive_noise_power", f"{self.noise_power}"
            )
        if self.si_power < 0:
            raise ChannelDomainException("negative_si_power", f"{self.si_power}")

    @property
    def rx_power(self) -> float:
        return self.tx_power * 10.0 ** (-self.path_loss_db / 10.0)

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.rx_power / self.noise_power)


class ChannelConfig(BaseModel):
    """The `[channel]` section of an experiment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    path_loss: PathLossConfig = Field(default_factory=PathLossConfig)
    tx_power_dbm: float = 10.0
    noise_dbm: float = -90.0
    distance_min_m: float = Field(default=25.0, gt=0)
    distance_max_m: float = Field(default=50.0, gt=0)
    si_profile: RicianProfile = Field(default_factory=RicianProfile)
    # "off" (None) disables the amplifier model or the transmitter noise.
    pa: PaModel | None = Field(default_factory=PaModel)
    tx_evm_db: float | None = -40.0
    # Share one desired-link draw between both directions.
    reciprocal: bool = False
    # Flat fading of the desired links; "none" keeps them unit-gain.
    desired_fading: Literal["rayleigh", "none"] = "rayleigh"

    @field_validator("pa", "tx_evm_db", mode="before")
    @classmethod
    def _off(cls, v: object) -> object:
        return None if v == "off" else v

    @model_validator(mode="after")
    def _check(self) -> ChannelConfig:
        if self.distance_max_m < self.distance_min_m:
            raise ValueError("distance_max_m < distance_min_m")
        if self.distance_min_m < self.path_loss.reference_m:
            raise ValueError("distance_min_m below path-loss reference distance")
        return self
