"""
Wireless environment: path loss, held Rician multipath, AWGN, and the
self-interference path (amplifier distortion, transmitter noise, SI channel).

All operations are pure given their RngStream; realizations are drawn once
and held for a whole run.
"""

from __future__ import annotations

import math

import numpy as np

from sddsim.channel.exceptions import ChannelDomainException
from sddsim.channel.schemas import (
    SPEED_OF_LIGHT,
    ChannelRealization,
    LinkBudget,
    PaModel,
    PathLossConfig,
    RicianProfile,
)
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.schemas import ComplexSignal
from sddsim.signal_core.service import (
    from_db,
    gaussian,
    memory_polynomial_features,
    power,
)


def ci_path_loss_db(cfg: PathLossConfig, distance_m: float) -> float:
    if distance_m < cfg.reference_m:
        raise ChannelDomainException(
            "distance_below_reference", f"d={distance_m} d0={cfg.reference_m}"
        )
    wavelength = SPEED_OF_LIGHT / cfg.carrier_hz
    fspl = 20.0 * math.log10(4.0 * math.pi * cfg.reference_m / wavelength)
    return fspl + 10.0 * cfg.exponent_n * math.log10(distance_m / cfg.reference_m)


def link_budget(
    cfg: PathLossConfig,
    distance_m: float,
    tx_power_dbm: float,
    noise_dbm: float,
    si_power: float = 0.0,
) -> LinkBudget:
    return LinkBudget(
        tx_power=from_db(tx_power_dbm),
        path_loss_db=ci_path_loss_db(cfg, distance_m),
        noise_power=from_db(noise_dbm),
        si_power=si_power,
    )


def draw_rician(profile: RicianProfile, r: RngStream) -> ChannelRealization:
    k = from_db(profile.k_factor_db)
    g = gaussian(r, len(profile.tap_delays))
    phase = profile.los_phase_rad
    los = math.sqrt(k / (k + 1.0)) * complex(math.cos(phase), math.sin(phase))
    # diffuse part below double resolution of the LOS term
    diffuse = 0.0 if k + 1.0 == k else math.sqrt(1.0 / (k + 1.0)) * g[0]
    gains = [los + diffuse]
    gains += [
        math.sqrt(from_db(p)) * gi for p, gi in zip(profile.tap_powers_db[1:], g[1:])
    ]
    return ChannelRealization(
        tuple(zip(profile.tap_delays, (complex(x) for x in gains)))
    )


def draw_rayleigh(r: RngStream) -> ChannelRealization:
    """Frequency-flat unit-mean-power tap for the desired link."""
    return ChannelRealization(((0, complex(gaussian(r, 1)[0])),))


def apply_channel(s: ComplexSignal, h: ChannelRealization) -> ComplexSignal:
    """Linear convolution; output length len(s) + max delay."""
    n = len(s)
    out = np.zeros(n + h.max_delay, dtype=np.complex128)
    for d, g in h.taps:
        out[d : d + n] += g * s.samples
    return ComplexSignal(out)


def add_awgn(s: ComplexSignal, noise_power: float, r: RngStream) -> ComplexSignal:
    if noise_power < 0:
        raise ChannelDomainException("negative_noise_power", f"{noise_power}")
    if noise_power == 0:
        return s
    return ComplexSignal(s.samples + gaussian(r, len(s), noise_power))


def calibrate_si_power(
    target_sinr_db: float, p_desired: float, p_noise: float
) -> float:
    """SI power I with p_desired / (I + p_noise) = 10^(target/10)."""
    if p_desired <= 0:
        raise ChannelDomainException("non_positive_desired_power", f"{p_desired}")
    if p_noise < 0:
        raise ChannelDomainException("negative_noise_power", f"{p_noise}")
    si = p_desired / from_db(target_sinr_db) - p_noise
    if si < -1e-12 * max(p_noise, p_desired):
        snr_db = 10 * math.log10(p_desired / p_noise) if p_noise else math.inf
        raise ChannelDomainException(
            "sinr_target_unreachable",
            f"target={target_sinr_db} dB exceeds SNR={snr_db:.2f} dB",
        )
    return max(si, 0.0)


def apply_pa(x: np.ndarray, pa: PaModel) -> np.ndarray:
    """PA output for a 1-D symbol sequence."""
    return memory_polynomial_features(x, pa.orders, pa.memory) @ pa.coef


def apply_pa_batch(x: np.ndarray, pa: PaModel) -> np.ndarray:
    """PA output row-wise for (N, k) symbol blocks; history before a block is zero."""
    out = np.zeros_like(x)
    coef = pa.coef.reshape(len(pa.orders), pa.memory)
    for i, p in enumerate(pa.orders):
        shaped = x * np.abs(x) ** (p - 1)
        for m in range(pa.memory):
            out[:, m:] += coef[i, m] * shaped[:, : x.shape[1] - m]
    return out


def apply_channel_batch(x: np.ndarray, h: ChannelRealization) -> np.ndarray:
    """Row-wise convolution truncated to the block length."""
    out = np.zeros_like(x)
    for d, g in h.taps:
        if d < x.shape[1]:
            out[:, d:] += g * x[:, : x.shape[1] - d]
    return out


def si_waveform(
    x: ComplexSignal,
    h: ChannelRealization,
    pa: PaModel | None,
    tx_evm_db: float | None,
    r: RngStream,
) -> ComplexSignal:
    """
    Unscaled self-interference: x -> PA -> + transmitter noise -> SI channel.

    Transmitter noise is white with power EVM * power(PA output) and is
    invisible to a canceller that only knows `x`.
    """
    y = apply_pa(x.samples, pa) if pa is not None else np.array(x.samples)
    if tx_evm_db is not None and len(y):
        y = y + gaussian(r, len(y), power(ComplexSignal(y)) * from_db(tx_evm_db))
    return apply_channel(ComplexSignal(y), h)
