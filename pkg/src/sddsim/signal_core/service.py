"""
Power / SINR arithmetic and random draws shared by every module.

Power is the MEAN of squared magnitudes, so SINR targets do not depend on
signal length.
"""

from __future__ import annotations

import math

import numpy as np

from sddsim.signal_core.exceptions import SignalDomainException
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.schemas import ComplexSignal


def power(s: ComplexSignal) -> float:
    if len(s) == 0:
        return 0.0
    return float(np.mean(np.abs(s.samples) ** 2))


def db(x: float) -> float:
    return 10.0 * math.log10(x)


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def sinr_db(p_signal: float, p_interference: float, p_noise: float) -> float:
    if p_signal <= 0:
        raise SignalDomainException("non_positive_signal_power", f"p_signal={p_signal}")
    if p_noise <= 0:
        raise SignalDomainException("non_positive_noise_power", f"p_noise={p_noise}")
    if p_interference < 0:
        raise SignalDomainException(
            "negative_interference_power", f"p_interference={p_interference}"
        )
    return db(p_signal / (p_interference + p_noise))


def scale_to_power(s: ComplexSignal, target: float) -> ComplexSignal:
    if target < 0:
        raise SignalDomainException("negative_target_power", f"target={target}")
    p = power(s)
    if p <= 0:
        raise SignalDomainException("zero_power_signal")
    return s.scaled(math.sqrt(target / p))


def rng_gaussian_pair(r: RngStream) -> complex:
    """One unit-variance circularly-symmetric complex Gaussian draw."""
    re, im = r.generator.standard_normal(2)
    return complex(re, im) / math.sqrt(2.0)


def gaussian(r: RngStream, n: int, variance: float = 1.0) -> np.ndarray:
    """`n` i.i.d. CN(0, variance) samples (variance/2 per real component)."""
    pairs = r.generator.standard_normal((n, 2))
    return (pairs[:, 0] + 1j * pairs[:, 1]) * math.sqrt(variance / 2.0)


def uniform(r: RngStream, low: float, high: float) -> float:
    return float(r.generator.uniform(low, high))


def random_bits(r: RngStream, n: int) -> np.ndarray:
    return r.generator.integers(0, 2, size=n, dtype=np.uint8)


def random_qpsk(r: RngStream, n: int) -> ComplexSignal:
    """Unit-power QPSK symbols, used as calibration bursts."""
    b = r.generator.integers(0, 2, size=(n, 2))
    return ComplexSignal(((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / math.sqrt(2.0))


def delayed(x: np.ndarray, m: int) -> np.ndarray:
    """x[k - m] with zeros before the start."""
    if m == 0:
        return x
    out = np.zeros_like(x)
    out[m:] = x[:-m] if m < len(x) else 0
    return out


def memory_polynomial_features(
    x: np.ndarray, orders: tuple[int, ...], memory: int
) -> np.ndarray:
    """
    Basis columns x[k-m] * |x[k-m]|^(p-1) for p in `orders`, m in 0..memory-1.

    Column order is order-major: all delays of order 1, then order 3, ...
    """
    cols = []
    for p in orders:
        for m in range(memory):
            xm = delayed(x, m)
            cols.append(xm * np.abs(xm) ** (p - 1))
    return np.stack(cols, axis=1) if cols else np.zeros((len(x), 0), np.complex128)
