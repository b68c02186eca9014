"""Gray-mapped QPSK and its exact AWGN LLRs."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc  # type: ignore[import-not-found]

from sddsim.baseline_chain.exceptions import ModulationException
from sddsim.baseline_chain.schemas import Bitstream, LlrVector
from sddsim.signal_core.schemas import ComplexSignal

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def qpsk_modulate(b: Bitstream) -> ComplexSignal:
    """(b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)."""
    if len(b) % 2:
        raise ModulationException("odd_bit_count", f"len={len(b)}")
    pairs = b.bits.reshape(-1, 2).astype(np.float64)
    symbols = (1 - 2 * pairs[:, 0]) + 1j * (1 - 2 * pairs[:, 1])
    return ComplexSignal(symbols * _INV_SQRT2)


def qpsk_llr(y: ComplexSignal, noise_var: float) -> LlrVector:
    """
    LLR(b0) = 2*sqrt(2)*Re(y)/N0 and LLR(b1) = 2*sqrt(2)*Im(y)/N0, where
    `noise_var` = N0 is the total complex noise variance E|n|^2.
    """
    if noise_var <= 0:
        raise ModulationException("non_positive_noise_var", f"noise_var={noise_var}")
    scale = 2.0 * math.sqrt(2.0) / noise_var
    llr = np.empty(2 * len(y), dtype=np.float64)
    llr[0::2] = scale * y.samples.real
    llr[1::2] = scale * y.samples.imag
    return LlrVector(llr)


def hard_decisions(llrs: LlrVector) -> Bitstream:
    return Bitstream((llrs.values < 0).astype(np.uint8))


def q_function(x: float | np.ndarray) -> float | np.ndarray:
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def uncoded_ber_theory(ebn0_db: float) -> float:
    """Gray QPSK in AWGN: Q(sqrt(2 Eb/N0))."""
    return float(q_function(math.sqrt(2.0 * 10.0 ** (ebn0_db / 10.0))))
