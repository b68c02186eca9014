from __future__ import annotations

import math

import numpy as np
import pytest  # type: ignore[import-not-found]

from sddsim.baseline_chain.codec import decode_from_budget, encode_to_budget
from sddsim.baseline_chain.exceptions import ModulationException
from sddsim.baseline_chain.ldpc import build_qc_code, decode_batch, ldpc_encode
from sddsim.baseline_chain.modulation import (
    hard_decisions,
    qpsk_llr,
    qpsk_modulate,
    uncoded_ber_theory,
)
from sddsim.baseline_chain.schemas import Bitstream
from sddsim.metrics.service import ber
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.schemas import ComplexSignal
from sddsim.signal_core.service import gaussian, power, random_bits
from tests.factories import make_patch

_H = 1 / math.sqrt(2)


def test_gray_mapping() -> None:
    s = qpsk_modulate(Bitstream(np.array([0, 0, 0, 1, 1, 0, 1, 1], dtype=np.uint8)))
    np.testing.assert_allclose(
        s.samples, [_H + 1j * _H, _H - 1j * _H, -_H + 1j * _H, -_H - 1j * _H]
    )


def test_constant_modulus() -> None:
    s = qpsk_modulate(Bitstream(random_bits(RngStream(2, 0), 1000)))
    assert power(s) == pytest.approx(1.0, abs=1e-12)


def test_odd_bit_count_rejected() -> None:
    with pytest.raises(ModulationException):
        qpsk_modulate(Bitstream(np.zeros(3, dtype=np.uint8)))


def test_llr_examples() -> None:
    llr = qpsk_llr(ComplexSignal(np.array([_H + 1j * _H, 0.0])), 1.0)
    np.testing.assert_allclose(llr.values, [2.0, 2.0, 0.0, 0.0])


def test_llr_rejects_non_positive_noise() -> None:
    with pytest.raises(ModulationException):
        qpsk_llr(ComplexSignal(np.ones(2)), 0.0)


def test_noiseless_hard_decisions_recover_bits() -> None:
    bits = Bitstream(random_bits(RngStream(3, 0), 200))
    out = hard_decisions(qpsk_llr(qpsk_modulate(bits), 0.1))
    np.testing.assert_array_equal(out.bits, bits.bits)


def test_theory_at_zero_db() -> None:
    assert uncoded_ber_theory(0.0) == pytest.approx(0.0786, abs=1e-4)


def test_noiseless_chain_reproduces_codec_stream() -> None:
    p = make_patch(1)
    code = build_qc_code("1/3", 384)
    enc = encode_to_budget(p, 20, code.k)
    y = qpsk_modulate(ldpc_encode(enc.stream, code))
    cw, converged, _ = decode_batch(qpsk_llr(y, 0.01).values, code, 50)
    assert converged[0]
    np.testing.assert_array_equal(cw[0, code.info_cols], enc.stream.bits)
    out = decode_from_budget(Bitstream(cw[0, code.info_cols]), 20, p.width, p.height)
    assert not out.failed


@pytest.mark.slow
@pytest.mark.parametrize("ebn0_db", [0.0, 4.0])
def test_uncoded_ber_matches_theory(ebn0_db: float) -> None:
    n_bits = 1_000_000
    bits = Bitstream(random_bits(RngStream(5, 0), n_bits))
    noise_var = 1.0 / (2.0 * 10.0 ** (ebn0_db / 10.0))
    x = qpsk_modulate(bits)
    y = ComplexSignal(x.samples + gaussian(RngStream(5, 1), len(x), noise_var))
    measured = ber(bits, hard_decisions(qpsk_llr(y, noise_var)))
    assert measured == pytest.approx(uncoded_ber_theory(ebn0_db), rel=0.05)
