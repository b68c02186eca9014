from __future__ import annotations

import numpy as np
import pytest  # type: ignore[import-not-found]
import torch  # type: ignore[import-not-found]
from hypothesis import given, settings  # type: ignore[import-not-found]
from hypothesis import strategies as st  # type: ignore[import-not-found]

from sddsim.baseline_chain.schemas import Bitstream, ImagePatch
from sddsim.metrics.exceptions import MetricsException
from sddsim.metrics.schemas import MetricsConfig, MsSsimConfig
from sddsim.metrics.service import (
    ber,
    bler,
    ms_ssim,
    ms_ssim_batch,
    ms_ssim_db,
    psnr,
)
from sddsim.signal_core.rng import RngStream
from tests.factories import make_patch


def _noisy(p: ImagePatch, amplitude: float, seed: int = 0) -> ImagePatch:
    noise = RngStream(seed, 0).generator.uniform(-amplitude, amplitude, p.pixels.shape)
    return ImagePatch(np.clip(p.pixels + noise, 0.0, 1.0))


# ---- ms-ssim -----------------------------------------------------------------


@pytest.mark.parametrize("kind", range(4))
def test_identical_patches_score_one(kind: int) -> None:
    p = make_patch(kind)
    assert ms_ssim(p, p) == pytest.approx(1.0, abs=1e-12)


def test_symmetric() -> None:
    a, b = make_patch(1, 64), _noisy(make_patch(1, 64), 0.1)
    assert ms_ssim(a, b) == pytest.approx(ms_ssim(b, a), abs=1e-12)


def test_decreases_with_noise_amplitude() -> None:
    p = make_patch(1, 64)
    scores = [ms_ssim(p, _noisy(p, a)) for a in (0.05, 0.1, 0.2)]
    assert 0.2 < scores[1] < 0.99
    assert scores[0] > scores[1] > scores[2]


def test_batch_matches_single_and_is_differentiable() -> None:
    a, b = make_patch(1, 32), _noisy(make_patch(1, 32), 0.1)
    x = torch.from_numpy(np.array(a.pixels)).unsqueeze(0).requires_grad_(True)
    y = torch.from_numpy(np.array(b.pixels)).unsqueeze(0)
    out = ms_ssim_batch(x, y)
    out.sum().backward()
    assert float(out[0]) == pytest.approx(ms_ssim(a, b), abs=1e-12)
    assert x.grad is not None and torch.isfinite(x.grad).all()


def test_shape_mismatch() -> None:
    with pytest.raises(MetricsException):
        ms_ssim(make_patch(0, 16), make_patch(0, 24))


def test_too_small_for_one_scale() -> None:
    with pytest.raises(MetricsException):
        ms_ssim(make_patch(0, 8), make_patch(0, 8))


def test_scale_count_follows_size() -> None:
    assert MsSsimConfig.for_size(16, 16).scales == 1
    assert MsSsimConfig.for_size(64, 64).scales == 3
    assert MsSsimConfig.for_size(256, 256).scales == 5
    assert sum(MsSsimConfig.for_size(64, 64).weights) == pytest.approx(1.0)


def test_metrics_config_caps_scales() -> None:
    assert MetricsConfig(max_scales=2).ms_ssim_config(256, 256).scales == 2


# ---- ms-ssim in dB -----------------------------------------------------------


@pytest.mark.parametrize("v,expected", [(0.9, 10.0), (0.0, 0.0), (0.99, 20.0)])
def test_ms_ssim_db_examples(v: float, expected: float) -> None:
    out = ms_ssim_db(v)
    assert out.value == pytest.approx(expected, abs=1e-9)
    assert not out.flagged


def test_ms_ssim_db_saturates() -> None:
    assert ms_ssim_db(1.0).flagged
    assert ms_ssim_db(1.0).value == 60.0
    assert ms_ssim_db(1.0, cap=30.0).value == 30.0


def test_ms_ssim_db_out_of_range() -> None:
    with pytest.raises(MetricsException):
        ms_ssim_db(1.5)


# ---- psnr / ber --------------------------------------------------------------


def test_psnr_identical_is_capped() -> None:
    p = make_patch(2)
    out = psnr(p, p)
    assert out.flagged and out.value == 100.0


def test_psnr_value() -> None:
    a = ImagePatch.filled(16, 16, 0.5)
    b = ImagePatch.filled(16, 16, 0.6)
    assert psnr(a, b).value == pytest.approx(20.0)


def _bits(values) -> Bitstream:
    return Bitstream(np.asarray(values, dtype=np.uint8))


def test_ber_examples() -> None:
    tx = _bits(RngStream(9, 0).generator.integers(0, 2, 1000))
    assert ber(tx, tx) == 0.0
    assert ber(tx, _bits(1 - tx.bits)) == 1.0
    flipped = tx.bits.copy()
    flipped[17] ^= 1
    assert ber(tx, _bits(flipped)) == pytest.approx(0.001)


def test_ber_length_mismatch() -> None:
    with pytest.raises(MetricsException):
        ber(_bits([0, 1]), _bits([0]))


def test_bler_counts_rows_with_errors() -> None:
    tx = np.zeros((4, 8), dtype=np.uint8)
    rx = tx.copy()
    rx[1, 3] = 1
    assert bler(tx, rx) == 0.25


# ---- properties --------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=3),
    st.integers(min_value=0, max_value=10_000),
    st.floats(min_value=0.0, max_value=0.5),
)
def test_ms_ssim_is_symmetric_and_bounded(kind: int, seed: int, amp: float) -> None:
    a = make_patch(kind)
    b = _noisy(a, amp, seed)
    v = ms_ssim(a, b)
    assert v == pytest.approx(ms_ssim(b, a), abs=1e-12)
    assert v <= 1.0 + 1e-12
