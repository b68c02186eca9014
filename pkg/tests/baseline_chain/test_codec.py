from __future__ import annotations

import numpy as np
import pytest  # type: ignore[import-not-found]

from sddsim.baseline_chain.codec import (
    CONCEAL_VALUE,
    CRC_BITS,
    HEADER_BITS,
    codec_decode,
    codec_encode,
    crc_bits,
    decode_from_budget,
    encode_to_budget,
    step_size,
)
from sddsim.baseline_chain.exceptions import CodecException
from sddsim.baseline_chain.schemas import Bitstream, CodecConfig, ImagePatch
from sddsim.metrics.service import ms_ssim
from tests.factories import make_patch


def _decode(stream: Bitstream, quality: int, p: ImagePatch):
    return codec_decode(stream, quality, p.width, p.height)


# ---- encode ------------------------------------------------------------------


@pytest.mark.parametrize("quality", [0, 20, 63])
def test_constant_patch_is_dc_only(quality: int) -> None:
    p = ImagePatch.filled(16, 16, 0.5)
    res = codec_encode(p, quality)
    assert res.bits_per_pixel < 0.2
    # header, then se(0) + ue(0) per block
    assert len(res.stream) == HEADER_BITS + 2 * 4


def test_rejects_dimensions_not_multiple_of_8() -> None:
    with pytest.raises(CodecException):
        codec_encode(ImagePatch(np.zeros((12, 16))), 10)


def test_step_index_out_of_range() -> None:
    with pytest.raises(CodecException):
        step_size(64)


def test_coarser_step_costs_fewer_bits() -> None:
    p = make_patch(1)
    assert len(codec_encode(p, 32).stream) < len(codec_encode(p, 8).stream)


def test_encode_to_budget_pads_to_budget() -> None:
    p = make_patch(1)
    res = encode_to_budget(p, 0, 256)
    assert len(res.stream) == 256
    assert res.step_index >= 0
    assert len(codec_encode(p, res.step_index).stream) <= 256 - CRC_BITS


def test_encode_to_budget_too_small() -> None:
    with pytest.raises(CodecException):
        encode_to_budget(make_patch(1), 0, HEADER_BITS)


# ---- decode ------------------------------------------------------------------


def test_finest_step_round_trip_error_bound() -> None:
    p = make_patch(3)
    out = _decode(codec_encode(p, 0).stream, 0, p)
    assert not out.failed
    rms = np.sqrt(np.mean((out.patch.pixels - p.pixels) ** 2))
    assert rms <= step_size(0) / 2


def test_moderate_rate_round_trip_quality() -> None:
    for k in range(4):
        p = make_patch(k)
        res = codec_encode(p, 12)
        out = _decode(res.stream, 12, p)
        assert ms_ssim(p, out.patch) >= 0.95


def test_padding_after_stream_is_ignored() -> None:
    p = make_patch(2)
    res = codec_encode(p, 16)
    plain = _decode(res.stream, 16, p)
    padded = _decode(res.stream.padded(len(res.stream) + 40), 16, p)
    np.testing.assert_array_equal(plain.patch.pixels, padded.patch.pixels)


def test_corrupted_header_flags_failure() -> None:
    p = make_patch(0)
    bits = codec_encode(p, 16).stream.bits.copy()
    bits[3] ^= 1
    out = _decode(Bitstream(bits), 16, p)
    assert out.failed
    assert np.all(out.patch.pixels == CONCEAL_VALUE)


def test_header_step_below_nominal_is_failure() -> None:
    p = make_patch(0)
    out = _decode(codec_encode(p, 10).stream, 16, p)
    assert out.failed


def test_zero_length_stream_fails() -> None:
    p = make_patch(0)
    out = _decode(Bitstream(np.zeros(0, dtype=np.uint8)), 16, p)
    assert out.failed


def test_truncated_stream_conceals_tail_blocks() -> None:
    p = make_patch(1)
    stream = codec_encode(p, 4).stream
    cut = Bitstream(stream.bits[: HEADER_BITS + (len(stream) - HEADER_BITS) // 2])
    out = _decode(cut, 4, p)
    assert not out.failed
    assert 0 < out.concealed_blocks <= 4


# ---- framed streams ----------------------------------------------------------


def test_crc_matches_ccitt_check_value() -> None:
    bits = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    value = int("".join(str(b) for b in crc_bits(bits)), 2)
    assert value == 0x29B1


def test_budget_frame_decodes() -> None:
    p = make_patch(2)
    res = encode_to_budget(p, 16, 224)
    out = decode_from_budget(res.stream, 16, p.width, p.height)
    plain = _decode(codec_encode(p, res.step_index).stream, 16, p)
    assert not out.failed
    np.testing.assert_array_equal(out.patch.pixels, plain.patch.pixels)


@pytest.mark.parametrize("pos", [0, HEADER_BITS + 3, 200, 223])
def test_any_flipped_frame_bit_fails_the_patch(pos: int) -> None:
    p = make_patch(2)
    bits = encode_to_budget(p, 16, 224).stream.bits.copy()
    bits[pos] ^= 1
    out = decode_from_budget(Bitstream(bits), 16, p.width, p.height)
    assert out.failed
    assert np.all(out.patch.pixels == CONCEAL_VALUE)


def test_valid_looking_stream_without_matching_crc_fails() -> None:
    # a parseable stream whose trailer is wrong, as after a wrong codeword
    p = make_patch(1)
    res = encode_to_budget(p, 30, 128)
    body = res.stream.bits[:-CRC_BITS]
    frame = np.concatenate([body, res.stream.bits[-CRC_BITS:] ^ 1])
    assert not codec_decode(Bitstream(body), 30, p.width, p.height).failed
    assert decode_from_budget(Bitstream(frame), 30, p.width, p.height).failed


# ---- config ------------------------------------------------------------------


def test_codec_config_quality_lookup() -> None:
    cfg = CodecConfig()
    assert cfg.for_rate("1/3") == 20
    assert cfg.for_rate("7/12") == 16


def test_codec_config_rejects_out_of_range_quality() -> None:
    with pytest.raises(ValueError):
        CodecConfig(quality={"1/3": 64})
