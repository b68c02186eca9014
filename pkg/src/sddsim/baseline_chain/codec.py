"""
Block-DCT image codec standing in for BPG at matched bits-per-pixel.

Stream framing (big-endian bit order):

    width:16 | height:16 | step_index:6 | blocks...

Each 8x8 block (raster order) is level-shifted by -0.5, transformed with an
orthonormal 2-D DCT-II, uniformly quantized with `step(step_index)` and
written as:

    se(dc - previous_dc)  then, for every non-zero AC in zigzag order,
    ue(run + 1) nz(level)  and finally  ue(0)  (end of block)

`ue`/`se` are order-0 Exp-Golomb codes; `nz` maps a non-zero level to
ue(2|l| - 2) for l > 0 and ue(2|l| - 1) for l < 0.

Decoding never aborts. A block that cannot be parsed, and every block after
it (the DC predictor and bit alignment are lost), is concealed as mid-gray.
A header that does not match the expected geometry or quality flags the
whole patch as failed.

Over a link the stream travels in a fixed-size frame (`encode_to_budget`):
the codec stream zero-padded to `budget - CRC_BITS`, then the CRC-16
(CCITT, init 0xFFFF) of those bits. `decode_from_budget` fails the whole
patch when the CRC does not match, so a channel decoder that settles on a
wrong codeword never yields a reconstruction.
"""

from __future__ import annotations

import binascii
from functools import lru_cache

import numpy as np
from scipy.fft import dctn, idctn  # type: ignore[import-not-found]

from sddsim.baseline_chain.exceptions import CodecException
from sddsim.baseline_chain.schemas import (
    Bitstream,
    CodecResult,
    DecodedPatch,
    ImagePatch,
)

BLOCK = 8
HEADER_BITS = 16 + 16 + 6
CRC_BITS = 16
MAX_STEP_INDEX = 63
STEP_BASE = 1.0 / 256.0
CONCEAL_VALUE = 0.5
# Longest Exp-Golomb prefix accepted by the parser.
_MAX_PREFIX = 24


def step_size(step_index: int) -> float:
    """Quantizer step; doubles every 4 indices."""
    if not 0 <= step_index <= MAX_STEP_INDEX:
        raise CodecException("step_index_out_of_range", f"step_index={step_index}")
    return STEP_BASE * 2.0 ** (step_index / 4.0)


@lru_cache
def zigzag_order() -> tuple[tuple[int, int], ...]:
    coords = [(r, c) for r in range(BLOCK) for c in range(BLOCK)]
    return tuple(
        sorted(
            coords,
            key=lambda rc: (
                rc[0] + rc[1],
                rc[0] if (rc[0] + rc[1]) % 2 else rc[1],
            ),
        )
    )


# ---- bit I/O -----------------------------------------------------------------


class _BitWriter:
    def __init__(self) -> None:
        self.bits: list[int] = []

    def uint(self, value: int, width: int) -> None:
        self.bits.extend((value >> (width - 1 - i)) & 1 for i in range(width))

    def ue(self, value: int) -> None:
        v = value + 1
        n = v.bit_length()
        self.bits.extend([0] * (n - 1))
        self.uint(v, n)

    def se(self, value: int) -> None:
        self.ue(2 * value - 1 if value > 0 else -2 * value)

    def nz(self, level: int) -> None:
        self.ue(2 * level - 2 if level > 0 else -2 * level - 1)


class _StreamError(Exception):
    pass


class _BitReader:
    def __init__(self, bits: np.ndarray) -> None:
        self.bits = bits
        self.pos = 0

    def uint(self, width: int) -> int:
        if self.pos + width > len(self.bits):
            raise _StreamError("out_of_bits")
        v = 0
        for b in self.bits[self.pos : self.pos + width]:
            v = (v << 1) | int(b)
        self.pos += width
        return v

    def ue(self) -> int:
        zeros = 0
        while True:
            if self.pos >= len(self.bits):
                raise _StreamError("out_of_bits")
            if self.bits[self.pos]:
                break
            zeros += 1
            self.pos += 1
            if zeros > _MAX_PREFIX:
                raise _StreamError("prefix_too_long")
        return self.uint(zeros + 1) - 1

    def se(self) -> int:
        u = self.ue()
        return (u + 1) // 2 if u % 2 else -(u // 2)

    def nz(self) -> int:
        u = self.ue()
        return -(u + 1) // 2 if u % 2 else u // 2 + 1


# ---- transform + quantizer ---------------------------------------------------


def _blocks(pixels: np.ndarray) -> np.ndarray:
    h, w = pixels.shape
    return (
        pixels.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK)
        .swapaxes(1, 2)
        .reshape(-1, BLOCK, BLOCK)
    )


def _unblocks(blocks: np.ndarray, height: int, width: int) -> np.ndarray:
    return (
        blocks.reshape(height // BLOCK, width // BLOCK, BLOCK, BLOCK)
        .swapaxes(1, 2)
        .reshape(height, width)
    )


def forward_transform(p: ImagePatch) -> np.ndarray:
    """DCT coefficients per block, shape (n_blocks, 8, 8)."""
    _check_geometry(p.width, p.height)
    return dctn(_blocks(p.pixels - 0.5), type=2, axes=(1, 2), norm="ortho")


def quantize(coefs: np.ndarray, step_index: int) -> np.ndarray:
    return np.rint(coefs / step_size(step_index)).astype(np.int64)


def dequantize(levels: np.ndarray, step_index: int) -> np.ndarray:
    return levels.astype(np.float64) * step_size(step_index)


def _check_geometry(width: int, height: int) -> None:
    if width <= 0 or height <= 0 or width % BLOCK or height % BLOCK:
        raise CodecException(
            "dimensions_not_multiple_of_8", f"width={width} height={height}"
        )
    if width >= 1 << 16 or height >= 1 << 16:
        raise CodecException("dimensions_too_large", f"width={width} height={height}")


def crc_bits(bits: np.ndarray) -> np.ndarray:
    """CRC-16/CCITT of a bit vector (packed MSB first), as 16 bits."""
    packed = np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()
    crc = binascii.crc_hqx(packed, 0xFFFF)
    return np.array([(crc >> (15 - i)) & 1 for i in range(CRC_BITS)], np.uint8)


# ---- encode ------------------------------------------------------------------


def codec_encode(p: ImagePatch, quality: int) -> CodecResult:
    levels = quantize(forward_transform(p), quality)
    w = _BitWriter()
    w.uint(p.width, 16)
    w.uint(p.height, 16)
    w.uint(quality, 6)
    order = zigzag_order()
    prev_dc = 0
    for blk in levels:
        dc = int(blk[0, 0])
        w.se(dc - prev_dc)
        prev_dc = dc
        run = 0
        for r, c in order[1:]:
            level = int(blk[r, c])
            if level == 0:
                run += 1
                continue
            w.ue(run + 1)
            w.nz(level)
            run = 0
        w.ue(0)
    stream = Bitstream(np.asarray(w.bits, dtype=np.uint8))
    return CodecResult(
        stream=stream,
        bits_per_pixel=len(stream) / (p.width * p.height),
        step_index=quality,
    )


def encode_to_budget(p: ImagePatch, quality: int, budget_bits: int) -> CodecResult:
    """
    Encode at `quality`, coarsening the step until the stream fits the budget.

    The returned frame is exactly `budget_bits` long: the stream, zero
    padding, and a CRC-16 trailer over everything before it.
    """
    room = budget_bits - CRC_BITS
    for q in range(quality, MAX_STEP_INDEX + 1):
        res = codec_encode(p, q)
        if len(res.stream) <= room:
            body = res.stream.padded(room).bits
            frame = np.concatenate([body, crc_bits(body)])
            return CodecResult(
                stream=Bitstream(frame),
                bits_per_pixel=budget_bits / (p.width * p.height),
                step_index=q,
            )
    raise CodecException(
        "bit_budget_too_small",
        f"budget_bits={budget_bits} width={p.width} height={p.height}",
    )


# ---- decode ------------------------------------------------------------------


def codec_decode(b: Bitstream, quality: int, width: int, height: int) -> DecodedPatch:
    """
    Total decoder. `quality` is the nominal step index: rate control only ever
    raises it, so a header index below it is treated as a corrupted header.
    """
    _check_geometry(width, height)
    n_blocks = (width // BLOCK) * (height // BLOCK)
    failed = DecodedPatch(
        patch=ImagePatch.filled(height, width, CONCEAL_VALUE),
        failed=True,
        concealed_blocks=n_blocks,
    )
    r = _BitReader(b.bits)
    try:
        hdr_w, hdr_h, step_index = r.uint(16), r.uint(16), r.uint(6)
    except _StreamError:
        return failed
    if (hdr_w, hdr_h) != (width, height) or step_index < quality:
        return failed

    order = zigzag_order()
    levels = np.zeros((n_blocks, BLOCK, BLOCK), dtype=np.int64)
    concealed = np.zeros(n_blocks, dtype=bool)
    prev_dc = 0
    for i in range(n_blocks):
        try:
            blk = np.zeros((BLOCK, BLOCK), dtype=np.int64)
            dc = prev_dc + r.se()
            blk[0, 0] = dc
            pos = 0
            while True:
                run_plus = r.ue()
                if run_plus == 0:
                    break
                pos += run_plus
                if pos > BLOCK * BLOCK - 1:
                    raise _StreamError("run_past_block_end")
                rr, cc = order[pos]
                blk[rr, cc] = r.nz()
            levels[i] = blk
            prev_dc = dc
        except _StreamError:
            concealed[i:] = True
            break

    pixels = idctn(dequantize(levels, step_index), type=2, axes=(1, 2), norm="ortho")
    pixels = pixels + 0.5
    pixels[concealed] = CONCEAL_VALUE
    return DecodedPatch(
        patch=ImagePatch(np.clip(_unblocks(pixels, height, width), 0.0, 1.0)),
        failed=False,
        concealed_blocks=int(concealed.sum()),
    )


def decode_from_budget(
    frame: Bitstream, quality: int, width: int, height: int
) -> DecodedPatch:
    """Decode a frame from `encode_to_budget`; a CRC mismatch fails the patch."""
    bits = frame.bits
    if len(bits) <= CRC_BITS or not np.array_equal(
        crc_bits(bits[:-CRC_BITS]), bits[-CRC_BITS:]
    ):
        _check_geometry(width, height)
        return DecodedPatch(
            patch=ImagePatch.filled(height, width, CONCEAL_VALUE),
            failed=True,
            concealed_blocks=(width // BLOCK) * (height // BLOCK),
        )
    return codec_decode(Bitstream(bits[:-CRC_BITS]), quality, width, height)
