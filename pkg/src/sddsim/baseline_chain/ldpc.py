"""
Quasi-cyclic LDPC codes, systematic encoding and normalized min-sum decoding.

The in-repo codes are lifted from a 12-column protograph: every base column
touches `col_weight` consecutive base rows (cyclically), and each non-empty
base entry becomes a Z x Z circulant permutation whose shift is drawn from a
seeded Philox stream, redrawing shifts that would close a length-4 cycle.
Rate presets:

    "1/3"  -> 8 x 12 base graph
    "7/12" -> 5 x 12 base graph

so the block length is always 12 * Z. Exact 5G NR matrices can be dropped in
through `repository.read_alist`.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp  # type: ignore[import-not-found]

from sddsim.baseline_chain.exceptions import LdpcException
from sddsim.baseline_chain.schemas import (
    Bitstream,
    DecodeResult,
    LdpcCode,
    LlrVector,
)
from sddsim.commons.logging import logger
from sddsim.signal_core.rng import RngStream

BASE_COLUMNS = 12
RATE_PRESETS: dict[str, int] = {"1/3": 8, "7/12": 5}
MIN_SUM_SCALE = 0.75
DEFAULT_MAX_ITER = 50
# Philox stream id reserved for protograph shifts.
_SHIFT_STREAM = 0x1D9C


# ---- construction ------------------------------------------------------------


def _base_mask(m_b: int, n_b: int, col_weight: int) -> np.ndarray:
    if col_weight > m_b:
        raise LdpcException("column_weight_exceeds_rows", f"w={col_weight} m_b={m_b}")
    mask = np.zeros((m_b, n_b), dtype=bool)
    for j in range(n_b):
        for t in range(col_weight):
            mask[(j + t) % m_b, j] = True
    return mask


def _closes_four_cycle(shifts: np.ndarray, i: int, j: int, s: int, z: int) -> bool:
    m_b, n_b = shifts.shape
    for i2 in range(m_b):
        if i2 == i or shifts[i2, j] < 0:
            continue
        for j2 in range(n_b):
            if j2 == j or shifts[i, j2] < 0 or shifts[i2, j2] < 0:
                continue
            if (s - shifts[i, j2] + shifts[i2, j2] - shifts[i2, j]) % z == 0:
                return True
    return False


def qc_shifts(m_b: int, n_b: int, z: int, col_weight: int, seed: int) -> np.ndarray:
    """Base matrix of circulant shifts; -1 marks an all-zero block."""
    mask = _base_mask(m_b, n_b, col_weight)
    gen = RngStream(seed, _SHIFT_STREAM).generator
    shifts = np.full((m_b, n_b), -1, dtype=np.int64)
    cycles = 0
    for j in range(n_b):
        for i in range(m_b):
            if not mask[i, j]:
                continue
            candidates = gen.permutation(z)
            pick = next(
                (
                    int(s)
                    for s in candidates
                    if not _closes_four_cycle(shifts, i, j, int(s), z)
                ),
                None,
            )
            if pick is None:
                pick = int(candidates[0])
                cycles += 1
            shifts[i, j] = pick
    if cycles:
        logger.warning("ldpc_four_cycles_unavoidable: count=%d z=%d", cycles, z)
    return shifts


def lift(shifts: np.ndarray, z: int) -> sp.csr_matrix:
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    r = np.arange(z)
    for i, j in zip(*np.nonzero(shifts >= 0), strict=True):
        rows.append(i * z + r)
        cols.append(j * z + (r + shifts[i, j]) % z)
    m, n = shifts.shape[0] * z, shifts.shape[1] * z
    data = np.ones(sum(len(x) for x in rows), dtype=np.uint8)
    return sp.csr_matrix(
        (data, (np.concatenate(rows), np.concatenate(cols))), shape=(m, n)
    )


def _gf2_rref_pivots(h: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """
    Row-reduce H over GF(2), pivoting from the LAST column backwards so the
    parity positions land at the end of the codeword.

    Returns (reduced rows restricted to rank, pivot column per row).
    """
    m, n = h.shape
    dense = h.toarray().astype(np.uint8) % 2
    packed = np.packbits(dense, axis=1)
    pivots: list[int] = []
    row = 0
    for col in range(n - 1, -1, -1):
        if row >= m:
            break
        byte, bit = divmod(col, 8)
        mask = np.uint8(0x80 >> bit)
        has = (packed[row:, byte] & mask) != 0
        if not has.any():
            continue
        p = row + int(np.argmax(has))
        if p != row:
            packed[[row, p]] = packed[[p, row]]
        others = (packed[:, byte] & mask) != 0
        others[row] = False
        packed[others] ^= packed[row]
        pivots.append(col)
        row += 1
    reduced = np.unpackbits(packed[:row], axis=1, count=n)
    return reduced, np.asarray(pivots, dtype=np.int64)


def code_from_parity(h: sp.spmatrix, label: str = "custom", **meta) -> LdpcCode:
    h = sp.csr_matrix(h, dtype=np.uint8)
    if h.nnz and h.max() > 1:
        raise LdpcException("parity_matrix_not_binary")
    reduced, pivots = _gf2_rref_pivots(h)
    is_pivot = np.zeros(h.shape[1], dtype=bool)
    is_pivot[pivots] = True
    info_cols = np.flatnonzero(~is_pivot)
    parity_map = reduced[:, info_cols].astype(np.uint8)
    return LdpcCode(
        h=h,
        info_cols=info_cols,
        parity_cols=pivots,
        parity_map=parity_map,
        label=label,
        meta=dict(meta),
    )


@lru_cache(maxsize=32)
def build_qc_code(rate: str, n: int, seed: int = 2023) -> LdpcCode:
    if rate not in RATE_PRESETS:
        raise LdpcException("unknown_rate_preset", f"rate={rate!r}")
    if n <= 0 or n % BASE_COLUMNS:
        raise LdpcException("block_length_not_multiple_of_12", f"n={n}")
    z = n // BASE_COLUMNS
    m_b = RATE_PRESETS[rate]
    shifts = qc_shifts(m_b, BASE_COLUMNS, z, col_weight=3, seed=seed)
    code = code_from_parity(lift(shifts, z), label=f"qc-{rate}-n{n}", z=z, seed=seed)
    logger.info(
        "ldpc_code_built: label=%s n=%d k=%d rate=%.4f",
        code.label,
        code.n,
        code.k,
        code.rate,
    )
    return code


# ---- encode ------------------------------------------------------------------


def ldpc_encode(msg: Bitstream, code: LdpcCode) -> Bitstream:
    if len(msg) != code.k:
        raise LdpcException("message_length_mismatch", f"len={len(msg)} k={code.k}")
    return Bitstream(encode_batch(msg.bits[None, :], code)[0])


def encode_batch(msgs: np.ndarray, code: LdpcCode) -> np.ndarray:
    msgs = np.asarray(msgs, dtype=np.int64)
    cw = np.zeros((msgs.shape[0], code.n), dtype=np.uint8)
    cw[:, code.info_cols] = msgs
    cw[:, code.parity_cols] = (msgs @ code.parity_map.T.astype(np.int64)) % 2
    return cw


def syndrome_ok(code: LdpcCode, codewords: np.ndarray) -> np.ndarray:
    cw = np.atleast_2d(np.asarray(codewords, dtype=np.int64))
    return ~np.any((code.h @ cw.T) % 2, axis=0)


# ---- decode ------------------------------------------------------------------


class _Graph:
    """Edge lists of H, sorted by check, plus the variable incidence."""

    def __init__(self, code: LdpcCode):
        coo = code.h.tocoo()
        order = np.lexsort((coo.col, coo.row))
        rows, cols = coo.row[order], coo.col[order]
        self.cols = cols
        self.n_edges = len(cols)
        # Checks without edges constrain nothing; reduceat needs non-empty runs.
        check_ids, starts = np.unique(rows, return_index=True)
        self.starts = starts
        self.edge_check = np.searchsorted(check_ids, rows)
        self.var_incidence = sp.csr_matrix(
            (np.ones(self.n_edges), (cols, np.arange(self.n_edges))),
            shape=(code.n, self.n_edges),
        )


@lru_cache(maxsize=32)
def _graph(code: LdpcCode) -> _Graph:
    return _Graph(code)


def decode_batch(
    llrs: np.ndarray, code: LdpcCode, max_iter: int = DEFAULT_MAX_ITER
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Flooding normalized min-sum over a batch of LLR rows.

    Returns (codeword hard decisions, converged flags, iterations used).
    A zero a-posteriori LLR is an undecided bit, so a block with any of them
    never counts as converged.
    """
    if max_iter < 1:
        raise LdpcException("max_iter_must_be_positive", f"max_iter={max_iter}")
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if llrs.shape[1] != code.n:
        raise LdpcException("llr_length_mismatch", f"len={llrs.shape[1]} n={code.n}")
    g = _graph(code)
    batch = llrs.shape[0]
    q = llrs[:, g.cols]
    decided = np.zeros((batch, code.n), dtype=np.uint8)
    converged = np.zeros(batch, dtype=bool)
    iterations = np.full(batch, max_iter, dtype=np.int64)
    active = np.arange(batch)
    for it in range(1, max_iter + 1):
        abs_q = np.abs(q)
        negative = q < 0
        neg_count = np.add.reduceat(negative.astype(np.int64), g.starts, axis=1)
        sign = np.where((neg_count[:, g.edge_check] + negative) % 2, -1.0, 1.0)

        min1 = np.minimum.reduceat(abs_q, g.starts, axis=1)
        is_min = abs_q == min1[:, g.edge_check]
        n_min = np.add.reduceat(is_min.astype(np.int64), g.starts, axis=1)
        min2 = np.minimum.reduceat(np.where(is_min, np.inf, abs_q), g.starts, axis=1)
        min2 = np.where(n_min > 1, min1, min2)
        min2 = np.where(np.isinf(min2), 0.0, min2)
        mag = np.where(is_min, min2[:, g.edge_check], min1[:, g.edge_check])
        r = MIN_SUM_SCALE * sign * mag

        totals = llrs[active] + (g.var_incidence @ r.T).T
        hard = (totals < 0).astype(np.uint8)
        ok = syndrome_ok(code, hard) & ~np.any(totals == 0, axis=1)

        done = active[ok]
        decided[done] = hard[ok]
        converged[done] = True
        iterations[done] = it
        keep = ~ok
        if it == max_iter:
            decided[active[keep]] = hard[keep]
        active = active[keep]
        if active.size == 0:
            break
        q = totals[keep][:, g.cols] - r[keep]
    return decided, converged, iterations


def ldpc_decode_bp(
    llrs: LlrVector, code: LdpcCode, max_iter: int = DEFAULT_MAX_ITER
) -> DecodeResult:
    if len(llrs) != code.n:
        raise LdpcException("llr_length_mismatch", f"len={len(llrs)} n={code.n}")
    cw, converged, iterations = decode_batch(llrs.values[None, :], code, max_iter)
    return DecodeResult(
        message=Bitstream(cw[0, code.info_cols]),
        converged=bool(converged[0]),
        iterations=int(iterations[0]),
    )
