"""
Parity-matrix files in MacKay's "alist" text format.

    n m
    max_col_weight max_row_weight
    <n column weights>
    <m row weights>
    n lines: 1-based row indices per column (zero-padded to max_col_weight)
    m lines: 1-based column indices per row (zero-padded to max_row_weight)

Zero padding is optional on read. The row section must agree with the
column section.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp  # type: ignore[import-not-found]

from sddsim.baseline_chain.exceptions import AlistNotFoundException, LdpcException
from sddsim.baseline_chain.ldpc import code_from_parity
from sddsim.baseline_chain.schemas import LdpcCode


def parse_alist(text: str) -> sp.csr_matrix:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        col_w = [int(x) for x in lines[2]]
        row_w = [int(x) for x in lines[3]]
        col_lines = lines[4 : 4 + n]
        row_lines = lines[4 + n : 4 + n + m]
    except (IndexError, ValueError) as exc:
        raise LdpcException("malformed_alist_header", str(exc)) from exc
    if len(col_w) != n or len(row_w) != m or len(col_lines) != n:
        raise LdpcException("malformed_alist_counts", f"n={n} m={m}")

    rows: list[int] = []
    cols: list[int] = []
    for j, entries in enumerate(col_lines):
        idx = [int(x) for x in entries if int(x) > 0]
        if len(idx) != col_w[j]:
            raise LdpcException("alist_column_weight_mismatch", f"column={j + 1}")
        rows.extend(i - 1 for i in idx)
        cols.extend([j] * len(idx))
    h = sp.csr_matrix(
        (np.ones(len(rows), dtype=np.uint8), (rows, cols)), shape=(m, n)
    )
    if h.nnz and h.max() > 1:
        raise LdpcException("alist_duplicate_entries")

    if len(row_lines) == m:
        for i, entries in enumerate(row_lines):
            idx = sorted(int(x) - 1 for x in entries if int(x) > 0)
            if idx != sorted(h.getrow(i).indices.tolist()):
                raise LdpcException("alist_row_section_mismatch", f"row={i + 1}")
    return h


def format_alist(h: sp.spmatrix) -> str:
    h = sp.csc_matrix(h)
    hr = sp.csr_matrix(h)
    m, n = h.shape
    col_w = np.diff(h.indptr)
    row_w = np.diff(hr.indptr)
    max_c, max_r = int(col_w.max(initial=0)), int(row_w.max(initial=0))
    out = [f"{n} {m}", f"{max_c} {max_r}"]
    out.append(" ".join(str(int(w)) for w in col_w))
    out.append(" ".join(str(int(w)) for w in row_w))
    for j in range(n):
        idx = sorted(h.indices[h.indptr[j] : h.indptr[j + 1]] + 1)
        out.append(" ".join(str(int(x)) for x in idx + [0] * (max_c - len(idx))))
    for i in range(m):
        idx = sorted(hr.indices[hr.indptr[i] : hr.indptr[i + 1]] + 1)
        out.append(" ".join(str(int(x)) for x in idx + [0] * (max_r - len(idx))))
    return "\n".join(out) + "\n"


def read_alist(path: str | Path) -> LdpcCode:
    p = Path(path)
    if not p.is_file():
        raise AlistNotFoundException("alist_not_found", str(p))
    return code_from_parity(parse_alist(p.read_text()), label=p.stem, source=str(p))


def write_alist(path: str | Path, code: LdpcCode) -> Path:
    p = Path(path)
    p.write_text(format_alist(code.h))
    return p
