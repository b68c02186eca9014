from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest  # type: ignore[import-not-found]

from sddsim.baseline_chain.exceptions import AlistNotFoundException, LdpcException
from sddsim.baseline_chain.ldpc import build_qc_code
from sddsim.baseline_chain.repository import (
    format_alist,
    parse_alist,
    read_alist,
    write_alist,
)

_SMALL = """\
4 2
1 2
1 1 1 1
2 2
1 0
1 0
2 0
2 0
1 2
3 4
"""


def test_parse_small_file() -> None:
    h = parse_alist(_SMALL).toarray()
    np.testing.assert_array_equal(h, [[1, 1, 0, 0], [0, 0, 1, 1]])


def test_format_then_parse_preserves_matrix() -> None:
    code = build_qc_code("7/12", 120)
    h = parse_alist(format_alist(code.h))
    assert (h != code.h).nnz == 0


def test_write_then_read(tmp_path: Path) -> None:
    code = build_qc_code("1/3", 96)
    loaded = read_alist(write_alist(tmp_path / "c.alist", code))
    assert (loaded.n, loaded.k) == (code.n, code.k)
    assert loaded.label == "c"


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(AlistNotFoundException):
        read_alist(tmp_path / "nope.alist")


def test_malformed_header() -> None:
    with pytest.raises(LdpcException):
        parse_alist("four two\n")


def test_row_section_must_agree() -> None:
    bad = _SMALL.replace("1 2\n3 4\n", "1 3\n2 4\n")
    with pytest.raises(LdpcException):
        parse_alist(bad)
