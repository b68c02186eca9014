from __future__ import annotations

from pathlib import Path

import pytest  # type: ignore[import-not-found]

from sddsim.semantic_chain.exceptions import (
    ModelFileException,
    ModelFileNotFoundException,
)
from sddsim.semantic_chain.repository import (
    load_model,
    model_bytes,
    parse_model,
    save_model,
)
from sddsim.semantic_chain.schemas import ModelSpec


def test_save_then_load_is_byte_identical(tmp_path: Path, tiny_model, tiny_spec):
    path = save_model(tmp_path / "nested" / "model.sddj", tiny_model)
    loaded = load_model(path, tiny_spec)
    assert loaded.spec == tiny_spec
    assert model_bytes(loaded) == path.read_bytes()


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ModelFileNotFoundException):
        load_model(tmp_path / "absent.sddj")


def test_bad_magic(tiny_model) -> None:
    data = b"XXXX" + model_bytes(tiny_model)[4:]
    with pytest.raises(ModelFileException, match="bad_magic"):
        parse_model(data)


def test_unsupported_version(tiny_model) -> None:
    data = bytearray(model_bytes(tiny_model))
    data[4] = 99
    with pytest.raises(ModelFileException, match="unsupported_version"):
        parse_model(bytes(data))


def test_spec_mismatch(tiny_model) -> None:
    other = ModelSpec(patch_size=16, k_symbols=48, hidden=(32,), cond_dim=4)
    with pytest.raises(ModelFileException, match="spec_hash_mismatch"):
        parse_model(model_bytes(tiny_model), other)


@pytest.mark.parametrize(
    "mutate,reason",
    [
        (lambda b: b[:-8], "truncated_parameters"),
        (lambda b: b + b"\x00" * 8, "trailing_bytes"),
        (lambda b: b[:5], "truncated_header"),
    ],
)
def test_length_damage(tiny_model, mutate, reason: str) -> None:
    with pytest.raises(ModelFileException, match=reason):
        parse_model(mutate(model_bytes(tiny_model)))
