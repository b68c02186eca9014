"""
Versioned flat-binary model files.

    magic      4 bytes  b"SDDJ"
    version    uint16 LE
    spec_len   uint32 LE
    spec       spec_len bytes, canonical ModelSpec JSON (layer dims)
    spec_hash  32 bytes, sha256(spec)
    params     float64 LE blocks, state_dict order, no padding

Files are a pure function of the parameters, so reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np
import torch  # type: ignore[import-not-found]

from sddsim.semantic_chain.exceptions import (
    ModelFileException,
    ModelFileNotFoundException,
)
from sddsim.semantic_chain.model import JsccModel
from sddsim.semantic_chain.schemas import MODEL_VERSION, ModelSpec

MAGIC = b"SDDJ"
_HEADER = struct.Struct("<4sHI")


def model_bytes(model: JsccModel) -> bytes:
    spec = model.spec.canonical().encode()
    header = _HEADER.pack(MAGIC, MODEL_VERSION, len(spec))
    parts = [header, spec, model.spec.spec_hash()]
    for tensor in model.state_dict().values():
        parts.append(tensor.detach().numpy().astype("<f8").tobytes())
    return b"".join(parts)


def save_model(path: str | Path, model: JsccModel) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(model_bytes(model))
    return p


def parse_model(data: bytes, expected: ModelSpec | None = None) -> JsccModel:
    if len(data) < _HEADER.size:
        raise ModelFileException("truncated_header")
    magic, version, spec_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFileException("bad_magic", repr(magic))
    if version != MODEL_VERSION:
        raise ModelFileException("unsupported_version", f"version={version}")
    offset = _HEADER.size
    spec_raw = data[offset : offset + spec_len]
    stored_hash = data[offset + spec_len : offset + spec_len + 32]
    if hashlib.sha256(spec_raw).digest() != stored_hash:
        raise ModelFileException("corrupt_spec_header")
    spec = ModelSpec.model_validate_json(spec_raw)
    if expected is not None and expected.spec_hash() != stored_hash:
        raise ModelFileException(
            "spec_hash_mismatch",
            f"file={spec.canonical()} expected={expected.canonical()}",
        )

    model = JsccModel(spec)
    offset += spec_len + 32
    state = {}
    for name, tensor in model.state_dict().items():
        nbytes = tensor.numel() * 8
        if offset + nbytes > len(data):
            raise ModelFileException("truncated_parameters", name)
        block = np.frombuffer(data, dtype="<f8", count=tensor.numel(), offset=offset)
        state[name] = torch.from_numpy(block.astype(np.float64).reshape(tensor.shape))
        offset += nbytes
    if offset != len(data):
        raise ModelFileException("trailing_bytes", f"{len(data) - offset}")
    model.load_state_dict(state)
    return model


def load_model(path: str | Path, expected: ModelSpec | None = None) -> JsccModel:
    p = Path(path)
    if not p.is_file():
        raise ModelFileNotFoundException("model_file_not_found", str(p))
    return parse_model(p.read_bytes(), expected)
