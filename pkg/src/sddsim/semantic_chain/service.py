from __future__ import annotations

import numpy as np
import torch  # type: ignore[import-not-found]

from sddsim.baseline_chain.schemas import ImagePatch
from sddsim.semantic_chain.exceptions import JsccException
from sddsim.semantic_chain.model import JsccModel
from sddsim.semantic_chain.schemas import SemanticVector
from sddsim.signal_core.schemas import ComplexSignal


def to_real(y: np.ndarray) -> torch.Tensor:
    """Complex (..., k) -> interleaved real (..., 2k)."""
    y = np.asarray(y, dtype=np.complex128)
    out = np.empty((*y.shape[:-1], 2 * y.shape[-1]), dtype=np.float64)
    out[..., 0::2] = y.real
    out[..., 1::2] = y.imag
    return torch.from_numpy(out)


def to_complex(z: torch.Tensor) -> np.ndarray:
    arr = z.detach().numpy()
    return arr[..., 0::2] + 1j * arr[..., 1::2]


def _check_patch(p: ImagePatch, m: JsccModel) -> None:
    size = m.spec.patch_size
    if p.pixels.shape != (size, size):
        raise JsccException(
            "patch_size_mismatch", f"{p.pixels.shape} vs {(size, size)}"
        )


def _check_symbols(y: ComplexSignal, m: JsccModel) -> None:
    if len(y) != m.spec.k_symbols:
        raise JsccException("symbol_count_mismatch", f"{len(y)} vs {m.spec.k_symbols}")


def jscc_encode(p: ImagePatch, direction_id: int, m: JsccModel) -> ComplexSignal:
    _check_patch(p, m)
    with torch.no_grad():
        z = m.encode(torch.from_numpy(np.array(p.pixels)).unsqueeze(0), direction_id)
    return ComplexSignal(to_complex(z)[0])


def jscc_decode(y: ComplexSignal, direction_id: int, m: JsccModel) -> ImagePatch:
    _check_symbols(y, m)
    with torch.no_grad():
        out = m.decode(to_real(y.samples[None, :]), direction_id)
    return ImagePatch(np.clip(out[0].numpy(), 0.0, 1.0))


def semantic_vectors(
    m: JsccModel, y: ComplexSignal, direction_id: int
) -> SemanticVector:
    """Decoder hidden representation of received symbols `y`."""
    _check_symbols(y, m)
    with torch.no_grad():
        h = m.semantic(to_real(y.samples[None, :]), direction_id)
    return SemanticVector(h[0].numpy(), direction_id)


def semantic_distance(v1: SemanticVector, v2: SemanticVector) -> float:
    if len(v1) != len(v2):
        raise JsccException("dimension_mismatch", f"{len(v1)} vs {len(v2)}")
    return float(np.linalg.norm(v1.values - v2.values))


def direction_separability(m: JsccModel, patches: list[ImagePatch]) -> dict[str, float]:
    """
    Distance between the semantic vectors a patch maps to under the two
    directions (encode and decode with the same id, no channel), against
    the distance between different patches within one direction.
    """
    if not patches:
        raise JsccException("empty_patch_list")
    across, within = [], []
    vectors = []
    for p in patches:
        v0 = semantic_vectors(m, jscc_encode(p, 0, m), 0)
        v1 = semantic_vectors(m, jscc_encode(p, 1, m), 1)
        across.append(semantic_distance(v0, v1))
        vectors.append(v0)
    for a, b in zip(vectors, vectors[1:]):
        within.append(semantic_distance(a, b))
    return {
        "inter_direction_mean": float(np.mean(across)),
        "intra_direction_mean": float(np.mean(within)) if within else 0.0,
    }
