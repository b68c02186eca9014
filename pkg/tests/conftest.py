"""
Global pytest fixtures.

Keep this file small: seeded streams, synthetic patches, a tiny JSCC model
and a throwaway PGM corpus. Reference-scale fixtures live in the slow tests
that need them.
"""

from __future__ import annotations

from pathlib import Path

import pytest  # type: ignore[import-not-found]

from sddsim.baseline_chain.schemas import ImagePatch
from sddsim.semantic_chain.model import JsccModel
from sddsim.semantic_chain.schemas import ModelSpec
from sddsim.signal_core.rng import RngStream
from tests.factories import make_patch, write_pgm_corpus


@pytest.fixture()
def rng() -> RngStream:
    return RngStream(1, 0)


@pytest.fixture(scope="session")
def patches() -> list[ImagePatch]:
    return [make_patch(k) for k in range(8)]


@pytest.fixture(scope="session")
def tiny_spec() -> ModelSpec:
    return ModelSpec(patch_size=16, k_symbols=24, hidden=(32,), cond_dim=4)


@pytest.fixture()
def tiny_model(tiny_spec: ModelSpec) -> JsccModel:
    return JsccModel(tiny_spec, seed=0)


@pytest.fixture()
def corpus_dir(tmp_path: Path) -> Path:
    return write_pgm_corpus(tmp_path / "corpus")
