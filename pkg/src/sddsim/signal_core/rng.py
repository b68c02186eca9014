"""
Deterministic random streams.

Each stream is a numpy `Generator` over the Philox-4x64 counter-based bit
generator, keyed by `SeedSequence(entropy=seed, spawn_key=(stream_id, ...))`.
Philox output and numpy's normal sampling are platform-independent, so a
(seed, stream_id) pair replays bit-identically anywhere. Streams never share
state: parallel runs must be handed distinct ids.
"""

from __future__ import annotations

import numpy as np

from sddsim.signal_core.exceptions import SignalDomainException


class RngStream:
    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        keys = stream_id if isinstance(stream_id, tuple) else (stream_id,)
        if seed < 0 or any(k < 0 for k in keys):
            raise SignalDomainException(
                "negative_seed_or_stream", f"seed={seed} stream_id={stream_id}"
            )
        self.seed = int(seed)
        self.stream_id = tuple(int(k) for k in keys)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
        self._gen = np.random.Generator(np.random.Philox(seq))

    @classmethod
    def derive(cls, seed: int, *keys: int) -> RngStream:
        """Stream for a composite id, e.g. (series, sinr_index, trial)."""
        return cls(seed, tuple(keys))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
