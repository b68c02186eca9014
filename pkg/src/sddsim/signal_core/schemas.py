"""
Value types shared by every chain stage.

`ComplexSignal` is the currency of the simulator: symbol-spaced complex
baseband, one sample per symbol, complex128. Instances are immutable (the
backing array is flagged read-only) so they can be shared between runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sddsim.signal_core.exceptions import SignalDomainException


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise SignalDomainException("non_finite_samples")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def zeros(cls, n: int) -> ComplexSignal:
        return cls(np.zeros(n, dtype=np.complex128))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    def __add__(self, other: ComplexSignal) -> ComplexSignal:
        """Elementwise sum; the shorter operand is zero-padded."""
        n = max(len(self), len(other))
        out = np.zeros(n, dtype=np.complex128)
        out[: len(self)] += self.samples
        out[: len(other)] += other.samples
        return ComplexSignal(out)

    def __sub__(self, other: ComplexSignal) -> ComplexSignal:
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> ComplexSignal:
        return ComplexSignal(self.samples * factor)

    def truncated(self, n: int) -> ComplexSignal:
        """First `n` samples, zero-padded when the signal is shorter."""
        out = np.zeros(n, dtype=np.complex128)
        m = min(n, len(self))
        out[:m] = self.samples[:m]
        return ComplexSignal(out)


@dataclass(frozen=True)
class Flagged:
    """A scalar that may have been clamped or saturated on the way out."""

    value: float
    flagged: bool = False

    def __float__(self) -> float:
        return self.value
