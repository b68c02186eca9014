from __future__ import annotations

import numpy as np
import torch  # type: ignore[import-not-found]
from torch import nn  # type: ignore[import-not-found]

from sddsim.semantic_chain.model import init_uniform_
from sddsim.sic.schemas import NetworkBasis


def delay_features(x: np.ndarray, memory: int) -> torch.Tensor:
    """(n, 2*memory) real features: Re/Im of x[k - m], m = 0..memory-1."""
    n = x.shape[0]
    cols = np.zeros((n, 2 * memory), dtype=np.float64)
    for m in range(memory):
        xm = np.zeros(n, dtype=np.complex128)
        xm[m:] = x[: n - m] if m < n else 0
        cols[:, 2 * m] = xm.real
        cols[:, 2 * m + 1] = xm.imag
    return torch.from_numpy(cols)


class SicNetwork(nn.Module):
    """tanh MLP plus a linear skip path, mapping delayed tx symbols to SI."""

    def __init__(self, basis: NetworkBasis, generator: torch.Generator):
        super().__init__()
        widths = (2 * basis.memory, *basis.hidden, 2)
        self.hidden = nn.ModuleList(
            nn.Linear(a, b, dtype=torch.float64)
            for a, b in zip(widths[:-1], widths[1:])
        )
        self.skip = nn.Linear(2 * basis.memory, 2, bias=False, dtype=torch.float64)
        for layer in self.hidden:
            init_uniform_(layer, generator)
        init_uniform_(self.skip, generator)
        self.memory = basis.memory
        self.in_scale = 1.0
        self.out_scale = 1.0

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        h = z
        for i, layer in enumerate(self.hidden):
            h = layer(h)
            if i < len(self.hidden) - 1:
                h = torch.tanh(h)
        return h + self.skip(z)

    def predict(self, x: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            out = self(delay_features(x / self.in_scale, self.memory)).numpy()
        return (out[:, 0] + 1j * out[:, 1]) * self.out_scale
