"""
JSCC encoder/decoder networks (torch, float64).

Symbols travel as real tensors shaped (N, 2k): interleaved (re, im) pairs,
symbol i at columns 2i and 2i+1.
"""

from __future__ import annotations

import math

import torch  # type: ignore[import-not-found]
from torch import nn  # type: ignore[import-not-found]

from sddsim.core.settings import settings
from sddsim.semantic_chain.exceptions import JsccException
from sddsim.semantic_chain.schemas import MODEL_VERSION, ModelSpec

torch.set_num_threads(settings.TORCH_NUM_THREADS)

_POWER_EPS = 1e-30


def init_uniform_(layer: nn.Linear, generator: torch.Generator) -> None:
    """U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias."""
    bound = 1.0 / math.sqrt(layer.in_features)
    with torch.no_grad():
        layer.weight.uniform_(-bound, bound, generator=generator)
        if layer.bias is not None:
            layer.bias.uniform_(-bound, bound, generator=generator)


def _dense_stack(widths: tuple[int, ...], generator: torch.Generator) -> nn.ModuleList:
    layers = nn.ModuleList(
        nn.Linear(a, b, dtype=torch.float64) for a, b in zip(widths[:-1], widths[1:])
    )
    for layer in layers:
        init_uniform_(layer, generator)
    return layers


class _Encoder(nn.Module):
    def __init__(self, widths: tuple[int, ...], generator: torch.Generator):
        super().__init__()
        self.layers = _dense_stack(widths, generator)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        for layer in self.layers[:-1]:
            h = torch.tanh(layer(h))
        return self.layers[-1](h)


class _Decoder(nn.Module):
    """`trunk` ends in the semantic vector; `head` synthesizes pixels."""

    def __init__(self, widths: tuple[int, ...], generator: torch.Generator):
        super().__init__()
        self.trunk = _dense_stack(widths[:-1], generator)
        self.head = nn.Linear(widths[-2], widths[-1], dtype=torch.float64)
        init_uniform_(self.head, generator)

    def semantic(self, h: torch.Tensor) -> torch.Tensor:
        for layer in self.trunk:
            h = torch.tanh(layer(h))
        return h

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.head(self.semantic(h))).clamp(0.0, 1.0)


class JsccModel(nn.Module):
    def __init__(self, spec: ModelSpec, seed: int = 0):
        super().__init__()
        self.spec = spec
        self.version = MODEL_VERSION
        gen = torch.Generator().manual_seed(seed)
        n_pairs = 1 if spec.conditioning == "embedding" else spec.n_directions
        self.encoders = nn.ModuleList(
            _Encoder(spec.encoder_widths(), gen) for _ in range(n_pairs)
        )
        self.decoders = nn.ModuleList(
            _Decoder(spec.decoder_widths(), gen) for _ in range(n_pairs)
        )
        if spec.conditioning == "embedding":
            emb = torch.empty(spec.n_directions, spec.cond_dim, dtype=torch.float64)
            emb.uniform_(-1.0, 1.0, generator=gen)
            self.embedding = nn.Parameter(emb)
        else:
            self.register_parameter("embedding", None)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def _check_direction(self, direction: int) -> None:
        if not 0 <= direction < self.spec.n_directions:
            raise JsccException("unknown_direction", f"direction={direction}")

    def _with_condition(self, h: torch.Tensor, direction: int) -> torch.Tensor:
        if self.embedding is None:
            return h
        cond = self.embedding[direction].expand(h.shape[0], -1)
        return torch.cat([h, cond], dim=1)

    def _pair(self, direction: int) -> int:
        return 0 if self.embedding is not None else direction

    def encode(self, patches: torch.Tensor, direction: int) -> torch.Tensor:
        """(N, P, P) or (N, P*P) pixels -> (N, 2k) unit-mean-power symbols."""
        self._check_direction(direction)
        h = self._with_condition(patches.reshape(patches.shape[0], -1), direction)
        z = self.encoders[self._pair(direction)](h)
        p = (z * z).sum(dim=1, keepdim=True) / self.spec.k_symbols
        return z / torch.sqrt(p + _POWER_EPS)

    def semantic(self, y: torch.Tensor, direction: int) -> torch.Tensor:
        self._check_direction(direction)
        decoder = self.decoders[self._pair(direction)]
        return decoder.semantic(self._with_condition(y, direction))

    def decode(self, y: torch.Tensor, direction: int) -> torch.Tensor:
        """(N, 2k) received symbols -> (N, P, P) pixels in [0, 1]."""
        self._check_direction(direction)
        out = self.decoders[self._pair(direction)](self._with_condition(y, direction))
        return out.reshape(-1, self.spec.patch_size, self.spec.patch_size)
