"""
Reconstruction and link metrics.

MS-SSIM is implemented once, in torch float64, so the same code scores
evaluation runs and serves as a differentiable training loss
(`ms_ssim_batch`). Gaussian filtering is separable with symmetric
(edge-including) padding, so maps keep the input size; downsampling
between scales is 2x2 average pooling.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import torch  # type: ignore[import-not-found]
import torch.nn.functional as F  # type: ignore[import-not-found]

from sddsim.baseline_chain.schemas import Bitstream, ImagePatch
from sddsim.metrics.exceptions import MetricsException
from sddsim.metrics.schemas import MS_SSIM_DB_CAP, PSNR_CAP_DB, MsSsimConfig
from sddsim.signal_core.schemas import Flagged

# Keeps the fractional powers differentiable at cs = 0.
_CS_FLOOR = 1e-12


@lru_cache
def _window(size: int, sigma: float) -> torch.Tensor:
    coords = torch.arange(size, dtype=torch.float64) - size // 2
    g = torch.exp(-(coords**2) / (2 * sigma**2))
    return g / g.sum()


def _pad_symmetric(x: torch.Tensor, pad: int) -> torch.Tensor:
    x = torch.cat([x[..., :pad].flip(-1), x, x[..., -pad:].flip(-1)], dim=-1)
    return torch.cat(
        [x[..., :pad, :].flip(-2), x, x[..., -pad:, :].flip(-2)], dim=-2
    )


def _blur(x: torch.Tensor, win: torch.Tensor) -> torch.Tensor:
    pad = win.shape[0] // 2
    x = _pad_symmetric(x, pad)
    x = F.conv2d(x, win.view(1, 1, 1, -1))
    return F.conv2d(x, win.view(1, 1, -1, 1))


def _ssim_cs(
    x: torch.Tensor, y: torch.Tensor, cfg: MsSsimConfig
) -> tuple[torch.Tensor, torch.Tensor]:
    win = _window(cfg.window_size, cfg.sigma)
    mu_x, mu_y = _blur(x, win), _blur(y, win)
    sxx = _blur(x * x, win) - mu_x * mu_x
    syy = _blur(y * y, win) - mu_y * mu_y
    sxy = _blur(x * y, win) - mu_x * mu_y
    cs_map = (2 * sxy + cfg.c2) / (sxx + syy + cfg.c2)
    lum = (2 * mu_x * mu_y + cfg.c1) / (mu_x * mu_x + mu_y * mu_y + cfg.c1)
    return (lum * cs_map).mean(dim=(-2, -1)), cs_map.mean(dim=(-2, -1))


def ms_ssim_batch(
    x: torch.Tensor, y: torch.Tensor, cfg: MsSsimConfig | None = None
) -> torch.Tensor:
    """
    MS-SSIM per image for batches shaped (N, H, W) or (N, 1, H, W).

    Returns a float64 tensor of shape (N,) clamped to [0, 1]. Differentiable.
    """
    if x.shape != y.shape:
        raise MetricsException(
            "shape_mismatch", f"{tuple(x.shape)} vs {tuple(y.shape)}"
        )
    if x.dim() == 3:
        x, y = x.unsqueeze(1), y.unsqueeze(1)
    x, y = x.to(torch.float64), y.to(torch.float64)
    h, w = x.shape[-2:]
    cfg = cfg or MsSsimConfig.for_size(h, w)
    if min(h, w) < cfg.min_side():
        raise MetricsException(
            "image_too_small_for_ms_ssim", f"{h}x{w} < {cfg.min_side()} per side"
        )

    weights = torch.tensor(cfg.weights, dtype=torch.float64)
    out = torch.ones(x.shape[0], dtype=torch.float64)
    for i in range(cfg.scales):
        ssim, cs = _ssim_cs(x, y, cfg)
        if i < cfg.scales - 1:
            out = out * cs.view(-1).clamp(min=_CS_FLOOR) ** weights[i]
            x, y = F.avg_pool2d(x, 2), F.avg_pool2d(y, 2)
        else:
            out = out * ssim.view(-1).clamp(min=_CS_FLOOR) ** weights[i]
    return out.clamp(0.0, 1.0)


def ms_ssim(a: ImagePatch, b: ImagePatch, cfg: MsSsimConfig | None = None) -> float:
    if a.pixels.shape != b.pixels.shape:
        raise MetricsException(
            "patch_size_mismatch", f"{a.pixels.shape} vs {b.pixels.shape}"
        )
    x = torch.from_numpy(np.array(a.pixels)).unsqueeze(0)
    y = torch.from_numpy(np.array(b.pixels)).unsqueeze(0)
    with torch.no_grad():
        return float(ms_ssim_batch(x, y, cfg)[0])


def ms_ssim_db(v: float, cap: float = MS_SSIM_DB_CAP) -> Flagged:
    """-10 log10(1 - v), saturating at `cap` (flagged) as v -> 1."""
    if not 0.0 <= v <= 1.0:
        raise MetricsException("ms_ssim_out_of_range", f"v={v}")
    if v >= 1.0:
        return Flagged(cap, True)
    value = -10.0 * math.log10(1.0 - v)
    if value > cap:
        return Flagged(cap, True)
    return Flagged(value + 0.0)  # -0.0 at v = 0


def psnr(a: ImagePatch, b: ImagePatch, cap: float = PSNR_CAP_DB) -> Flagged:
    if a.pixels.shape != b.pixels.shape:
        raise MetricsException(
            "patch_size_mismatch", f"{a.pixels.shape} vs {b.pixels.shape}"
        )
    mse = float(np.mean((a.pixels - b.pixels) ** 2))
    if mse == 0.0:
        return Flagged(cap, True)
    value = -10.0 * math.log10(mse)
    return Flagged(cap, True) if value > cap else Flagged(value)


def ber(tx: Bitstream, rx: Bitstream) -> float:
    if len(tx) != len(rx):
        raise MetricsException("bitstream_length_mismatch", f"{len(tx)} vs {len(rx)}")
    if len(tx) == 0:
        raise MetricsException("empty_bitstream")
    return float(np.count_nonzero(tx.bits != rx.bits)) / len(tx)


def bler(tx_blocks: np.ndarray, rx_blocks: np.ndarray) -> float:
    """Fraction of rows (blocks) with at least one bit error."""
    tx_blocks, rx_blocks = np.atleast_2d(tx_blocks), np.atleast_2d(rx_blocks)
    if tx_blocks.shape != rx_blocks.shape:
        raise MetricsException(
            "block_shape_mismatch", f"{tx_blocks.shape} vs {rx_blocks.shape}"
        )
    if tx_blocks.shape[0] == 0:
        raise MetricsException("no_blocks")
    return float(np.mean(np.any(tx_blocks != rx_blocks, axis=1)))
