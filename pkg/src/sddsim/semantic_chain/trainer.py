"""
End-to-end JSCC training through a simulated in-band full-duplex link.

Each step draws one batch per direction. At terminal B the decoder (id 0,
A->B) sees x_A + residual SI of x_B + noise; at terminal A the decoder
(id 1, B->A) sees x_B + residual SI of x_A + noise. The desired signal is
unit power after equalization; noise power follows the training SNR and
the residual power is the SI power implied by the sampled pre-digital
SINR, reduced by the digital suppression measured for the scenario.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np
import torch  # type: ignore[import-not-found]

from sddsim.baseline_chain.schemas import ImagePatch
from sddsim.channel.schemas import ChannelConfig, ChannelRealization, PaModel
from sddsim.channel.service import apply_channel_batch, apply_pa_batch, draw_rician
from sddsim.commons.logging import logger
from sddsim.metrics.schemas import MsSsimConfig
from sddsim.metrics.service import ms_ssim_batch
from sddsim.semantic_chain.exceptions import JsccException
from sddsim.semantic_chain.model import JsccModel
from sddsim.semantic_chain.optim import run_sgd
from sddsim.semantic_chain.schemas import (
    DIRECTION_AB,
    DIRECTION_BA,
    ModelSpec,
    TrainConfig,
)
from sddsim.semantic_chain.service import to_complex, to_real
from sddsim.sic.schemas import SicConfig, SuppressionCurve
from sddsim.sic.service import characterize_suppression
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.service import from_db, gaussian

TRAIN_STREAM = 0x7A11
SI_STREAM = 0x7A12
GRADCHECK_STREAM = 0x6C4B


@dataclass(frozen=True)
class TrainingChannel:
    snr_db: float
    si_channel: ChannelRealization
    pa: PaModel | None
    suppression: SuppressionCurve


def build_training_channel(
    channel_cfg: ChannelConfig,
    sic_cfg: SicConfig,
    tc: TrainConfig,
    step_db: float = 2.0,
) -> TrainingChannel:
    """Hold one SI realization and measure nonlinear SIC over the train range."""
    r = RngStream(tc.seed, SI_STREAM)
    h = draw_rician(channel_cfg.si_profile, r)
    low, high = tc.sinr_train_range_db
    grid = list(np.arange(low, high + step_db / 2, step_db)) if high > low else [low]
    curve = characterize_suppression(
        "nonlinear",
        h,
        channel_cfg.pa,
        channel_cfg.tx_evm_db,
        sic_cfg,
        grid,
        p_noise=from_db(-tc.snr_db),
        r=r,
    )
    return TrainingChannel(tc.snr_db, h, channel_cfg.pa, curve)


def stack_patches(corpus: list[ImagePatch], size: int) -> torch.Tensor:
    if not corpus:
        raise JsccException("empty_corpus")
    arr = np.stack([p.pixels for p in corpus])
    if arr.shape[1:] != (size, size):
        raise JsccException("patch_size_mismatch", f"{arr.shape[1:]} vs {(size, size)}")
    return torch.from_numpy(arr)


def _residual(
    z_self: torch.Tensor,
    sinr_db: np.ndarray,
    channel: TrainingChannel,
    mode: str,
    r: RngStream,
) -> torch.Tensor:
    n0 = from_db(-channel.snr_db)
    si_power = np.maximum(10.0 ** (-sinr_db / 10.0) - n0, 0.0)
    rp = 10.0 ** (-np.asarray(channel.suppression.at(sinr_db)) / 10.0) * si_power
    n, k = z_self.shape[0], z_self.shape[1] // 2
    if mode == "measured":
        x = to_complex(z_self)
        if channel.pa is not None:
            x = apply_pa_batch(x, channel.pa)
        s = apply_channel_batch(x, channel.si_channel)
        p = np.mean(np.abs(s) ** 2, axis=1, keepdims=True)
        s = s / np.sqrt(np.maximum(p, 1e-300))
    else:
        s = gaussian(r, n * k).reshape(n, k)
    return to_real(s * np.sqrt(rp)[:, None])


def _noise(n: int, k: int, snr_db: float, r: RngStream) -> torch.Tensor:
    return to_real(gaussian(r, n * k, from_db(-snr_db)).reshape(n, k))


def _train(
    model: JsccModel,
    x: torch.Tensor,
    channel: TrainingChannel,
    tc: TrainConfig,
) -> list[float]:
    r = RngStream(tc.seed, TRAIN_STREAM)
    low, high = tc.sinr_train_range_db
    n = x.shape[0]
    k = model.spec.k_symbols
    ms_cfg = MsSsimConfig.for_size(model.spec.patch_size, model.spec.patch_size)

    def distortion(x_hat: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        if tc.loss == "ms_ssim":
            return 1.0 - ms_ssim_batch(x_hat, target, ms_cfg).mean()
        return ((x_hat - target) ** 2).mean()

    def loss_fn(step: int) -> torch.Tensor:
        xa = x[r.generator.integers(0, n, size=tc.batch_size)]
        xb = x[r.generator.integers(0, n, size=tc.batch_size)]
        sinr = r.generator.uniform(low, high, size=tc.batch_size)
        za = model.encode(xa, DIRECTION_AB)
        zb = model.encode(xb, DIRECTION_BA)
        # residual SI is a fixed perturbation of the own transmission
        y_b = za + _residual(zb.detach(), sinr, channel, tc.residual_mode, r)
        y_b = y_b + _noise(tc.batch_size, k, channel.snr_db, r)
        y_a = zb + _residual(za.detach(), sinr, channel, tc.residual_mode, r)
        y_a = y_a + _noise(tc.batch_size, k, channel.snr_db, r)
        loss_ab = distortion(model.decode(y_b, DIRECTION_AB), xa)
        loss_ba = distortion(model.decode(y_a, DIRECTION_BA), xb)
        return 0.5 * (loss_ab + loss_ba)

    def dump() -> dict:
        return {
            "parameter_norms": {
                name: float(p.detach().norm()) for name, p in model.named_parameters()
            },
            "train_config": tc.model_dump(),
        }

    return run_sgd(
        model.parameters(),
        loss_fn,
        tc.steps,
        tc.learning_rate,
        momentum=tc.momentum,
        state_dump=dump,
        label="jscc_train",
    )


def train_jscc(
    corpus: list[ImagePatch],
    channel: TrainingChannel,
    tc: TrainConfig,
    spec: ModelSpec | None = None,
) -> tuple[JsccModel, list[float]]:
    spec = spec or ModelSpec(patch_size=tc.patch_size)
    if spec.patch_size != tc.patch_size:
        raise JsccException(
            "patch_size_mismatch", f"{spec.patch_size} vs {tc.patch_size}"
        )
    x = stack_patches(corpus, spec.patch_size)
    model = JsccModel(spec, seed=tc.init_seed)
    logger.info(
        "jscc_train_start: params=%d steps=%d patches=%d",
        model.parameter_count(),
        tc.steps,
        len(corpus),
    )
    trace = _train(model, x, channel, tc)
    final = trace[-1] if trace else None
    logger.info("jscc_train_done: steps=%d final_loss=%s", len(trace), final)
    return model, trace


def fine_tune_jscc(
    model: JsccModel,
    corpus: list[ImagePatch],
    channel: TrainingChannel,
    tc: TrainConfig,
) -> tuple[JsccModel, list[float]]:
    """Continue training a copy of `model`; the input model is untouched."""
    tuned = copy.deepcopy(model)
    trace = _train(tuned, stack_patches(corpus, model.spec.patch_size), channel, tc)
    return tuned, trace


def _reconstruction_loss(
    model: JsccModel,
    x: torch.Tensor,
    direction: int,
    target: torch.Tensor | None = None,
) -> torch.Tensor:
    out = model.decode(model.encode(x, direction), direction)
    return ((out - (x if target is None else target)) ** 2).mean()


def loss_gradients(
    model: JsccModel,
    batch: list[ImagePatch],
    direction: int = DIRECTION_AB,
    target: torch.Tensor | None = None,
) -> dict[str, torch.Tensor]:
    """Analytic gradient of the no-channel MSE loss per parameter tensor."""
    x = stack_patches(batch, model.spec.patch_size)
    model.zero_grad()
    _reconstruction_loss(model, x, direction, target).backward()
    grads = {
        name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in model.named_parameters()
    }
    model.zero_grad()
    return grads


def gradient_check(
    m: JsccModel,
    batch: list[ImagePatch],
    seed: int = 0,
    coords_per_group: int = 8,
    h: float = 1e-4,
    direction: int = DIRECTION_AB,
    floor: float = 1e-6,
) -> float:
    """
    Max relative error between autograd and central differences over
    `coords_per_group` sampled coordinates of every parameter tensor.
    The denominator is floored at `floor` so near-zero gradients are compared
    on an absolute scale below the resolution of the difference quotient.
    """
    if not batch:
        raise JsccException("empty_batch")
    model = copy.deepcopy(m)
    x = stack_patches(batch, model.spec.patch_size)
    grads = loss_gradients(model, batch, direction)
    r = RngStream(seed, GRADCHECK_STREAM)
    worst = 0.0
    with torch.no_grad():
        for name, p in model.named_parameters():
            flat = p.view(-1)
            g = grads[name].view(-1)
            count = min(coords_per_group, flat.numel())
            picks = r.generator.choice(flat.numel(), size=count, replace=False)
            for i in map(int, picks):
                orig = float(flat[i])
                flat[i] = orig + h
                plus = float(_reconstruction_loss(model, x, direction))
                flat[i] = orig - h
                minus = float(_reconstruction_loss(model, x, direction))
                flat[i] = orig
                numeric = (plus - minus) / (2.0 * h)
                analytic = float(g[i])
                scale = max(abs(numeric), abs(analytic), floor)
                worst = max(worst, abs(numeric - analytic) / scale)
    if not math.isfinite(worst):
        raise JsccException("gradient_check_non_finite")
    return worst
