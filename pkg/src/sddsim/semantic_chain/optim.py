"""
The one SGD loop in the codebase.

Used by the JSCC trainer and by the neural self-interference canceller so
both share logging, divergence handling and determinism rules: float64,
momentum SGD, no data-dependent control flow besides the finiteness check.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable

import torch  # type: ignore[import-not-found]

from sddsim.commons.logging import logger
from sddsim.core.settings import settings
from sddsim.semantic_chain.exceptions import TrainingDivergedException


def run_sgd(
    params: Iterable[torch.nn.Parameter],
    loss_fn: Callable[[int], torch.Tensor],
    steps: int,
    learning_rate: float,
    momentum: float = 0.9,
    state_dump: Callable[[], dict] | None = None,
    label: str = "train",
    log_every: int | None = None,
) -> list[float]:
    """
    Minimize `loss_fn(step)` for `steps` steps; returns the per-step losses.

    A non-finite loss aborts before the update is applied and raises
    `TrainingDivergedException` carrying `state_dump()`.
    """
    params = list(params)
    log_every = settings.TRAIN_LOG_EVERY if log_every is None else log_every
    trace: list[float] = []
    if steps <= 0:
        return trace

    opt = torch.optim.SGD(params, lr=learning_rate, momentum=momentum)
    for step in range(steps):
        opt.zero_grad()
        loss = loss_fn(step)
        value = float(loss.detach())
        if not math.isfinite(value):
            state = state_dump() if state_dump else {}
            state.update({"step": step, "loss": value, "last_losses": trace[-10:]})
            logger.error("%s_diverged: step=%d loss=%s", label, step, value)
            raise TrainingDivergedException(
                "non_finite_loss", f"step={step}", state=state
            )
        loss.backward()
        opt.step()
        trace.append(value)
        if log_every and (step + 1) % log_every == 0:
            logger.info("%s_step: step=%d loss=%.6f", label, step + 1, value)
    return trace
