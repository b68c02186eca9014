"""
Digital-domain self-interference cancellation.

Cancellers model the received SI as a function of the known digital
transmit symbols (tapped after modulation). They are fitted offline on a
calibration burst sent while the remote terminal is silent and may be
fine-tuned online on new data.
"""

from __future__ import annotations

import copy
import math

import numpy as np
import scipy.linalg  # type: ignore[import-not-found]
import torch  # type: ignore[import-not-found]

from sddsim.channel.schemas import ChannelRealization, PaModel
from sddsim.channel.service import calibrate_si_power, si_waveform
from sddsim.commons.logging import logger
from sddsim.semantic_chain.optim import run_sgd
from sddsim.sic.exceptions import SicDivergedException, SicException
from sddsim.sic.model import SicNetwork, delay_features
from sddsim.sic.schemas import (
    Canceller,
    LinearCanceller,
    MemoryPolynomialBasis,
    NetworkBasis,
    NonlinearCanceller,
    SicConfig,
    SicMode,
    SuppressionCurve,
)
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.schemas import ComplexSignal, Flagged
from sddsim.signal_core.service import (
    from_db,
    gaussian,
    memory_polynomial_features,
    power,
)

DIVERGENCE_NORM = 1e6
_NLMS_EPS = 1e-12


def _aligned_tx(known_tx: ComplexSignal, rx: ComplexSignal) -> np.ndarray:
    if len(rx) < len(known_tx):
        raise SicException("rx_shorter_than_tx", f"rx={len(rx)} tx={len(known_tx)}")
    return known_tx.truncated(len(rx)).samples


def convolution_matrix(x: np.ndarray, depth: int) -> np.ndarray:
    """(n, depth) matrix with X[k, l] = x[k - l]."""
    first_row = np.zeros(depth, dtype=np.complex128)
    first_row[0] = x[0] if len(x) else 0
    return scipy.linalg.toeplitz(x, first_row)


def _solve_ls(
    x: np.ndarray, y: np.ndarray, ridge_eps: float
) -> tuple[np.ndarray, bool]:
    if np.linalg.matrix_rank(x) < x.shape[1]:
        logger.warning("sic_ls_rank_deficient: cols=%d ridge=%g", x.shape[1], ridge_eps)
        gram = x.conj().T @ x + ridge_eps * np.eye(x.shape[1])
        return np.linalg.solve(gram, x.conj().T @ y), True
    w, *_ = scipy.linalg.lstsq(x, y)
    return w, False


def ls_fit_linear(
    known_tx: ComplexSignal, rx: ComplexSignal, depth: int, ridge_eps: float = 1e-9
) -> LinearCanceller:
    if depth < 1:
        raise SicException("depth_must_be_positive", f"L={depth}")
    x = _aligned_tx(known_tx, rx)
    if len(known_tx) < 4 * depth:
        raise SicException("insufficient_samples", f"n={len(known_tx)} L={depth}")
    w, flagged = _solve_ls(convolution_matrix(x, depth), rx.samples, ridge_eps)
    return LinearCanceller(w, flagged=flagged)


def _nlms(
    x: np.ndarray, y: np.ndarray, w0: np.ndarray, step_size: float, passes: int
) -> np.ndarray:
    """Normalized LMS over the rows of regressor matrix `x` for y ~ x @ w."""
    w = np.array(w0, dtype=np.complex128)
    energy = np.sum(np.abs(x) ** 2, axis=1) + _NLMS_EPS
    for _ in range(passes):
        for k in range(x.shape[0]):
            u = x[k]
            e = y[k] - u @ w
            w += step_size * e * u.conj() / energy[k]
        norm = float(np.linalg.norm(w))
        if not math.isfinite(norm) or norm > DIVERGENCE_NORM:
            raise SicDivergedException("nlms_diverged", f"tap_norm={norm:.3g}")
    return w


def lms_adapt(
    known_tx: ComplexSignal,
    rx: ComplexSignal,
    depth: int,
    step_size: float = 0.5,
    passes: int = 5,
    init: LinearCanceller | None = None,
) -> LinearCanceller:
    if not 0.0 < step_size < 2.0:
        raise SicException("step_size_out_of_range", f"mu={step_size}")
    if depth < 1 or passes < 0:
        raise SicException("invalid_lms_parameters", f"L={depth} passes={passes}")
    x = convolution_matrix(_aligned_tx(known_tx, rx), depth)
    w0 = np.zeros(depth, dtype=np.complex128)
    if init is not None:
        w0[: min(depth, init.depth)] = init.taps[:depth]
    return LinearCanceller(_nlms(x, rx.samples, w0, step_size, passes))


def _fit_network(
    x: np.ndarray, y: np.ndarray, basis: NetworkBasis, net: SicNetwork | None = None,
    steps: int | None = None,
) -> tuple[SicNetwork, list[float]]:
    gen = torch.Generator().manual_seed(basis.seed)
    if net is None:
        net = SicNetwork(basis, gen)
        net.in_scale = math.sqrt(max(power(ComplexSignal(x)), 1e-300))
        net.out_scale = math.sqrt(max(power(ComplexSignal(y)), 1e-300))
    z = delay_features(x / net.in_scale, basis.memory)
    target = torch.from_numpy(np.stack([y.real, y.imag], axis=1) / net.out_scale)
    n = z.shape[0]

    def loss_fn(step: int) -> torch.Tensor:
        if basis.batch_size is None or basis.batch_size >= n:
            zb, tb = z, target
        else:
            idx = torch.randint(0, n, (basis.batch_size,), generator=gen)
            zb, tb = z[idx], target[idx]
        return ((net(zb) - tb) ** 2).sum(dim=1).mean()

    trace = run_sgd(
        net.parameters(),
        loss_fn,
        basis.steps if steps is None else steps,
        basis.learning_rate,
        state_dump=lambda: {k: v.detach().clone() for k, v in net.state_dict().items()},
        label="sic_network",
    )
    return net, trace


def fit_nonlinear(
    known_tx: ComplexSignal,
    rx: ComplexSignal,
    basis: MemoryPolynomialBasis | NetworkBasis,
    ridge_eps: float = 1e-9,
) -> NonlinearCanceller:
    x = _aligned_tx(known_tx, rx)
    if len(known_tx) < 10 * basis.parameter_count:
        raise SicException(
            "insufficient_samples",
            f"n={len(known_tx)} params={basis.parameter_count}",
        )
    if isinstance(basis, MemoryPolynomialBasis):
        feats = memory_polynomial_features(x, basis.orders, basis.memory)
        coef, flagged = _solve_ls(feats, rx.samples, ridge_eps)
        err = rx.samples - feats @ coef
        p_rx = power(rx)
        nmse = float(np.mean(np.abs(err) ** 2)) / p_rx if p_rx > 0 else 0.0
        return NonlinearCanceller(
            basis, coefficients=coef, loss_trace=(nmse,), flagged=flagged
        )

    net, trace = _fit_network(x, rx.samples, basis)
    return NonlinearCanceller(basis, network=net, loss_trace=tuple(trace))


def predict(c: Canceller | None, known_tx: ComplexSignal, n: int) -> np.ndarray:
    """Reconstructed SI, length `n` (tx zero-extended or cut to n)."""
    x = known_tx.truncated(n).samples
    if c is None:
        return np.zeros(n, dtype=np.complex128)
    if isinstance(c, LinearCanceller):
        return convolution_matrix(x, c.depth) @ c.taps
    if isinstance(c.basis, MemoryPolynomialBasis):
        features = memory_polynomial_features(x, c.basis.orders, c.basis.memory)
        return features @ c.coefficients
    return c.network.predict(x)  # type: ignore[union-attr]


def cancel(
    rx: ComplexSignal, known_tx: ComplexSignal, c: Canceller | None
) -> ComplexSignal:
    """Residual rx - c(known_tx); `None` is the zero canceller."""
    if c is None:
        return rx
    return ComplexSignal(rx.samples - predict(c, known_tx, len(rx)))


def fine_tune(
    c: Canceller,
    known_tx: ComplexSignal,
    rx: ComplexSignal,
    step_size: float = 0.05,
    passes: int = 1,
) -> Canceller:
    """Warm-started online update; returns a new canceller."""
    if passes == 0:
        return c
    if isinstance(c, LinearCanceller):
        return lms_adapt(known_tx, rx, c.depth, step_size, passes, init=c)
    x = _aligned_tx(known_tx, rx)
    if isinstance(c.basis, MemoryPolynomialBasis):
        feats = memory_polynomial_features(x, c.basis.orders, c.basis.memory)
        coef = _nlms(feats, rx.samples, c.coefficients, step_size, passes)
        return NonlinearCanceller(c.basis, coefficients=coef, loss_trace=c.loss_trace)
    net = copy.deepcopy(c.network)
    steps = max(1, passes * c.basis.steps // 10)
    net, trace = _fit_network(x, rx.samples, c.basis, net=net, steps=steps)
    return NonlinearCanceller(
        c.basis, network=net, loss_trace=c.loss_trace + tuple(trace)
    )


def suppression_db(
    rx: ComplexSignal,
    residual: ComplexSignal,
    desired_power: float,
    cap_db: float = 100.0,
) -> Flagged:
    """
    SI power removed, in dB, with the non-SI part `desired_power` (desired
    plus noise) subtracted from both sides. Clamped at `cap_db` (flagged).
    """
    p_rx = power(rx)
    if p_rx <= 0 or desired_power <= 0:
        raise SicException("non_positive_power", f"rx={p_rx} desired={desired_power}")
    numerator = p_rx - desired_power
    if numerator <= 0:
        raise SicException(
            "no_interference_in_rx", f"rx={p_rx} desired={desired_power}"
        )
    floor = numerator * 10.0 ** (-cap_db / 10.0)
    leftover = power(residual) - desired_power
    if leftover <= floor:
        return Flagged(cap_db, True)
    return Flagged(10.0 * math.log10(numerator / leftover))


def fit_canceller(
    mode: SicMode, known_tx: ComplexSignal, rx: ComplexSignal, cfg: SicConfig
) -> Canceller | None:
    """Offline fit for a sic mode; `none` and `perfect` need no canceller."""
    if mode == "linear":
        return ls_fit_linear(known_tx, rx, cfg.linear_depth, cfg.ridge_eps)
    if mode == "lms":
        return lms_adapt(
            known_tx, rx, cfg.linear_depth, cfg.lms_step, cfg.lms_passes
        )
    if mode == "nonlinear":
        return fit_nonlinear(known_tx, rx, cfg.basis, cfg.ridge_eps)
    return None


def calibration_burst(r: RngStream, n: int) -> ComplexSignal:
    """Unit-power complex Gaussian burst; exercises the amplifier nonlinearity."""
    return ComplexSignal(gaussian(r, n))


def characterize_suppression(
    mode: SicMode,
    si_channel: ChannelRealization,
    pa: PaModel | None,
    tx_evm_db: float | None,
    cfg: SicConfig,
    sinr_grid_db: list[float] | tuple[float, ...],
    p_noise: float,
    r: RngStream,
    p_desired: float = 1.0,
) -> SuppressionCurve:
    """
    Digital suppression against pre-digital SINR for one held SI scenario.

    Per grid point: fit on a silent-remote calibration burst, then cancel on
    a fresh burst carrying a unit-power Gaussian desired signal.
    """
    grid = sorted(float(s) for s in sinr_grid_db)
    values = []
    for s in grid:
        si_power = calibrate_si_power(s, p_desired, p_noise)
        if mode in ("none", "perfect") or si_power <= 0:
            values.append(0.0 if mode == "none" else cfg.suppression_cap_db)
            continue
        x_cal = calibration_burst(r, cfg.training_symbols)
        raw_cal = si_waveform(x_cal, si_channel, pa, tx_evm_db, r)
        # one analog gain for the whole scenario, set on the calibration burst
        gain = math.sqrt(si_power / power(raw_cal))
        si_cal = raw_cal.scaled(gain)
        rx_cal = si_cal + ComplexSignal(gaussian(r, len(si_cal), p_noise))
        c = fit_canceller(mode, x_cal, rx_cal, cfg)

        x = calibration_burst(r, cfg.training_symbols)
        si = si_waveform(x, si_channel, pa, tx_evm_db, r).scaled(gain)
        background = ComplexSignal(gaussian(r, len(si), p_desired + p_noise))
        rx = si + background
        residual = cancel(rx, x, c)
        # background power as drawn, not the nominal value
        supp = suppression_db(rx, residual, power(background), cfg.suppression_cap_db)
        values.append(supp.value)
    logger.info("sic_characterized: mode=%s points=%d", mode, len(grid))
    return SuppressionCurve(tuple(grid), tuple(values))


def residual_gain(curve: SuppressionCurve, sinr_db: float) -> float:
    """alpha with alpha^2 = 10^(-suppression/10)."""
    return math.sqrt(from_db(-float(curve.at(sinr_db))))
