"""
Two-way transmission under one duplexing paradigm.

Powers are normalized to the receiver noise floor (noise power 1 per
symbol). Each receiving terminal sees

    rx = sqrt(snr) h_d x_remote + g * SI(x_own) + n

with g set so the SI power meets the target pre-digital SINR (stages 1-2
of the suppression chain collapsed into that calibration). Digital SIC is
fitted offline on a calibration burst sent while the remote is silent,
then applied to the data frame. The receiver equalizes with known CSI.

Randomness is split into independent streams derived from (seed, *stream,
purpose), so paradigms compared on the same stream see identical noise.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from sddsim.baseline_chain.codec import (
    CONCEAL_VALUE,
    decode_from_budget,
    encode_to_budget,
)
from sddsim.baseline_chain.exceptions import CodecException, LdpcException
from sddsim.baseline_chain.ldpc import (
    BASE_COLUMNS,
    build_qc_code,
    decode_batch,
    ldpc_encode,
)
from sddsim.baseline_chain.modulation import qpsk_llr, qpsk_modulate
from sddsim.baseline_chain.schemas import Bitstream, ImagePatch, LdpcCode
from sddsim.channel.exceptions import ChannelDomainException
from sddsim.channel.schemas import ChannelConfig, ChannelRealization
from sddsim.channel.service import (
    calibrate_si_power,
    draw_rayleigh,
    draw_rician,
    link_budget,
    si_waveform,
)
from sddsim.commons.logging import logger
from sddsim.duplex_sim.exceptions import SimConfigException
from sddsim.duplex_sim.schemas import (
    ChainAssets,
    DirectionResult,
    ParadigmConfig,
    SeriesConfig,
    SimResult,
    SweepConfig,
    SweepOutcome,
    SweepRow,
    TerminalMeasurement,
    TwoWayChannel,
)
from sddsim.metrics.schemas import MetricsConfig
from sddsim.metrics.service import ber, ms_ssim, ms_ssim_db, psnr
from sddsim.semantic_chain.schemas import DIRECTION_AB, DIRECTION_BA
from sddsim.semantic_chain.service import jscc_decode, jscc_encode
from sddsim.sic.exceptions import SicException
from sddsim.sic.service import (
    calibration_burst,
    cancel,
    fine_tune,
    fit_canceller,
    predict,
    suppression_db,
)
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.schemas import ComplexSignal, Flagged
from sddsim.signal_core.service import gaussian, power, sinr_db, uniform

# Stream purposes.
_NOISE_AB, _NOISE_BA = 1, 2
_SI_A, _SI_B = 3, 4
_CAL_A, _CAL_B = 5, 6
_TRIAL_CHANNEL = 0xC4A
_TRIAL_PATCH = 0xBA7


# ---- scenario ----------------------------------------------------------------


def _draw_desired(cfg: ChannelConfig, r: RngStream) -> ChannelRealization:
    if cfg.desired_fading == "none":
        return ChannelRealization.identity()
    return draw_rayleigh(r)


def draw_two_way_channel(cfg: ChannelConfig, r: RngStream) -> TwoWayChannel:
    distance = uniform(r, cfg.distance_min_m, cfg.distance_max_m)
    budget = link_budget(cfg.path_loss, distance, cfg.tx_power_dbm, cfg.noise_dbm)
    h_ab = _draw_desired(cfg, r)
    h_ba = h_ab if cfg.reciprocal else _draw_desired(cfg, r)
    return TwoWayChannel(
        distance_m=distance,
        budget=budget,
        h_ab=h_ab,
        h_ba=h_ba,
        si_a=draw_rician(cfg.si_profile, r),
        si_b=draw_rician(cfg.si_profile, r),
    )


def fdd_code(rate: str, symbols: int, seed: int = 2023) -> LdpcCode | None:
    """Largest 12*Z code whose codeword fits `symbols` QPSK symbols."""
    n = (2 * symbols // BASE_COLUMNS) * BASE_COLUMNS
    if n < BASE_COLUMNS:
        return None
    try:
        return build_qc_code(rate, n, seed)
    except LdpcException:
        # k collapses to zero on very short lifts
        return None


def validate_symbol_budget(
    assets: ChainAssets, series: tuple[SeriesConfig, ...]
) -> None:
    """Every SDD and IBFD series must spend the same channel symbols per patch."""
    budgets = {}
    for s in series:
        if s.paradigm == "SDD":
            if assets.model is None:
                raise SimConfigException("missing_model", f"series={s.label}")
            budgets[s.label] = assets.model.spec.k_symbols
        elif s.paradigm == "IBFD":
            code = assets.codes.get(s.ldpc_rate)
            if code is None:
                raise SimConfigException("missing_ldpc_code", f"rate={s.ldpc_rate}")
            if code.n % 2:
                raise SimConfigException("odd_block_length", f"n={code.n}")
            budgets[s.label] = code.n // 2
    if len(set(budgets.values())) > 1:
        raise SimConfigException("unequal_symbol_budgets", str(budgets))


def _check_config(cfg: ParadigmConfig, assets: ChainAssets, patch: ImagePatch) -> None:
    if cfg.paradigm == "SDD":
        if assets.model is None:
            raise SimConfigException("missing_model", "SDD needs a trained JSCC model")
        size = assets.model.spec.patch_size
        if patch.pixels.shape != (size, size):
            raise SimConfigException(
                "patch_size_mismatch", f"{patch.pixels.shape} vs {size}"
            )
    elif cfg.ldpc_rate not in assets.codes:
        raise SimConfigException("missing_ldpc_code", f"rate={cfg.ldpc_rate}")


# ---- chains ------------------------------------------------------------------


class _BaselineTx:
    def __init__(self, patch: ImagePatch, code: LdpcCode | None, quality: int):
        self.code = code
        self.quality = quality
        self.info: Bitstream | None = None
        self.symbols = ComplexSignal.zeros(0)
        if code is None:
            return
        try:
            stream = encode_to_budget(patch, quality, code.k).stream
        except CodecException:
            self.code = None
            return
        self.info = stream
        self.symbols = qpsk_modulate(ldpc_encode(stream, code))


def _concealed(patch: ImagePatch) -> ImagePatch:
    return ImagePatch.filled(patch.height, patch.width, CONCEAL_VALUE)


def _direction_result(
    original: ImagePatch,
    recon: ImagePatch,
    failed: bool,
    bit_error: float | None,
    mc: MetricsConfig,
) -> DirectionResult:
    v = ms_ssim(original, recon, mc.ms_ssim_config(original.height, original.width))
    return DirectionResult(
        ms_ssim=v,
        ms_ssim_db=ms_ssim_db(v, mc.ms_ssim_db_cap).value,
        psnr=psnr(original, recon, mc.psnr_cap_db).value,
        ber=bit_error,
        failed=failed,
        reconstruction=recon,
    )


def _baseline_rx(
    tx: _BaselineTx,
    y_eq: np.ndarray,
    noise_var: float,
    original: ImagePatch,
    assets: ChainAssets,
) -> DirectionResult:
    mc = assets.metrics
    if tx.code is None or tx.info is None:
        return _direction_result(original, _concealed(original), True, None, mc)
    llrs = qpsk_llr(ComplexSignal(y_eq[: tx.code.n // 2]), noise_var)
    cw, converged, _ = decode_batch(
        llrs.values[None, :], tx.code, assets.duplex.bp_max_iter
    )
    info = Bitstream(cw[0, tx.code.info_cols])
    decoded = decode_from_budget(info, tx.quality, original.width, original.height)
    failed = bool(decoded.failed or not converged[0])
    recon = _concealed(original) if failed else decoded.patch
    return _direction_result(original, recon, failed, ber(tx.info, info), mc)


def _sdd_result(
    original: ImagePatch, recon: ImagePatch, assets: ChainAssets
) -> DirectionResult:
    res = _direction_result(original, recon, False, None, assets.metrics)
    return replace(res, failed=res.ms_ssim < assets.duplex.sdd_outage_ms_ssim)


# ---- one receiving terminal --------------------------------------------------


def _receive(
    cfg: ParadigmConfig,
    channel_cfg: ChannelConfig,
    assets: ChainAssets,
    snr: float,
    h_d: complex,
    si_channel: ChannelRealization,
    x_remote: ComplexSignal,
    x_own: ComplexSignal,
    r_noise: RngStream,
    r_si: RngStream,
    r_cal: RngStream,
) -> tuple[np.ndarray, float, TerminalMeasurement]:
    """Equalized symbols, effective noise variance, and stage measurements."""
    amp = math.sqrt(snr) * h_d
    desired = x_remote.scaled(amp)
    p_desired = snr * abs(h_d) ** 2
    with_si = cfg.paradigm != "FDD_TDD" and len(x_own) > 0
    n_rx = len(x_remote)
    if with_si:
        n_rx = max(n_rx, len(x_own) + si_channel.max_delay)
    noise = ComplexSignal(gaussian(r_noise, n_rx))
    clean = desired.truncated(n_rx) + noise
    sinr_free = sinr_db(p_desired, 0.0, 1.0) if p_desired > 0 else -math.inf

    if not with_si:
        m = TerminalMeasurement(sinr_free, sinr_free, 0.0)
        return _equalize(clean, amp, len(x_remote)), 1.0 / max(p_desired, 1e-300), m

    try:
        si_power = calibrate_si_power(cfg.pre_digital_sinr_db, p_desired, 1.0)
    except ChannelDomainException as exc:
        logger.warning("si_calibration_unreachable: %s (%s)", exc.message, exc.details)
        si_power = 0.0

    sic = assets.sic
    x_cal = calibration_burst(r_cal, sic.training_symbols)
    pa, evm = channel_cfg.pa, channel_cfg.tx_evm_db
    si_cal_raw = si_waveform(x_cal, si_channel, pa, evm, r_cal)
    gain = math.sqrt(si_power / power(si_cal_raw)) if power(si_cal_raw) > 0 else 0.0
    si_cal = si_cal_raw.scaled(gain)
    si = si_waveform(x_own, si_channel, pa, evm, r_si).scaled(gain)
    si = si.truncated(n_rx)
    rx = clean + si

    if cfg.sic_mode == "perfect":
        residual, leftover = clean, ComplexSignal.zeros(n_rx)
        noise_var = 1.0 / max(p_desired, 1e-300)
    else:
        rx_cal = si_cal + ComplexSignal(gaussian(r_cal, len(si_cal)))
        canceller = fit_canceller(cfg.sic_mode, x_cal, rx_cal, sic)
        if canceller is not None and assets.duplex.online_fine_tune:
            canceller = fine_tune(
                canceller, x_own, rx, sic.fine_tune_step, sic.fine_tune_passes
            )
        residual = cancel(rx, x_own, canceller)
        leftover = ComplexSignal(si.samples - predict(canceller, x_own, n_rx))
        # interference-plus-noise estimate from the calibration residual
        cal_res = power(cancel(rx_cal, x_cal, canceller))
        noise_var = max(cal_res, 1.0) / max(p_desired, 1e-300)

    try:
        supp = suppression_db(rx, residual, power(clean), sic.suppression_cap_db)
    except SicException:
        # SI below the noise cross-terms: nothing measurable was removed
        supp = Flagged(0.0)
    p_des_meas = max(power(desired), 1e-300)
    m = TerminalMeasurement(
        sinr_pre_digital_db=sinr_db(p_des_meas, power(si), 1.0),
        sinr_post_digital_db=sinr_db(p_des_meas, power(leftover), 1.0),
        digital_suppression_db=supp.value,
        suppression_flagged=supp.flagged,
    )
    return _equalize(residual, amp, len(x_remote)), noise_var, m


def _equalize(y: ComplexSignal, amp: complex, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    if amp == 0:
        return np.zeros(n, dtype=np.complex128)
    return y.samples[:n] / amp


# ---- run ---------------------------------------------------------------------


def run_two_way(
    cfg: ParadigmConfig,
    patch_ab: ImagePatch,
    patch_ba: ImagePatch,
    channel_cfg: ChannelConfig,
    link: TwoWayChannel,
    assets: ChainAssets,
    seed: int,
    stream: tuple[int, ...] = (0,),
) -> SimResult:
    started = time.perf_counter()
    _check_config(cfg, assets, patch_ab)
    _check_config(cfg, assets, patch_ba)
    snr = link.budget.rx_power / link.budget.noise_power

    def rng(purpose: int) -> RngStream:
        return RngStream.derive(seed, *stream, purpose)

    h_ab, h_ba = link.h_ab.taps[0][1], link.h_ba.taps[0][1]

    if cfg.paradigm == "SDD":
        model = assets.model
        assert model is not None
        x_a = jscc_encode(patch_ab, DIRECTION_AB, model)
        x_b = jscc_encode(patch_ba, DIRECTION_BA, model)
        y_b, _, at_b = _receive(
            cfg, channel_cfg, assets, snr, h_ab, link.si_b, x_a, x_b,
            rng(_NOISE_AB), rng(_SI_B), rng(_CAL_B),
        )
        y_a, _, at_a = _receive(
            cfg, channel_cfg, assets, snr, h_ba, link.si_a, x_b, x_a,
            rng(_NOISE_BA), rng(_SI_A), rng(_CAL_A),
        )
        rec_ab = jscc_decode(ComplexSignal(y_b), DIRECTION_AB, model)
        rec_ba = jscc_decode(ComplexSignal(y_a), DIRECTION_BA, model)
        ab = _sdd_result(patch_ab, rec_ab, assets)
        ba = _sdd_result(patch_ba, rec_ba, assets)
    else:
        code = assets.codes[cfg.ldpc_rate]
        if cfg.paradigm == "FDD_TDD":
            total = code.n // 2
            n_ab = math.floor(cfg.resource_split_alpha * total)
            code_ab = fdd_code(cfg.ldpc_rate, n_ab, assets.ldpc_seed)
            code_ba = fdd_code(cfg.ldpc_rate, total - n_ab, assets.ldpc_seed)
        else:
            code_ab = code_ba = code
        tx_a = _BaselineTx(patch_ab, code_ab, cfg.codec_quality)
        tx_b = _BaselineTx(patch_ba, code_ba, cfg.codec_quality)
        y_b, nv_b, at_b = _receive(
            cfg, channel_cfg, assets, snr, h_ab, link.si_b, tx_a.symbols, tx_b.symbols,
            rng(_NOISE_AB), rng(_SI_B), rng(_CAL_B),
        )
        y_a, nv_a, at_a = _receive(
            cfg, channel_cfg, assets, snr, h_ba, link.si_a, tx_b.symbols, tx_a.symbols,
            rng(_NOISE_BA), rng(_SI_A), rng(_CAL_A),
        )
        ab = _baseline_rx(tx_a, y_b, nv_b, patch_ab, assets)
        ba = _baseline_rx(tx_b, y_a, nv_a, patch_ba, assets)

    return SimResult(
        paradigm=cfg.paradigm,
        sic_mode=cfg.sic_mode,
        ab=ab,
        ba=ba,
        at_b=at_b,
        at_a=at_a,
        seed=seed,
        stream=tuple(stream),
        runtime_s=time.perf_counter() - started,
    )


# ---- sweep -------------------------------------------------------------------


def _paradigm_cfg(s: SeriesConfig, sinr: float, assets: ChainAssets) -> ParadigmConfig:
    return ParadigmConfig(
        paradigm=s.paradigm,
        resource_split_alpha=s.resource_split_alpha,
        sic_mode=s.sic_mode,
        pre_digital_sinr_db=sinr,
        ldpc_rate=s.ldpc_rate,
        codec_quality=assets.codec.for_rate(s.ldpc_rate),
    )


def _aggregate(s: SeriesConfig, sinr: float, results: list[SimResult]) -> SweepRow:
    directions = [d for res in results for d in (res.ab, res.ba)]
    values = np.array([d.ms_ssim for d in directions])
    stderr = 0.0
    if len(values) > 1:
        stderr = float(values.std(ddof=1) / math.sqrt(len(values)))
    bers = [d.ber for d in directions if d.ber is not None]
    return SweepRow(
        series=s.label,
        paradigm=s.paradigm,
        sic_mode=s.sic_mode,
        sinr_db=float(sinr),
        trials=len(results),
        ms_ssim_mean=float(values.mean()),
        ms_ssim_stderr=stderr,
        ms_ssim_db_mean=float(np.mean([d.ms_ssim_db for d in directions])),
        ber_mean=float(np.mean(bers)) if bers and s.paradigm != "SDD" else None,
        failure_rate=float(np.mean([d.failed for d in directions])),
        suppression_db_mean=float(np.mean([r.digital_suppression_db for r in results])),
    )


def trial_inputs(
    corpus_ab: list[ImagePatch],
    corpus_ba: list[ImagePatch],
    channel_cfg: ChannelConfig,
    trials: int,
    seed: int,
) -> list[tuple[ImagePatch, ImagePatch, TwoWayChannel]]:
    """Per-trial patches and channels, shared by every series and SINR point."""
    if not corpus_ab or not corpus_ba:
        raise SimConfigException("empty_corpus")
    out = []
    for t in range(trials):
        pick = RngStream.derive(seed, _TRIAL_PATCH, t).generator
        patch_ab = corpus_ab[int(pick.integers(0, len(corpus_ab)))]
        patch_ba = corpus_ba[int(pick.integers(0, len(corpus_ba)))]
        link_rng = RngStream.derive(seed, _TRIAL_CHANNEL, t)
        link = draw_two_way_channel(channel_cfg, link_rng)
        out.append((patch_ab, patch_ba, link))
    return out


def sweep(
    sweep_cfg: SweepConfig,
    corpus_ab: list[ImagePatch],
    corpus_ba: list[ImagePatch],
    channel_cfg: ChannelConfig,
    assets: ChainAssets,
    seed: int,
) -> SweepOutcome:
    """
    Rows ordered by (series order, ascending SINR). Trials may run on a
    thread pool; results are reduced in submission order, so the output does
    not depend on `workers`.
    """
    validate_symbol_budget(assets, sweep_cfg.series)
    inputs = trial_inputs(corpus_ab, corpus_ba, channel_cfg, sweep_cfg.trials, seed)
    sinrs = sorted(sweep_cfg.sinr_db)

    tasks = []
    for i, s in enumerate(sweep_cfg.series):
        for j, sinr in enumerate(sinrs):
            cfg = _paradigm_cfg(s, sinr, assets)
            for t, (pa, pb, link) in enumerate(inputs):
                tasks.append((cfg, pa, pb, link, (i, j, t)))

    def run(task) -> SimResult:
        cfg, pa, pb, link, stream = task
        return run_two_way(cfg, pa, pb, channel_cfg, link, assets, seed, stream)

    if sweep_cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=sweep_cfg.workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(task) for task in tasks]

    rows, samples = [], {}
    per_point = sweep_cfg.trials
    for i, s in enumerate(sweep_cfg.series):
        for j, sinr in enumerate(sinrs):
            start = (i * len(sinrs) + j) * per_point
            chunk = results[start : start + per_point]
            rows.append(_aggregate(s, sinr, chunk))
            samples[(s.label, float(sinr))] = chunk[0]
            logger.info(
                "sweep_point_done: series=%s sinr_db=%.1f ms_ssim=%.4f failures=%.3f",
                s.label,
                sinr,
                rows[-1].ms_ssim_mean,
                rows[-1].failure_rate,
            )
    return SweepOutcome(rows=rows, samples=samples)
