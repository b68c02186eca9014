"""
Experiment commands behind the CLI.

Each `cmd_*` takes a resolved `ExperimentConfig`, writes its artifacts and
the run metadata (resolved config, version, seed) into `cfg.out_dir`, and
returns a small outcome object for the caller to report.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from sddsim.baseline_chain.ldpc import build_qc_code
from sddsim.baseline_chain.repository import read_alist
from sddsim.baseline_chain.schemas import ImagePatch, LdpcCode
from sddsim.channel.service import link_budget
from sddsim.commons.logging import logger
from sddsim.duplex_sim.schemas import (
    ChainAssets,
    ParadigmConfig,
    SimResult,
    SweepConfig,
    SweepRow,
)
from sddsim.duplex_sim.service import (
    draw_two_way_channel,
    run_two_way,
    sweep,
    trial_inputs,
)
from sddsim.feasibility.schemas import PARADIGMS, Paradigm, RegionBoundary
from sddsim.feasibility.service import dominates, empirical_efficiency, feasible_region
from sddsim.harness import charts
from sddsim.harness.exceptions import ConfigException, CorpusException
from sddsim.harness.repository import (
    load_corpus,
    read_csv,
    write_csv,
    write_pgm,
    write_run_metadata,
)
from sddsim.harness.schemas import Corpus, ExperimentConfig
from sddsim.semantic_chain.model import JsccModel
from sddsim.semantic_chain.repository import load_model, save_model
from sddsim.semantic_chain.service import direction_separability
from sddsim.semantic_chain.trainer import build_training_channel, train_jscc
from sddsim.signal_core.rng import RngStream

MODEL_FILE = "model.sddj"
SWEEP_COLUMNS = [
    "series",
    "paradigm",
    "sic_mode",
    "sinr_db",
    "trials",
    "ms_ssim_mean",
    "ms_ssim_stderr",
    "ms_ssim_db_mean",
    "ber_mean",
    "failure_rate",
    "suppression_db_mean",
]
REGION_COLUMNS = ["paradigm", "f_ab", "f_ba"]
SEPARABILITY_COLUMNS = ["statistic", "value"]
_DEMO_STREAM = 0xDE40


@dataclass(frozen=True)
class TrainOutcome:
    model_path: Path
    loss_csv: Path
    steps: int
    final_loss: float | None
    separability: dict[str, float]


@dataclass(frozen=True)
class SweepOutput:
    rows: list[SweepRow]
    csv_path: Path
    svg_path: Path


@dataclass(frozen=True)
class RegionOutcome:
    boundaries: dict[Paradigm, RegionBoundary]
    nested: bool
    csv_path: Path


# ---- assets ------------------------------------------------------------------


def model_path(cfg: ExperimentConfig) -> Path:
    return Path(cfg.model_path) if cfg.model_path else Path(cfg.out_dir) / MODEL_FILE


def build_codes(cfg: ExperimentConfig) -> dict[str, LdpcCode]:
    codes = {}
    for rate in cfg.ldpc.rates:
        if rate in cfg.ldpc.alist:
            codes[rate] = read_alist(cfg.ldpc.alist[rate])
        else:
            codes[rate] = build_qc_code(rate, cfg.ldpc.block_length, cfg.ldpc.seed)
    return codes


def build_assets(cfg: ExperimentConfig, model: JsccModel | None) -> ChainAssets:
    return ChainAssets(
        codes=build_codes(cfg),
        sic=cfg.sic,
        duplex=cfg.duplex,
        model=model,
        codec=cfg.codec,
        metrics=cfg.metrics,
        ldpc_seed=cfg.ldpc.seed,
    )


def _load_corpus(cfg: ExperimentConfig) -> Corpus:
    return load_corpus(cfg.corpus_dir, cfg.patch_size, cfg.eval_fraction)


def _eval_patches(corpus: Corpus) -> list[ImagePatch]:
    patches = corpus.select("eval")
    if not patches:
        logger.warning("corpus_eval_split_empty: using all %d patches", len(corpus))
        return list(corpus.patches)
    return patches


def _direction_corpora(
    patches: list[ImagePatch],
) -> tuple[list[ImagePatch], list[ImagePatch]]:
    """Alternate files between A->B and B->A; a single patch feeds both."""
    if len(patches) < 2:
        return patches, patches
    return patches[0::2], patches[1::2]


# ---- train -------------------------------------------------------------------


def cmd_train(cfg: ExperimentConfig) -> TrainOutcome:
    corpus = _load_corpus(cfg)
    patches = corpus.select("train")
    if not patches:
        raise CorpusException("empty_train_split", f"{len(corpus)} files, all held out")
    channel = build_training_channel(cfg.channel, cfg.sic, cfg.train)
    model, trace = train_jscc(patches, channel, cfg.train, cfg.jscc)

    out = write_run_metadata(cfg.out_dir, cfg)
    path = save_model(model_path(cfg), model)
    loss_csv = write_csv(
        out / "train_loss.csv", ["step", "loss"], [[i, v] for i, v in enumerate(trace)]
    )
    logger.info("model_written: path=%s params=%d", path, model.parameter_count())

    # held-out patches when there are any
    stats = direction_separability(model, _eval_patches(corpus))
    write_csv(
        out / "separability.csv",
        SEPARABILITY_COLUMNS,
        [[k, v] for k, v in stats.items()],
    )
    logger.info(
        "direction_separability: inter=%.4f intra=%.4f",
        stats["inter_direction_mean"],
        stats["intra_direction_mean"],
    )
    final = trace[-1] if trace else None
    return TrainOutcome(path, loss_csv, len(trace), final, stats)


# ---- sweep -------------------------------------------------------------------


def _row_values(r: SweepRow) -> list:
    return [
        r.series,
        r.paradigm,
        r.sic_mode,
        r.sinr_db,
        r.trials,
        r.ms_ssim_mean,
        r.ms_ssim_stderr,
        r.ms_ssim_db_mean,
        r.ber_mean,
        r.failure_rate,
        r.suppression_db_mean,
    ]


def _dump_result(out: Path, result: SimResult, pa: ImagePatch, pb: ImagePatch) -> None:
    write_pgm(out / "ab_original.pgm", pa)
    write_pgm(out / "ba_original.pgm", pb)
    # unrecovered baseline patches are written black
    baseline = result.paradigm != "SDD"
    for name, d in (("ab", result.ab), ("ba", result.ba)):
        black = baseline and d.failed
        write_pgm(out / f"{name}_decoded.pgm", d.reconstruction, black=black)


def cmd_sweep(
    cfg: ExperimentConfig, dump_images: bool = False, paradigm: str | None = None
) -> SweepOutput:
    series = tuple(
        s for s in cfg.sweep.series if paradigm is None or s.paradigm == paradigm
    )
    if not series:
        raise ConfigException("no_series_selected", f"paradigm={paradigm}")
    sweep_cfg = SweepConfig(
        sinr_db=cfg.sweep.sinr_db,
        trials=cfg.sweep.trials,
        series=series,
        workers=cfg.sweep.workers,
    )
    model = (
        load_model(model_path(cfg), cfg.jscc)
        if any(s.paradigm == "SDD" for s in series)
        else None
    )
    corpus_ab, corpus_ba = _direction_corpora(_eval_patches(_load_corpus(cfg)))
    assets = build_assets(cfg, model)
    outcome = sweep(sweep_cfg, corpus_ab, corpus_ba, cfg.channel, assets, cfg.seed)

    out = write_run_metadata(cfg.out_dir, cfg)
    csv_path = write_csv(
        out / "sweep.csv", SWEEP_COLUMNS, [_row_values(r) for r in outcome.rows]
    )
    svg_path = out / "sweep.svg"
    svg_path.write_text(charts.sweep_chart(read_csv(csv_path)), encoding="utf-8")
    logger.info("sweep_written: rows=%d csv=%s", len(outcome.rows), csv_path)

    if dump_images:
        pa, pb, _ = trial_inputs(corpus_ab, corpus_ba, cfg.channel, 1, cfg.seed)[0]
        for (label, sinr), result in outcome.samples.items():
            _dump_result(out / "images" / label / f"sinr_{sinr:+.1f}", result, pa, pb)
    return SweepOutput(outcome.rows, csv_path, svg_path)


# ---- region ------------------------------------------------------------------


def cmd_region(cfg: ExperimentConfig) -> RegionOutcome:
    fc = cfg.feasibility
    cc = cfg.channel
    budget_ab, budget_ba = (
        link_budget(cc.path_loss, d, cc.tx_power_dbm, cc.noise_dbm)
        for d in (fc.distance_ab_m, fc.distance_ba_m)
    )
    etas: dict[Paradigm, float] = {}
    if fc.mode == "empirical":
        if not fc.empirical_csv:
            raise ConfigException(
                "empirical_csv_missing", "feasibility.mode = empirical"
            )
        etas = empirical_efficiency(read_csv(fc.empirical_csv))

    boundaries = {
        p: feasible_region(
            p,
            budget_ab,
            budget_ba,
            fc.efficiency,
            fc.source_rate_ab,
            fc.source_rate_ba,
            fc.n_points,
            eta=etas.get(p),
        )
        for p in PARADIGMS
    }
    nested = dominates(boundaries["SDD"], boundaries["IBFD"]) and dominates(
        boundaries["IBFD"], boundaries["FDD_TDD"]
    )
    out = write_run_metadata(cfg.out_dir, cfg)
    rows = [[p, v.f_ab, v.f_ba] for p in PARADIGMS for v in boundaries[p].vertices]
    csv_path = write_csv(out / "region.csv", REGION_COLUMNS, rows)
    svg = charts.region_chart(read_csv(csv_path))
    (out / "region.svg").write_text(svg, encoding="utf-8")
    log = logger.info if nested else logger.error
    log("region_nesting: nested=%s mode=%s", nested, fc.mode)
    return RegionOutcome(boundaries, nested, csv_path)


# ---- demo --------------------------------------------------------------------


def cmd_demo(
    cfg: ExperimentConfig, paradigm: str = "SDD", dump_images: bool = False
) -> SimResult:
    """One two-way exchange at `duplex.demo_sinr_db`; PGM dumps on request."""
    match = [s for s in cfg.sweep.series if s.paradigm == paradigm]
    s = match[0] if match else None
    pc = ParadigmConfig(
        paradigm=paradigm,  # type: ignore[arg-type]
        pre_digital_sinr_db=cfg.duplex.demo_sinr_db,
        sic_mode=s.sic_mode if s else "nonlinear",
        ldpc_rate=s.ldpc_rate if s else "1/3",
        resource_split_alpha=s.resource_split_alpha if s else 0.5,
        codec_quality=cfg.codec.for_rate(s.ldpc_rate if s else "1/3"),
    )
    model = load_model(model_path(cfg), cfg.jscc) if paradigm == "SDD" else None
    corpus_ab, corpus_ba = _direction_corpora(_eval_patches(_load_corpus(cfg)))
    pick = RngStream.derive(cfg.seed, _DEMO_STREAM).generator
    pa = corpus_ab[int(pick.integers(0, len(corpus_ab)))]
    pb = corpus_ba[int(pick.integers(0, len(corpus_ba)))]
    link_rng = RngStream.derive(cfg.seed, _DEMO_STREAM, 1)
    link = draw_two_way_channel(cfg.channel, link_rng)
    result = run_two_way(
        pc,
        pa,
        pb,
        cfg.channel,
        link,
        build_assets(cfg, model),
        cfg.seed,
        (_DEMO_STREAM,),
    )

    out = write_run_metadata(cfg.out_dir, cfg)
    header = [
        "direction", "ms_ssim", "ms_ssim_db", "psnr", "ber", "failed",
        "sinr_pre_digital_db", "sinr_post_digital_db", "suppression_db",
    ]
    rows = [
        [name, d.ms_ssim, d.ms_ssim_db, d.psnr, d.ber, d.failed,
         m.sinr_pre_digital_db, m.sinr_post_digital_db, m.digital_suppression_db]
        for name, d, m in (
            ("ab", result.ab, result.at_b),
            ("ba", result.ba, result.at_a),
        )
    ]
    write_csv(out / "demo.csv", header, rows)
    if dump_images:
        _dump_result(out / "images" / paradigm, result, pa, pb)
    return result
