from __future__ import annotations

from pathlib import Path

import pytest  # type: ignore[import-not-found]

from sddsim.harness.cli import (
    EXIT_NOT_FOUND,
    EXIT_OK,
    EXIT_UNPROCESSABLE,
    main,
)
from sddsim.harness.exceptions import ConfigException
from sddsim.harness.repository import (
    RESOLVED_CONFIG,
    load_config,
    parse_config,
    read_csv,
)
from sddsim.harness.service import (
    MODEL_FILE,
    REGION_COLUMNS,
    SEPARABILITY_COLUMNS,
    SWEEP_COLUMNS,
    cmd_region,
    cmd_sweep,
    cmd_train,
)

REFERENCE = Path(__file__).resolve().parents[2] / "configs" / "reference.toml"

# Every in-band chain spends 192 symbols: k_symbols == 384 / 2.
TINY = """
corpus_dir = "{corpus}"
out_dir = "{out}"
eval_fraction = 0.0

[sic]
training_symbols = 512

[jscc]
k_symbols = 192
hidden = [32]
cond_dim = 4

[train]
steps = 3
batch_size = 2

[sweep]
sinr_db = [-40.0]
trials = 1
"""


@pytest.fixture()
def tiny_config(tmp_path, corpus_dir) -> Path:
    path = tmp_path / "tiny.toml"
    text = TINY.format(corpus=corpus_dir.as_posix(), out=(tmp_path / "out").as_posix())
    path.write_text(text, encoding="utf-8")
    return path


# ---- region ------------------------------------------------------------------


def test_region_default_config_is_nested(tmp_path):
    outcome = cmd_region(parse_config(f'out_dir = "{(tmp_path / "r").as_posix()}"'))
    assert outcome.nested
    rows = read_csv(outcome.csv_path)
    assert list(rows[0]) == REGION_COLUMNS
    assert len(rows) == 3 * 11
    assert [r["paradigm"] for r in rows[::11]] == ["FDD_TDD", "IBFD", "SDD"]
    assert (tmp_path / "r" / "region.svg").is_file()
    assert (tmp_path / "r" / RESOLVED_CONFIG).is_file()


def test_region_empirical_mode_needs_csv(tmp_path):
    cfg = parse_config(
        f'out_dir = "{tmp_path.as_posix()}"\n[feasibility]\nmode = "empirical"\n'
    )
    with pytest.raises(ConfigException, match="empirical_csv_missing"):
        cmd_region(cfg)


def test_cli_region(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("", encoding="utf-8")
    code = main(["region", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    assert "nested=True" in capsys.readouterr().out
    assert (tmp_path / "o" / "region.csv").is_file()


def test_cli_missing_config(tmp_path, capsys):
    code = main(["region", "--config", str(tmp_path / "absent.toml")])
    assert code == EXIT_NOT_FOUND
    assert "config_not_found" in capsys.readouterr().err


def test_cli_invalid_config(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[channel]\nbogus = 1\n", encoding="utf-8")
    code = main(["region", "--config", str(cfg)])
    assert code == EXIT_UNPROCESSABLE
    assert "invalid_config" in capsys.readouterr().err


def test_cli_seed_override(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("", encoding="utf-8")
    out = tmp_path / "o"
    argv = ["region", "--config", str(cfg), "--out", str(out), "--seed", "31"]
    assert main(argv) == EXIT_OK
    assert (out / "SEED").read_text(encoding="utf-8") == "31\n"


def test_cli_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["launch"])


# ---- train / sweep / demo ----------------------------------------------------


def test_sweep_without_model_is_not_found(tiny_config, capsys):
    assert main(["sweep", "--config", str(tiny_config)]) == EXIT_NOT_FOUND
    capsys.readouterr()


def test_sweep_paradigm_filter_without_match(tiny_config):
    only_ibfd = {"sweep": {"series": [{"label": "IBFD", "paradigm": "IBFD"}]}}
    cfg = load_config(tiny_config, only_ibfd)
    with pytest.raises(ConfigException, match="no_series_selected"):
        cmd_sweep(cfg, paradigm="SDD")


def test_train_sweep_demo(tiny_config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["train", "--config", str(tiny_config)]) == EXIT_OK
    assert (out / MODEL_FILE).is_file()
    losses = read_csv(out / "train_loss.csv")
    assert [r["step"] for r in losses] == ["0", "1", "2"]
    sep = read_csv(out / "separability.csv")
    assert list(sep[0]) == SEPARABILITY_COLUMNS
    assert [r["statistic"] for r in sep] == [
        "inter_direction_mean",
        "intra_direction_mean",
    ]
    assert all(float(r["value"]) >= 0.0 for r in sep)

    assert main(["sweep", "--config", str(tiny_config), "--dump-images"]) == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert list(rows[0]) == SWEEP_COLUMNS
    assert [r["series"] for r in rows] == ["SDD", "IBFD", "IBFD_PERFECT_SIC"]
    assert all(r["trials"] == "1" for r in rows)
    assert (out / "sweep.svg").is_file()
    assert (out / "images" / "SDD" / "sinr_-40.0" / "ab_decoded.pgm").is_file()

    demo_args = ["demo", "--config", str(tiny_config), "--paradigm", "IBFD"]
    assert main(demo_args) == EXIT_OK
    demo = read_csv(out / "demo.csv")
    assert [r["direction"] for r in demo] == ["ab", "ba"]
    assert not (out / "images" / "IBFD" / "ba_original.pgm").exists()
    assert "demo: IBFD" in capsys.readouterr().out

    assert main([*demo_args, "--dump-images"]) == EXIT_OK
    assert (out / "images" / "IBFD" / "ba_original.pgm").is_file()
    assert (out / "images" / "IBFD" / "ab_decoded.pgm").is_file()


def test_train_is_reproducible(tiny_config, tmp_path):
    a = load_config(tiny_config, {"out_dir": (tmp_path / "a").as_posix()})
    b = load_config(tiny_config, {"out_dir": (tmp_path / "b").as_posix()})
    ta, tb = cmd_train(a), cmd_train(b)
    assert ta.model_path.read_bytes() == tb.model_path.read_bytes()
    assert ta.loss_csv.read_bytes() == tb.loss_csv.read_bytes()


# ---- reference scenario ------------------------------------------------------


@pytest.mark.slow
def test_reference_scenario(tmp_path):
    corpus = (REFERENCE.parent.parent / "corpus").as_posix()
    overrides = {
        "corpus_dir": corpus,
        "out_dir": (tmp_path / "ref").as_posix(),
        "train": {"steps": 600},
        "sweep": {"sinr_db": [-50.0, -30.0], "trials": 4},
    }
    cfg = load_config(REFERENCE, overrides)
    trained = cmd_train(cfg)
    assert trained.final_loss is not None
    first = cmd_sweep(cfg)
    by_key = {(r.series, r.sinr_db): r for r in first.rows}
    # perfect cancellation leaves nothing that depends on the SI level
    perfect = [by_key[("IBFD_PERFECT_SIC", s)] for s in (-50.0, -30.0)]
    assert perfect[0].ms_ssim_mean == pytest.approx(perfect[1].ms_ssim_mean, abs=1e-6)
    sdd = [by_key[("SDD", s)].ms_ssim_mean for s in (-50.0, -30.0)]
    assert sdd[1] >= sdd[0] - 0.05

    parallel = load_config(
        REFERENCE,
        {
            **overrides,
            "out_dir": (tmp_path / "par").as_posix(),
            "model_path": str(trained.model_path),
            "sweep": {**overrides["sweep"], "workers": 2},
        },
    )
    second = cmd_sweep(parallel)
    assert second.csv_path.read_bytes() == first.csv_path.read_bytes()
