"""
sdd-sim command line.

    sdd-sim train  --config configs/reference.toml
    sdd-sim sweep  --config configs/reference.toml [--dump-images] [--paradigm SDD]
    sdd-sim region --config configs/reference.toml
    sdd-sim demo   --config configs/reference.toml --paradigm IBFD [--dump-images]

Exit codes: 0 ok, 1 unexpected service error, 2 invalid input or domain
error, 3 missing file, 4 feasible regions not nested.
"""

from __future__ import annotations

import argparse
import sys

from sddsim.commons.exceptions import (
    BaseServiceException,
    BaseServiceNotFoundException,
    BaseServiceUnProcessableException,
)
from sddsim.commons.logging import logger
from sddsim.feasibility.schemas import PARADIGMS
from sddsim.harness.repository import load_config
from sddsim.harness.service import cmd_demo, cmd_region, cmd_sweep, cmd_train

DEFAULT_CONFIG = "configs/reference.toml"

EXIT_OK = 0
EXIT_SERVICE = 1
EXIT_UNPROCESSABLE = 2
EXIT_NOT_FOUND = 3
EXIT_NOT_NESTED = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdd-sim")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(name: str, help_text: str) -> argparse.ArgumentParser:
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", default=DEFAULT_CONFIG, help="Experiment TOML file.")
        s.add_argument("--seed", type=int, help="Override the master seed.")
        s.add_argument("--out", default=None, help="Override the output directory.")
        return s

    common("train", "Train the JSCC model and write it with its loss curve.")
    s = common("sweep", "Sweep pre-digital SINR for every configured series.")
    s.add_argument(
        "--dump-images", action="store_true", help="Write PGM reconstructions."
    )
    s.add_argument("--paradigm", choices=PARADIGMS, help="Only this paradigm.")
    common("region", "Compute feasible-region boundaries and check their nesting.")
    s = common("demo", "One two-way exchange at the demo SINR.")
    s.add_argument("--paradigm", choices=PARADIGMS, default="SDD")
    s.add_argument(
        "--dump-images", action="store_true", help="Write PGM originals and decodes."
    )
    return p


def _overrides(args: argparse.Namespace) -> dict:
    out: dict = {}
    if args.seed is not None:
        out["seed"] = args.seed
        if args.cmd == "train":
            out["train"] = {"seed": args.seed}
    if args.out is not None:
        out["out_dir"] = args.out
    return out


def _run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _overrides(args))
    if args.cmd == "train":
        t = cmd_train(cfg)
        print(f"model: {t.model_path} steps={t.steps} final_loss={t.final_loss}")
        return EXIT_OK
    if args.cmd == "sweep":
        s = cmd_sweep(cfg, dump_images=args.dump_images, paradigm=args.paradigm)
        print(f"sweep: {s.csv_path} rows={len(s.rows)}")
        return EXIT_OK
    if args.cmd == "region":
        r = cmd_region(cfg)
        print(f"region: {r.csv_path} nested={r.nested}")
        if not r.nested:
            print(
                "error: feasible regions not nested (SDD >= IBFD >= FDD_TDD)",
                file=sys.stderr,
            )
            return EXIT_NOT_NESTED
        return EXIT_OK
    res = cmd_demo(cfg, paradigm=args.paradigm, dump_images=args.dump_images)
    print(
        f"demo: {res.paradigm} ms_ssim ab={res.ab.ms_ssim:.4f} ba={res.ba.ms_ssim:.4f} "
        f"failed ab={res.ab.failed} ba={res.ba.failed}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except BaseServiceNotFoundException as exc:
        code, err = EXIT_NOT_FOUND, exc
    except BaseServiceUnProcessableException as exc:
        code, err = EXIT_UNPROCESSABLE, exc
    except BaseServiceException as exc:
        code, err = EXIT_SERVICE, exc
    logger.error("command_failed: cmd=%s error=%s", args.cmd, err.message)
    print(f"error: {err.describe()}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
