"""
Harness file I/O: experiment config, run metadata, PGM corpus, CSV.

Everything written here is a pure function of its inputs (no timestamps),
so reruns with the same config and seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import subprocess
import sys
from importlib import metadata
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

import numpy as np
from PIL import Image, UnidentifiedImageError  # type: ignore[import-not-found]
from pydantic import BaseModel, ValidationError
from pydantic_core import to_jsonable_python

from sddsim.baseline_chain.schemas import ImagePatch
from sddsim.commons.logging import logger
from sddsim.harness.exceptions import (
    ConfigException,
    ConfigNotFoundException,
    CorpusException,
    CorpusNotFoundException,
)
from sddsim.harness.schemas import Corpus, ExperimentConfig, Split

RESOLVED_CONFIG = "config.resolved.toml"

# ---- config ------------------------------------------------------------------


def _merge(base: dict, overrides: dict) -> dict:
    out = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigException("invalid_toml", str(exc)) from exc
    try:
        return ExperimentConfig(**_merge(doc, overrides or {}))
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()
        )
        raise ConfigException("invalid_config", details) from exc


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigNotFoundException("config_not_found", str(p))
    return parse_config(p.read_text(encoding="utf-8"), overrides)


_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")


def _key(k: str) -> str:
    return k if _BARE_KEY.match(k) else json.dumps(k)


def _scalar(v: Any) -> str:
    v = to_jsonable_python(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{_key(k)} = {_scalar(x)}" for k, x in v.items()) + "}"
    return str(v)


def _is_table_list(v: Any) -> bool:
    if not isinstance(v, (list, tuple)) or not v:
        return False
    return all(isinstance(x, BaseModel) for x in v)


def _emit(
    node: BaseModel | dict, path: list[str], header: str, lines: list[str]
) -> None:
    if isinstance(node, BaseModel):
        fields = type(node).model_fields
        items = [(name, getattr(node, name)) for name in fields]
    else:
        fields = {}
        items = list(node.items())

    if header:
        lines += ["", header]
    tables, table_lists = [], []
    for name, value in items:
        if value is None:
            f = fields.get(name)
            # a None that equals the default round-trips by omission
            if f is not None and f.get_default(call_default_factory=True) is not None:
                lines.append(f'{_key(name)} = "off"')
            continue
        if isinstance(value, BaseModel) or (isinstance(value, dict) and value):
            tables.append((name, value))
        elif _is_table_list(value):
            table_lists.append((name, value))
        else:
            lines.append(f"{_key(name)} = {_scalar(value)}")
    for name, value in tables:
        sub = [*path, _key(name)]
        _emit(value, sub, f"[{'.'.join(sub)}]", lines)
    for name, values in table_lists:
        sub = [*path, _key(name)]
        for value in values:
            _emit(value, sub, f"[[{'.'.join(sub)}]]", lines)


def config_to_toml(cfg: ExperimentConfig) -> str:
    """Fully resolved document; parses back to an equal config."""
    lines: list[str] = []
    _emit(cfg, [], "", lines)
    return "\n".join(lines).lstrip("\n") + "\n"


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            capture_output=True,
            text=True,
            check=True,
            cwd=Path(__file__).parent,
            timeout=5,
        )
        if out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("sdd-sim")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_run_metadata(out_dir: str | Path, cfg: ExperimentConfig) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / RESOLVED_CONFIG).write_text(config_to_toml(cfg), encoding="utf-8")
    (out / "VERSION").write_text(version_string() + "\n", encoding="utf-8")
    (out / "SEED").write_text(f"{cfg.seed}\n", encoding="utf-8")
    return out


# ---- corpus ------------------------------------------------------------------


def _split_for(name: str, eval_fraction: float) -> Split:
    h = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "big")
    return "eval" if h / 2**64 < eval_fraction else "train"


def decode_pgm(data: bytes, patch_size: int, name: str = "<bytes>") -> ImagePatch:
    """8-bit P5 -> [0,1] patch: nearest-neighbor resize to cover, center crop."""
    if not data.startswith(b"P5"):
        raise CorpusException("malformed_pgm", f"{name}: bad magic {data[:2]!r}")
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError, SyntaxError) as exc:
        raise CorpusException("malformed_pgm", f"{name}: {exc}") from exc
    if img.mode != "L":
        raise CorpusException("unsupported_pgm", f"{name}: mode {img.mode}, need 8-bit")
    w, h = img.size
    scale = patch_size / min(w, h)
    size = (max(patch_size, round(w * scale)), max(patch_size, round(h * scale)))
    img = img.resize(size, Image.Resampling.NEAREST)
    left, top = (size[0] - patch_size) // 2, (size[1] - patch_size) // 2
    img = img.crop((left, top, left + patch_size, top + patch_size))
    return ImagePatch(np.asarray(img, dtype=np.float64) / 255.0)


def load_corpus(
    directory: str | Path, patch_size: int, eval_fraction: float = 0.25
) -> Corpus:
    d = Path(directory)
    if not d.is_dir():
        raise CorpusNotFoundException("corpus_not_found", str(d))
    files = sorted(p for p in d.iterdir() if p.is_file() and p.suffix.lower() == ".pgm")
    if not files:
        raise CorpusException("empty_corpus", f"no .pgm files in {d}")
    patches = tuple(decode_pgm(p.read_bytes(), patch_size, p.name) for p in files)
    names = tuple(p.name for p in files)
    splits = tuple(_split_for(n, eval_fraction) for n in names)
    logger.info(
        "corpus_loaded: dir=%s files=%d eval=%d patch=%d",
        d, len(files), splits.count("eval"), patch_size,
    )
    return Corpus(patches, names, splits)


def pgm_bytes(patch: ImagePatch) -> bytes:
    pixels = np.clip(np.rint(patch.pixels * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(pixels).save(buf, format="PPM")
    return buf.getvalue()


def write_pgm(path: str | Path, patch: ImagePatch, black: bool = False) -> Path:
    """`black` writes an all-zero image (a patch that could not be recovered)."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    if black:
        patch = ImagePatch.filled(patch.height, patch.width, 0.0)
    p.write_bytes(pgm_bytes(patch))
    return p


# ---- csv ---------------------------------------------------------------------


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def csv_text(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: list[str], rows: list[list[Any]]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(csv_text(header, rows), encoding="utf-8")
    logger.info("artifact_written: path=%s rows=%d", p, len(rows))
    return p


def read_csv(path: str | Path) -> list[dict[str, str]]:
    p = Path(path)
    if not p.is_file():
        raise ConfigNotFoundException("csv_not_found", str(p))
    with p.open(encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
