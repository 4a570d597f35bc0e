"""Persisted artifacts: draw archives (.npz + JSON metadata) and annotated CSVs."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .draws import PosteriorDraws
from .errors import DataError

SCHEMA_VERSION = 1
_META_KEY = "__meta__"


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def save_draws(path, draws: PosteriorDraws, **extra) -> Path:
    path = Path(path)
    meta = {"schema_version": SCHEMA_VERSION, "code_version": __version__, **draws.meta, **extra}
    payload = dict(draws.arrays)
    payload[_META_KEY] = np.array(json.dumps(_jsonable(meta), sort_keys=True))
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **payload)
    return path


def load_draws(path) -> PosteriorDraws:
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z[_META_KEY]))
            arrays = {k: z[k] for k in z.files if k != _META_KEY}
    except (OSError, KeyError, ValueError) as e:
        raise DataError(f"cannot read draws file {path}: {e}") from None
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise DataError(f"unsupported draws schema {meta.get('schema_version')}")
    if meta.get("nu") == "inf":
        meta["nu"] = math.inf
    return PosteriorDraws(arrays, meta)


def header_lines(meta: dict) -> list[str]:
    return [f"# {k}={v}" for k, v in meta.items()]


def write_csv(path, rows: list[dict], meta: dict | None = None, columns=None) -> Path:
    """Write records with ``# key=value`` metadata lines on top."""
    path = Path(path)
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    with open(path, "w", newline="") as fh:
        for line in header_lines({"code_version": __version__, **(meta or {})}):
            fh.write(line + "\n")
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k, "")) for k in columns})
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(path) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_csv`: returns (metadata, rows as strings)."""
    meta = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k.strip()] = v.strip()
            else:
                body.append(line)
    return meta, list(csv.DictReader(body))
