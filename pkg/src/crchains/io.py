"""CSV / JSON tables for trajectories and sweeps.

A CSV file is a block of ``# key = value`` metadata lines followed by one
header row and the data rows.  The JSON mirror is
``{"meta": {...}, "columns": [...], "records": [{...}, ...]}``.
Undefined cells (no center below the bifurcation, no ``p/q`` for a
quasi-periodic chain) are written empty / ``null``; NaN never reaches a file.
"""
from __future__ import annotations

import csv
import functools
import io as _io
import json
import math
import subprocess
from importlib import metadata as _metadata
from pathlib import Path

import numpy as np

from .exceptions import ParameterError
from .fefferman import hamiltonian

TRAJECTORY_COLUMNS = ("t", "M1", "M2", "M3", "P", "qw", "qx", "qy", "qz", "gamma", "K", "H")
SWEEP_COLUMNS = (
    "a", "K", "T", "dynamic", "geometric", "delta_theta",
    "delta_theta_reconstructed", "discrepancy", "class", "p", "q",
)
FORMATS = ("csv", "json")


@functools.lru_cache(maxsize=1)
def git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def package_version() -> str:
    try:
        return _metadata.version("crchains")
    except _metadata.PackageNotFoundError:
        return "0+unknown"


def base_meta(**extra) -> dict:
    meta = {"version": package_version(), "git_revision": git_revision()}
    meta.update(extra)
    return meta


def _clean(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    return str(v) if not isinstance(v, str) else v


def _cell(v) -> str:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(_cell(x) for x in v)
    return str(v)


def render(columns, rows, meta: dict, fmt: str = "csv") -> str:
    """Serialize a table; output depends only on the arguments."""
    if fmt not in FORMATS:
        raise ParameterError(f"unknown format {fmt!r}; choose from {FORMATS}")
    columns = list(columns)
    if fmt == "json":
        records = [dict(zip(columns, (_clean(v) for v in row))) for row in rows]
        doc = {"meta": {k: _clean(v) for k, v in meta.items()}, "columns": columns, "records": records}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    buf = _io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k} = {_cell(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_table(path, columns, rows, meta: dict, fmt: str = "csv") -> None:
    text = render(columns, rows, meta, fmt)
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def read_table(path) -> tuple[dict, list[str], list[dict]]:
    """Inverse of :func:`write_table` (CSV or JSON, chosen by content)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["meta"], doc["columns"], doc["records"]
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition("=")
            meta[k.strip()] = v.strip()
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    records = []
    for row in reader:
        rec = {}
        for k, v in zip(columns, row):
            try:
                rec[k] = float(v) if v != "" else None
            except ValueError:
                rec[k] = v
        records.append(rec)
    return meta, columns, records


def trajectory_rows(a: float, times, states9) -> list[list[float]]:
    """Rows of the trajectory schema from ``(t, [M, P, q, gamma])`` samples."""
    y = np.asarray(states9, dtype=float)
    K = np.sum(y[:, :3] ** 2, axis=1)
    H = hamiltonian(a, y[:, :4])
    table = np.column_stack([np.asarray(times, dtype=float), y[:, :9], K, H])
    return table.tolist()
