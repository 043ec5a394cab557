"""CSV tables with a ``#`` metadata header, plus a JSON sidecar per run."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

from .errors import ConfigError

FLOAT_FMT = "%.12g"


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return FLOAT_FMT % v
    return str(v)


def export_table(path, columns, rows, meta: dict | None = None, units: dict | None = None) -> Path:
    """Write ``rows`` under ``columns``; blocks may be separated by ``None`` rows.

    A ``None`` row emits an empty line (one block per system size in
    collapse tables).
    """
    rows = list(rows)
    if not any(r is not None for r in rows):
        raise ConfigError(f"refusing to write an empty table to {path}")
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {v}\n")
    if units:
        buf.write("# units: " + ", ".join(f"{c}={units[c]}" for c in columns if c in units) + "\n")
    buf.write("# columns: " + ",".join(columns) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        if r is None:
            buf.write("\n")
            continue
        if len(r) != len(columns):
            raise ConfigError(f"row {r!r} does not match columns {columns}")
        w.writerow([_fmt(v) for v in r])
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write table {path}: {exc}") from exc
    return path


def read_table(path) -> tuple[dict, list[str], list[list[float]]]:
    """Parse a table written by :func:`export_table` (blank block separators dropped)."""
    meta, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = v.strip()
        elif not line.strip():
            continue
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(x) for x in line.split(",")])
    return meta, header, rows


def write_sidecar(table_path, meta: dict) -> Path:
    path = Path(str(table_path) + ".meta.json")
    path.write_text(json.dumps(meta, sort_keys=True, indent=2, default=str) + "\n")
    return path
