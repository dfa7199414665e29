"""Structured output: CSV with ``#`` metadata lines, JSON, or JSON lines.

Certified quantities are written as two decimal columns, the center and
``<name>_radius``.  The ``timestamp`` metadata key is the only field that
varies between identical runs; :func:`canonical_bytes` drops it.
"""

from __future__ import annotations

import csv
import datetime as _dt
import enum
import io
import json
from fractions import Fraction
from typing import Any, Iterable, TextIO

from . import __version__
from .precision import RealScalar, fmt_decimal

SCHEMA_VERSION = 1
DIGITS = 25
FORMATS = ("csv", "json", "jsonl")


def metadata(command: str, inputs: dict, seed: int | None = None, precision: dict | None = None,
             extra: dict | None = None) -> dict:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "tool": "coprime-approx",
        "version": __version__,
        "command": command,
        "inputs": {k: _plain(v) for k, v in inputs.items()},
        "seed": seed,
        "precision": precision or {},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        meta.update({k: _plain(v) for k, v in extra.items()})
    return meta


def _plain(v: Any) -> Any:
    if isinstance(v, RealScalar):
        return {"center": fmt_decimal(v.center, DIGITS), "radius": fmt_decimal(v.radius, 3)}
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    return str(v)


def flatten_row(row: dict) -> dict:
    """Split every RealScalar into a center column and a radius column."""
    out = {}
    for k, v in row.items():
        if isinstance(v, RealScalar):
            out[k] = fmt_decimal(v.center, DIGITS)
            out[f"{k}_radius"] = fmt_decimal(v.radius, 3)
        elif v is None:
            out[k] = ""
        else:
            p = _plain(v)
            out[k] = json.dumps(p) if isinstance(p, (list, dict)) else p
    return out


def render(rows: Iterable[dict], fmt: str, meta: dict) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    flat = [flatten_row(r) for r in rows]
    if fmt == "json":
        return json.dumps({"metadata": _plain(meta), "rows": flat}, indent=1, sort_keys=True) + "\n"
    if fmt == "jsonl":
        lines = [json.dumps({"metadata": _plain(meta)}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in flat]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    for k, v in _plain(meta).items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}\n")
    if flat:
        fields = list(dict.fromkeys(k for r in flat for k in r))
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(flat)
    return buf.getvalue()


def write(rows: Iterable[dict], fmt: str, meta: dict, stream: TextIO) -> None:
    stream.write(render(rows, fmt, meta))


def canonical_bytes(text: str) -> bytes:
    """The output with the timestamp removed, for reproducibility comparisons."""
    out = []
    for line in text.splitlines(keepends=True):
        if line.startswith("# timestamp:"):
            continue
        out.append(line)
    joined = "".join(out)
    try:
        doc = json.loads(joined)
    except ValueError:
        lines = []
        for line in joined.splitlines(keepends=True):
            try:
                obj = json.loads(line)
            except ValueError:
                lines.append(line)
                continue
            if isinstance(obj, dict) and "metadata" in obj:
                obj["metadata"].pop("timestamp", None)
                line = json.dumps(obj, sort_keys=True) + "\n"
            lines.append(line)
        return "".join(lines).encode()
    if isinstance(doc, dict) and isinstance(doc.get("metadata"), dict):
        doc["metadata"].pop("timestamp", None)
    return json.dumps(doc, indent=1, sort_keys=True).encode()
