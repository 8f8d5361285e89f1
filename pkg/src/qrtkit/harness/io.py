"""JSON, JSONL and CSV input/output for channels and reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .. import channels as ch
from ..errors import IoError, ParseError


def load_json(path):
    """Parse a JSON file; errors carry the line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_channel(path) -> ch.ChoiChannel:
    """Channel from ``{"dim_in", "dim_out", "choi"}`` or ``{"kraus": [...]}`` JSON."""
    obj = load_json(path)
    try:
        return ch.channel_from_json(obj)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def save_channel(N: ch.LinearMap, path) -> None:
    _write(path, json.dumps(ch.channel_to_json(N)))


def save_json(obj, path) -> None:
    _write(path, json.dumps(obj, indent=2, default=_default))


def save_report(report, path) -> None:
    """One JSON object per record, then a summary line."""
    lines = [json.dumps(r.to_json(), default=_default) for r in report.records]
    lines.append(json.dumps({"summary": report.summary(), "meta": report.meta}, default=_default))
    _write(path, "\n".join(lines) + "\n")


def emit_csv(rows, path, columns) -> None:
    """Write dict rows with the given column order."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _fmt(r.get(k)) for k in columns})
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _default(o):
    import numpy as np
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _write(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
