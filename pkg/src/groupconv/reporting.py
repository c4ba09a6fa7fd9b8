"""Deterministic report emission: JSON and CSV.

Identical report payloads produce byte-identical files: floats are
serialized through repr (shortest round-trip form), keys are sorted, and
no timestamps or machine state enter the output.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

from .errors import UsageError
from .experiments import ExperimentReport

__all__ = ["render_json", "render_csv", "emit"]


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_payload(), sort_keys=True, indent=2) + "\n"


def _csv_columns(kind: str, rows: list) -> list:
    preferred = {
        "blowup": ["t", "sn_gamma", "sn_eta", "sn_conv"],
        "unbounded_family": ["a", "value", "sup_gamma"],
        "identity_suite": ["group", "tag", "residual", "tolerance", "pass"],
        "limit_constant": ["a"],
    }
    if kind in preferred:
        return preferred[kind]
    if not rows:
        return []
    return sorted(rows[0])


def render_csv(report: ExperimentReport) -> str:
    cols = _csv_columns(report.kind, report.rows)
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for row in report.rows:
        buf.write(",".join(_fmt(row.get(c, "")) for c in cols) + "\n")
    for key in sorted(report.summary):
        buf.write(f"# {key}={_fmt(report.summary[key])}\n")
    buf.write(f"# pass={_fmt(report.passed)}\n")
    return buf.getvalue()


def emit(report: ExperimentReport, fmt: str, path) -> Path:
    """Write a report to disk; identical inputs give identical bytes."""
    if fmt == "json":
        text = render_json(report)
    elif fmt == "csv":
        text = render_csv(report)
    else:
        raise UsageError(f"unknown emit format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise IOError(f"cannot write report to {path}: {exc}") from exc
    return path
