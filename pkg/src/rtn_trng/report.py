"""Text and JSON renderings of a battery report."""

from __future__ import annotations

import json

import numpy as np

from .nist.battery import BatteryReport

NAME_WIDTH = 36


def _format_p(p: float | None) -> str:
    return "-" if p is None else f"{p:.4f}"


def render_table(report: BatteryReport) -> str:
    lines = [f"{'Test Name':<{NAME_WIDTH}}  {'P-Value':>7}  Result"]
    for name, res in report.rows():
        lines.append(f"{name:<{NAME_WIDTH}}  {_format_p(res.min_p):>7}  {res.verdict}")
    lines.append("")
    lines.append(f"n = {report.n} bits, alpha = {report.alpha}")
    lines.append(f"Summary: {report.summary}")
    return "\n".join(lines) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def report_dict(report: BatteryReport) -> dict:
    rows = []
    for name, res in report.rows():
        rows.append({
            "name": name,
            "test_id": res.test_id,
            "verdict": res.verdict,
            "applicable": res.applicable,
            "reason": res.reason,
            "min_p": res.min_p,
            "p_values": res.p_values,
            "params": res.params,
            "statistics": res.details,
            "warnings": res.warnings,
        })
    return _plain({
        "n": report.n,
        "alpha": report.alpha,
        "summary": report.summary,
        "rows": rows,
        "metadata": report.metadata,
    })


def render_json(report: BatteryReport) -> str:
    return json.dumps(report_dict(report), sort_keys=True, indent=2) + "\n"


def render(report: BatteryReport, format: str = "table") -> str:
    if format == "table":
        return render_table(report)
    if format == "json":
        return render_json(report)
    raise ValueError(f"unknown report format {format!r}")


def exit_code(report: BatteryReport) -> int:
    return 0 if report.passed else 1
