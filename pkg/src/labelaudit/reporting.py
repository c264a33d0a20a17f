"""AuditReport serialization: versioned JSON, flat CSV, and plot specs.

The JSON document is the artifact of record: it embeds the producing run
configuration and tool version and contains everything needed to
recompute the verdict. The CSV is a flat spreadsheet-friendly view with
one row per (arm, seed, checkpoint). Serialization never mutates the
report and is deterministic.
"""
from __future__ import annotations

import json
from typing import Mapping

import numpy as np

from . import __version__
from .evaluation import EvalResult, Scores
from .protocol import (AuditReport, CurvePoint, GapStat, LearningCurve)
from .util import atomic_write_text

REPORT_SCHEMA_VERSION = 1

CSV_HEADER = "protocol,arm,seed,prefix_size,precision,recall,f1"


def _scores_to_dict(scores: Scores) -> dict:
    return {
        "tp": scores.tp,
        "n_predicted": scores.n_predicted,
        "n_gold": scores.n_gold,
        "precision": scores.precision,
        "recall": scores.recall,
        "f1": scores.f1,
    }


def _result_to_dict(result: EvalResult) -> dict:
    payload = _scores_to_dict(result)
    payload["per_type"] = {t: _scores_to_dict(s)
                           for t, s in sorted(result.per_type.items())}
    return payload


def _result_from_dict(payload: Mapping) -> EvalResult:
    per_type = {t: Scores(d["tp"], d["n_predicted"], d["n_gold"])
                for t, d in payload["per_type"].items()}
    return EvalResult(payload["tp"], payload["n_predicted"],
                      payload["n_gold"], per_type)


def report_to_dict(report: AuditReport, run_config: Mapping | None = None,
                   ) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": {"name": "labelaudit", "version": __version__},
        "run_config": dict(run_config) if run_config else {},
        "protocol": report.protocol,
        "seeds": list(report.seeds),
        "threshold": report.threshold,
        "early_window": list(report.early_window),
        "sizes": dict(report.sizes),
        "verdict": report.verdict,
        "gap_stats": {
            name: [{"checkpoint": g.checkpoint, "mean": g.mean,
                    "lo": g.lo, "hi": g.hi} for g in stats]
            for name, stats in sorted(report.gap_stats.items())
        },
        "curves": [
            {
                "arm": curve.arm,
                "seed": curve.seed,
                "points": [{"prefix_size": p.prefix_size,
                            **_result_to_dict(p.result)}
                           for p in curve.points],
            }
            for curve in report.curves
        ],
    }


def report_from_dict(payload: Mapping) -> AuditReport:
    version = payload.get("schema_version")
    if version != REPORT_SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version: {version!r}")
    curves = tuple(
        LearningCurve(
            c["arm"], c["seed"],
            tuple(CurvePoint(p["prefix_size"], _result_from_dict(p))
                  for p in c["points"]))
        for c in payload["curves"])
    gap_stats = {
        name: tuple(GapStat(g["checkpoint"], g["mean"], g["lo"], g["hi"])
                    for g in stats)
        for name, stats in payload["gap_stats"].items()}
    return AuditReport(
        protocol=payload["protocol"],
        seeds=tuple(payload["seeds"]),
        threshold=payload["threshold"],
        early_window=tuple(payload["early_window"]),
        curves=curves,
        gap_stats=gap_stats,
        verdict=payload["verdict"],
        sizes=dict(payload["sizes"]),
    )


def report_json(report: AuditReport, run_config: Mapping | None = None) -> str:
    return json.dumps(report_to_dict(report, run_config), indent=2,
                      sort_keys=True) + "\n"


def write_json_report(report: AuditReport, path: str,
                      run_config: Mapping | None = None) -> None:
    atomic_write_text(path, report_json(report, run_config))


def read_json_report(path: str) -> AuditReport:
    with open(path, encoding="utf-8") as handle:
        return report_from_dict(json.load(handle))


def csv_text(report: AuditReport) -> str:
    """Flat CSV: header plus one row per curve point, 6-decimal floats."""
    lines = [CSV_HEADER]
    for curve in report.curves:
        for point in curve.points:
            r = point.result
            lines.append(
                f"{report.protocol},{curve.arm},{curve.seed},"
                f"{point.prefix_size},{r.precision:.6f},{r.recall:.6f},"
                f"{r.f1:.6f}")
    return "\n".join(lines) + "\n"


def write_csv(report: AuditReport, path: str) -> None:
    atomic_write_text(path, csv_text(report))


def build_plot_spec(report: AuditReport,
                    run_config: Mapping | None = None):
    """Mean curve per arm with a min-max band over seeds. The title is
    derived from the report itself so that re-rendering from the report
    JSON reproduces the original file byte for byte."""
    from .svg import PALETTE, PlotSpec, Series

    arms: list[str] = []
    for curve in report.curves:
        if curve.arm not in arms:
            arms.append(curve.arm)
    series = []
    for idx, arm in enumerate(arms):
        arm_curves = [c for c in report.curves if c.arm == arm]
        checkpoints = [p.prefix_size for p in arm_curves[0].points]
        points = []
        band = []
        for k in checkpoints:
            values = [c.f1_at(k) for c in arm_curves]
            points.append((float(k), float(np.mean(values))))
            band.append((float(k), float(np.min(values)),
                         float(np.max(values))))
        series.append(Series(arm, PALETTE[idx % len(PALETTE)],
                             tuple(points),
                             tuple(band) if len(arm_curves) > 1 else ()))
    description = json.dumps(
        {"tool": {"name": "labelaudit", "version": __version__},
         "run_config": dict(run_config) if run_config else {},
         "verdict": report.verdict},
        sort_keys=True)
    return PlotSpec(
        title=f"{report.protocol} protocol: verdict {report.verdict}",
        series=tuple(series),
        description=description,
    )
