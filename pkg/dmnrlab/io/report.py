"""
Evaluation report files.

JSON : run metadata, parameter echo, one row per frame, the aggregate row and
       notes on published figures whose F1 does not match their P/R.
CSV  : the same rows as a table, precision/recall/F1 in percent (2 decimals).
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from dmnrlab import __version__
from dmnrlab.kernel.benchmarks import f1_annotations
from dmnrlab.kernel.evaluator import EvalReport, FrameResult

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
AGGREGATION = "micro"


def _row(frame_id: str, r) -> Dict[str, Any]:
    c = r.confusion if isinstance(r, FrameResult) else r.aggregate
    return {
        "frame": frame_id,
        **c.as_dict(),
        "precision": r.precision,
        "recall": r.recall,
        "f1": r.f1,
    }


def report_to_dict(report: EvalReport, params: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    frames: List[Dict[str, Any]] = []
    for r in report.per_frame:
        row = _row(r.frame_id, r)
        row["n_points"] = r.n_points
        row["runtime_s"] = round(r.runtime_s, 6)
        frames.append(row)
    aggregate = _row("ALL", report)
    aggregate["n_frames"] = report.n_frames
    aggregate["total_runtime_s"] = round(report.total_runtime_s, 6)
    aggregate["mean_runtime_s"] = round(report.mean_runtime_s, 6)
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "tool": "dmnrlab",
            "version": __version__,
            "aggregation": AGGREGATION,
            "noise_class_ids": list(report.noise_class_ids),
            **report.metadata,
        },
        "params": dict(params or {}),
        "frames": frames,
        "aggregate": aggregate,
        "annotations": f1_annotations(),
    }


def report_table(report: EvalReport) -> pd.DataFrame:
    rows = [_row(r.frame_id, r) for r in report.per_frame]
    rows.append(_row("ALL", report))
    df = pd.DataFrame(rows, columns=["frame", "tp", "fp", "fn", "tn", "precision", "recall", "f1"])
    for col in ("precision", "recall", "f1"):
        df[col] = (df[col] * 100.0).round(2)
    return df


def write_report(report: EvalReport, path, params: Optional[Dict[str, Any]] = None, runtime_fields: bool = True) -> None:
    """
    write_report(report, path, params)
    With ``runtime_fields=False`` timings are left out so reruns compare byte for byte.
    """
    doc = report_to_dict(report, params)
    if not runtime_fields:
        for row in doc["frames"]:
            row.pop("runtime_s", None)
        for key in ("total_runtime_s", "mean_runtime_s"):
            doc["aggregate"].pop(key, None)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    logger.info("report written to %s", path)


def write_csv(report: EvalReport, path) -> None:
    report_table(report).to_csv(path, index=False, float_format="%.2f")
    logger.info("table written to %s", path)
