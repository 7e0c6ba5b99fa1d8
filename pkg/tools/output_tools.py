"""
Output tools for the experiment commands.
Writes result tables as CSV or JSON and the optional SVG chart next to them.
"""

import json
import math
import os
from typing import Any, Dict, List

import pandas as pd

from config.experiment_config import ExperimentConfig
from experiments.runner import ExperimentResult
from tools.chart_tools import ChartTools
from utils.constants import CSV_FLOAT_FORMAT
from utils.logging_utils import get_logger

logger = get_logger(__name__)


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_json_safe(item) for item in value]
    return value


def write_csv(table: pd.DataFrame, path: str) -> str:
    """Write a table with round-trip float formatting and a header row."""
    _ensure_parent(path)
    table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def write_json(table: pd.DataFrame, config: Dict[str, Any], notes: Dict[str, Any], path: str) -> str:
    """Write {"config": ..., "rows": [...]} with notes when present."""
    _ensure_parent(path)
    payload = {"config": config, "rows": table.to_dict(orient="records")}
    if notes:
        payload["notes"] = notes
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_json_safe(payload), f, indent=2, allow_nan=False)
        f.write("\n")
    return path


def _svg_path(out_path: str, suffix: str = "") -> str:
    stem, _ = os.path.splitext(out_path)
    return f"{stem}{suffix}.svg"


def _emit_svg(result: ExperimentResult, out_path: str, charts: ChartTools) -> List[str]:
    table = result.table
    if result.command == "figure1":
        return [charts.figure1_scatter(
            table, result.notes["util_annotation"], result.notes["eng_annotation"], _svg_path(out_path)
        )]
    if result.command == "table1":
        return [charts.table1_bars(table, _svg_path(out_path))]
    if result.command == "figure34":
        written = []
        best = result.notes.get("best_explore_len", {})
        for delta, group in table.groupby("delta", sort=True):
            explore_len = best.get(str(float(delta)))
            if explore_len is None:
                explore_len = int(group["explore_len"].iloc[0])
            cells = group[group["explore_len"] == explore_len]
            written.append(charts.figure34_bars(
                cells, _svg_path(out_path, f"_delta{float(delta):g}"), title=f"delta={float(delta):g}, T={explore_len}"
            ))
        return written
    logger.info(f"No chart defined for {result.command}")
    return []


def emit_outputs(result: ExperimentResult, config: ExperimentConfig) -> List[str]:
    """
    Write the result table and, if requested, its chart.

    Args:
        result: Completed experiment result
        config: Resolved experiment configuration

    Returns:
        Paths written; OSError propagates when a path is not writable
    """
    out_path = config.resolved_out_path
    if config.format == "json":
        written = [write_json(result.table, config.echo(), result.notes, out_path)]
    else:
        written = [write_csv(result.table, out_path)]
    logger.info(f"Wrote {len(result.table)} rows to {out_path}")

    if config.emit_svg:
        written.extend(_emit_svg(result, out_path, ChartTools()))
    return written
