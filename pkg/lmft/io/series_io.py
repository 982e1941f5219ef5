import os
import json
import math
import numpy as np
import pandas as pd
from typing import Any, Dict, List, Tuple, Union
from lmft.pipeline.series import FeatureSeries, TimeSeries
from lmft.utils import constants as CONST
from lmft.utils.errors import ValidationError
from lmft.utils.logging import logger


def _file_line(row: int) -> int:
    # data row 0 sits on line 2, under the header
    return row + 2


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
        return True
    except (TypeError, ValueError):
        return False


def read_csv(path: str) -> TimeSeries:
    """
    Load a series: header row, first column time, one column per channel.

    Errors name the offending line of the file (1-based, header on line 1).
    """
    if not os.path.exists(path):
        raise ValidationError(f"File not found: {path}", {"path": path})
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ValidationError(f"Empty CSV file: {path}", {"path": path})
    except pd.errors.ParserError as e:
        raise ValidationError(f"Malformed CSV {path}: {e}", {"path": path})

    columns = [str(c).strip() for c in df.columns]
    if len(columns) < 2:
        raise ValidationError(f"{path} needs a time column and at least one channel", {"path": path})
    if all(_looks_numeric(c) for c in columns):
        raise ValidationError(f"{path} has no header row", {"path": path})
    if df.shape[0] == 0:
        raise ValidationError(f"{path} has no data rows", {"path": path})

    values = np.empty(df.shape, dtype=float)
    for row, record in enumerate(df.itertuples(index=False, name=None)):
        for col, cell in enumerate(record):
            text = cell.strip() if isinstance(cell, str) else ""
            if text == "":
                raise ValidationError(f"Missing value on line {_file_line(row)}, column '{columns[col]}'",
                                      {"path": path, "line": _file_line(row), "column": columns[col]})
            try:
                value = float(text)
            except ValueError:
                raise ValidationError(f"Non-numeric cell '{text}' on line {_file_line(row)}, "
                                      f"column '{columns[col]}'",
                                      {"path": path, "line": _file_line(row), "column": columns[col]})
            if not math.isfinite(value):
                raise ValidationError(f"Non-finite value on line {_file_line(row)}",
                                      {"path": path, "line": _file_line(row), "column": columns[col]})
            values[row, col] = value

    times = values[:, 0]
    bad = np.flatnonzero(np.diff(times) <= 0)
    if bad.size:
        row = int(bad[0]) + 1
        raise ValidationError(f"Time is not strictly increasing on line {_file_line(row)}",
                              {"path": path, "line": _file_line(row)})
    logger.debug(f"read {df.shape[0]} rows x {len(columns) - 1} channels from {path}")
    return TimeSeries(times, values[:, 1:], columns[1:])


def _ensure_parent(path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_csv(series: Union[TimeSeries, FeatureSeries], path: str) -> str:
    frame = series.to_frame()
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=CONST.CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def write_rows(rows: List[Dict[str, Any]], path: str) -> str:
    """Plain record table, e.g. per-item classification output."""
    _ensure_parent(path)
    pd.DataFrame(rows).to_csv(path, index=False, float_format=CONST.CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(data: Any, path: str) -> str:
    """Deterministic JSON: sorted keys, non-finite numbers written as null."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(_json_safe(data), indent=2, sort_keys=True))
        f.write("\n")
    return path


def read_json(path: str) -> Any:
    if not os.path.exists(path):
        raise ValidationError(f"File not found: {path}", {"path": path})
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Invalid JSON in {path}: {e}", {"path": path})


def write_features(features: FeatureSeries, prefix: str) -> Tuple[str, str]:
    """``{prefix}.features.csv`` plus the ``{prefix}.diagnostics.json`` sidecar."""
    csv_path = write_csv(features, f"{prefix}.features.csv")
    json_path = write_json(features.diagnostics_dict(), f"{prefix}.diagnostics.json")
    return csv_path, json_path


def read_manifest(path: str) -> List[Tuple[str, str, str]]:
    """
    Labeled corpus manifest: CSV with columns ``path``, ``label`` and ``split``
    (``train`` or ``test``). Relative paths resolve against the manifest's directory.
    """
    if not os.path.exists(path):
        raise ValidationError(f"File not found: {path}", {"path": path})
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = {"path", "label", "split"} - set(df.columns)
    if missing:
        raise ValidationError(f"Manifest {path} is missing columns {sorted(missing)}", {"path": path})
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for row, record in enumerate(df.to_dict(orient="records")):
        split = record["split"].strip().lower()
        if split not in ("train", "test"):
            raise ValidationError(f"Unknown split '{record['split']}' on line {_file_line(row)}",
                                  {"path": path, "line": _file_line(row)})
        item = record["path"].strip()
        entries.append((item if os.path.isabs(item) else os.path.join(base, item),
                        record["label"].strip(), split))
    return entries
