"""Dataset ingestion and machine-readable report emission.

CSV input: a header row with a ``group`` column plus either numeric
feature columns (continuous data) or a single integer ``level`` column
(discrete data).  Rows are regrouped into contiguous blocks with groups
ordered by first appearance.

Reports are JSON objects or CSV tables with stable field ordering.
Floats are serialized with 17 significant digits, which round-trips
IEEE double exactly, so re-running a configuration reproduces reports
byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .core import GroupedDataset, TestResult, validate_dataset
from .errors import (
    IoError,
    MalformedRowError,
    MissingGroupColumnError,
    MixedDomainError,
)

GROUP_COLUMN = "group"
LEVEL_COLUMN = "level"


def parse_dataset_csv(path: str) -> GroupedDataset:
    """Read a grouped dataset from a comma-separated UTF-8 file.

    The header must contain a ``group`` column; remaining columns are
    numeric features, except that a lone ``level`` column of integers
    yields a discrete dataset.  Groups are ordered by first appearance
    and rows within a group keep file order.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRowError(1, "empty file; header row required") from None
        header = [h.strip() for h in header]
        if GROUP_COLUMN not in header:
            raise MissingGroupColumnError(
                f"header {header} has no {GROUP_COLUMN!r} column"
            )
        group_pos = header.index(GROUP_COLUMN)
        value_cols = [(i, name) for i, name in enumerate(header) if i != group_pos]
        discrete = len(value_cols) == 1 and value_cols[0][1] == LEVEL_COLUMN
        if not discrete and any(name == LEVEL_COLUMN for _, name in value_cols):
            raise MixedDomainError(
                "a `level` column cannot be mixed with feature columns"
            )
        if not value_cols:
            raise MalformedRowError(1, "no feature or level columns in header")

        by_group: Dict[str, List[List[float]]] = {}
        order: List[str] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRowError(
                    line_no, f"expected {len(header)} cells, got {len(row)}"
                )
            label = row[group_pos].strip()
            values: List[float] = []
            for i, name in value_cols:
                cell = row[i].strip()
                try:
                    values.append(int(cell) if discrete else float(cell))
                except ValueError:
                    kind = "integer level" if discrete else "numeric feature"
                    raise MalformedRowError(
                        line_no, f"column {name!r}: {cell!r} is not a {kind}"
                    ) from None
            if label not in by_group:
                by_group[label] = []
                order.append(label)
            by_group[label].append(values)

    sizes = [len(by_group[label]) for label in order]
    pooled = [vals for label in order for vals in by_group[label]]
    if discrete:
        levels = np.asarray([v[0] for v in pooled], dtype=np.int64)
        return validate_dataset(levels, sizes, domain="discrete")
    return validate_dataset(np.asarray(pooled, dtype=np.float64), sizes)


def format_float(x: float) -> str:
    """17-significant-digit decimal form; round-trips double exactly."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def _json_fragment(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int,)):
        return str(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return format_float(obj)
        return f'"{format_float(obj)}"'
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(
            f"{_json_fragment(str(k))}: {_json_fragment(v)}" for k, v in obj.items()
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_fragment(v) for v in obj) + "]"
    if isinstance(obj, np.integer):
        return str(int(obj))
    if isinstance(obj, np.floating):
        return _json_fragment(float(obj))
    if isinstance(obj, np.ndarray):
        return _json_fragment(obj.tolist())
    raise IoError(f"cannot serialize value of type {type(obj).__name__}")


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    return _json_fragment(obj) + "\n"


def result_record(result: TestResult) -> Dict[str, Any]:
    """Flatten a TestResult into an ordered, serializable record."""
    rec: Dict[str, Any] = {
        "statistic": result.statistic,
        "statistic_kind": result.statistic_kind,
        "p_value": result.p_value,
        "method": result.method,
        "argmax_pair": list(result.argmax_pair) if result.argmax_pair else None,
        "num_permutations": result.num_permutations,
        "seed": result.seed,
    }
    if result.details:
        rec["config"] = dict(result.details)
    return rec


def _as_records(payload: Any) -> List[Dict[str, Any]]:
    if isinstance(payload, TestResult):
        return [result_record(payload)]
    if is_dataclass(payload) and not isinstance(payload, type):
        return [asdict(payload)]
    if isinstance(payload, dict):
        return [payload]
    if isinstance(payload, Sequence) and not isinstance(payload, str):
        out = []
        for row in payload:
            out.extend(_as_records(row))
        return out
    raise IoError(f"cannot tabulate payload of type {type(payload).__name__}")


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_csv_cell(v) for v in value)
    return str(value)


def dumps_csv(payload: Any) -> str:
    """Render a record or list of records as CSV with a header row."""
    records = _as_records(payload)
    if not records:
        raise IoError("nothing to write")
    fields = list(records[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for rec in records:
        writer.writerow([_csv_cell(rec.get(f)) for f in fields])
    return buf.getvalue()


def emit_report(
    payload: Union[TestResult, Dict[str, Any], Sequence],
    path: Optional[str],
    fmt: str = "json",
) -> str:
    """Serialize a result or table and write it to ``path``.

    Returns the serialized text; with ``path=None`` nothing is written
    (the caller prints it).  JSON keeps nested structure; CSV flattens
    records into one table.
    """
    if fmt == "json":
        if isinstance(payload, TestResult):
            text = dumps_json(result_record(payload))
        elif is_dataclass(payload) and not isinstance(payload, type):
            text = dumps_json(asdict(payload))
        elif isinstance(payload, Sequence) and not isinstance(payload, (str, dict)):
            text = dumps_json(_as_records(payload))
        else:
            text = dumps_json(payload)
    elif fmt == "csv":
        text = dumps_csv(payload)
    else:
        raise IoError(f"unknown report format {fmt!r}; expected json or csv")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
    return text


def parse_spectrum_file(path: str) -> List[float]:
    """Read eigenvalues, one per line; blank lines are skipped.

    Order in the file is free; the spectrum constructor sorts.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read spectrum file {path}: {exc}") from exc
    values: List[float] = []
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError as exc:
            raise MalformedRowError(number, f"expected a number, got {text!r}") from exc
    if not values:
        raise MalformedRowError(1, f"spectrum file {path} holds no values")
    return values
