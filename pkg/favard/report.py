"""Deterministic reports: pydantic model plus JSON and CSV emitters."""

import io
import json
import math
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from favard import __version__
from favard.config import settings
from favard.exceptions import InputError


class Verdict(BaseModel):
    """Pass/fail outcome of one residual against its tolerance."""
    model_config = ConfigDict(extra="forbid")

    name: str
    passed: bool
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    message: str = ""


class Report(BaseModel):
    """Output of one command.

    ``payload`` holds the numeric results, ``tables`` the plot-ready rows that
    the CSV format flattens.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    input_digest: Optional[str] = None
    version: str = __version__
    tolerances: Dict[str, float] = Field(default_factory=dict)
    payload: Dict[str, Any] = Field(default_factory=dict)
    tables: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)
    verdicts: List[Verdict] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add_verdict(self, name: str, residual: float, tolerance: float, message: str = "") -> Verdict:
        verdict = Verdict(
            name=name,
            passed=bool(residual <= tolerance),
            residual=float(residual),
            tolerance=float(tolerance),
            message=message,
        )
        self.verdicts.append(verdict)
        self.tolerances[name] = float(tolerance)
        return verdict

    def add_flag(self, name: str, passed: bool, message: str = "") -> Verdict:
        verdict = Verdict(name=name, passed=bool(passed), message=message)
        self.verdicts.append(verdict)
        return verdict


def to_plain(value: Any) -> Any:
    """numpy scalars and arrays to Python values; complex to {"re", "im"}."""
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump())
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


def _format_float(x: float, digits: int) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, f".{digits}g")


def _encode(value: Any, indent: int, digits: int) -> str:
    pad = "  " * (indent + 1)
    close = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1, digits)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_encode(v, indent + 1, digits) for v in value) + "]"
        items = [pad + _encode(v, indent + 1, digits) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value, digits)
    return json.dumps(str(value))


def _flatten(prefix: str, value: Any, rows: List[Dict[str, Any]]) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, rows)
    else:
        rows.append({"key": prefix, "value": value})


def report_frame(report: Report) -> pd.DataFrame:
    """All tables stacked with a leading ``table`` column, or the flattened payload."""
    if report.tables:
        frames = []
        for name, rows in report.tables.items():
            frame = pd.DataFrame(to_plain(rows))
            frame.insert(0, "table", name)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True, sort=False)
    rows: List[Dict[str, Any]] = []
    _flatten("", to_plain(report.payload), rows)
    for verdict in report.verdicts:
        rows.append({"key": f"verdict.{verdict.name}", "value": verdict.passed})
    return pd.DataFrame(rows, columns=["key", "value"])


def emit_report(report: Report, fmt: Optional[str] = None) -> bytes:
    """Serialize with stable field order and 17 significant digits."""
    fmt = fmt or settings["REPORT_FORMAT"]
    digits = settings["FLOAT_DIGITS"]
    if fmt == "json":
        document = to_plain(report.model_dump())
        document["passed"] = report.passed
        return (_encode(document, 0, digits) + "\n").encode("utf-8")
    if fmt == "csv":
        buffer = io.StringIO()
        report_frame(report).to_csv(buffer, index=False, float_format=f"%.{digits}g", lineterminator="\n")
        return buffer.getvalue().encode("utf-8")
    raise InputError(
        message=f"Unknown report format {fmt!r}",
        error_code="REPORT_FORMAT",
        details={"format": fmt},
    )
