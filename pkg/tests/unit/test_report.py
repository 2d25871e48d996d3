"""Unit tests for report serialization."""

import io
import json

import numpy as np
import pandas as pd
import pytest

from favard import __version__
from favard.exceptions import InputError
from favard.report import Report, emit_report, to_plain


def _sample() -> Report:
    report = Report(command="spectrum", arguments={"N": 2}, input_digest="sha256:00")
    report.payload["eigenvalues"] = np.array([1 / 3, 2.0, np.pi])
    report.payload["z"] = 1.5 - 0.25j
    report.tables["nodes"] = [{"x": 1 / 3, "mass": 0.1}, {"x": np.pi, "mass": 0.9}]
    report.add_verdict("uw_identity", 1e-12, 1e-7)
    return report


class TestReport:
    """Test verdict bookkeeping."""

    def test_verdicts(self):
        report = Report(command="factorize")
        assert report.passed
        report.add_verdict("reassembly", 1e-15, 1e-10)
        report.add_flag("positive", True)
        assert report.passed
        assert report.tolerances == {"reassembly": 1e-10}
        report.add_verdict("charpoly", 1e-3, 1e-9)
        assert not report.passed

    def test_to_plain(self):
        plain = to_plain({"a": np.float64(0.5), "b": np.arange(2), 3: 2j, "c": np.bool_(True)})
        assert plain == {"a": 0.5, "b": [0, 1], "3": {"re": 0.0, "im": 2.0}, "c": True}


class TestEmitJson:
    """Test the JSON emitter."""

    def test_deterministic_bytes(self):
        assert emit_report(_sample(), "json") == emit_report(_sample(), "json")

    def test_full_precision(self):
        document = json.loads(emit_report(_sample(), "json"))
        assert document["payload"]["eigenvalues"] == [1 / 3, 2.0, np.pi]
        assert document["payload"]["z"] == {"re": 1.5, "im": -0.25}
        assert document["passed"] is True
        assert document["version"] == __version__
        assert document["tolerances"] == {"uw_identity": 1e-7}

    def test_non_finite_as_strings(self):
        report = Report(command="weyl", payload={"values": [float("nan"), float("inf")]})
        document = json.loads(emit_report(report, "json"))
        assert document["payload"]["values"] == ["nan", "inf"]

    def test_field_order(self):
        keys = list(json.loads(emit_report(_sample(), "json")))
        assert keys[:3] == ["command", "arguments", "input_digest"]
        assert keys[-1] == "passed"


class TestEmitCsv:
    """Test the CSV emitter."""

    def test_tables(self):
        frame = pd.read_csv(io.BytesIO(emit_report(_sample(), "csv")), float_precision="round_trip")
        assert list(frame.columns) == ["table", "x", "mass"]
        assert frame["x"].tolist() == [1 / 3, np.pi]

    def test_payload_without_tables(self):
        report = Report(command="shift", payload={"shift": 0.125})
        report.add_flag("positive_after_shift", False)
        frame = pd.read_csv(io.BytesIO(emit_report(report, "csv")))
        rows = dict(zip(frame["key"], frame["value"]))
        assert float(rows["shift"]) == 0.125
        assert rows["verdict.positive_after_shift"] in (False, "False")

    def test_unknown_format(self):
        with pytest.raises(InputError) as exc_info:
            emit_report(_sample(), "xml")
        assert exc_info.value.error_code == "REPORT_FORMAT"
