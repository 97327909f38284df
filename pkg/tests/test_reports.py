"""Tests for experiment reports."""

import json
import math
import tempfile
from pathlib import Path

import pytest

from schurlab.core.errors import ReportIOError
from schurlab.core.reports import emit_report, format_value, load_report, read_csv_rows
from schurlab.models.report import REPORT_SCHEMA, ExperimentReport


def sample_report() -> ExperimentReport:
    report = ExperimentReport(
        suite="rs1",
        columns=("trial", "ratio", "certified", "note"),
        summary={"violations": 1, "max_ratio": 0.1},
        config={"seed": 3},
        tool_version="0.1.0",
        wall_time=12.5,
    )
    report.add_row(trial=0, ratio=0.1, certified=True, note=None)
    report.add_row(trial=1, ratio=math.nan, certified=False, note="x")
    return report


class TestFormatValue:
    """Tests for CSV cell formatting."""

    def test_values(self) -> None:
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(math.nan) == "nan"
        assert format_value(-math.inf) == "-inf"
        assert format_value(None) == ""
        assert format_value(3) == "3"
        assert format_value("gh") == "gh"


class TestExperimentReport:
    """Tests for ExperimentReport."""

    def test_add_row_orders_columns(self) -> None:
        report = sample_report()

        assert list(report.rows[0]) == ["trial", "ratio", "certified", "note"]
        assert report.violations == 1

    def test_add_row_missing_column(self) -> None:
        with pytest.raises(KeyError, match="missing"):
            sample_report().add_row(trial=2)

    def test_to_dict_omits_wall_time(self) -> None:
        data = sample_report().to_dict()

        assert "wall_time" not in data
        assert data["schema"] == REPORT_SCHEMA
        assert data["columns"] == ["trial", "ratio", "certified", "note"]


class TestEmitReport:
    """Tests for emit_report and load_report."""

    def test_csv(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            path = emit_report(sample_report(), Path(tmpdir) / "nested" / "rs1.csv")
            text = path.read_text()
            header, rows = read_csv_rows(path)

        assert text.splitlines()[0] == "trial,ratio,certified,note"
        assert header == ["trial", "ratio", "certified", "note"]
        assert rows[0] == {"trial": "0", "ratio": "0.10000000000000001", "certified": "true", "note": ""}
        assert rows[1]["ratio"] == "nan"
        assert "\r" not in text

    def test_empty_csv_has_header(self) -> None:
        report = ExperimentReport(suite="rs1", columns=("trial", "violation"))

        with tempfile.TemporaryDirectory() as tmpdir:
            path = emit_report(report, Path(tmpdir) / "empty.csv")

            assert path.read_text() == "trial,violation\n"

    def test_json_round_trip(self) -> None:
        report = sample_report()

        with tempfile.TemporaryDirectory() as tmpdir:
            path = emit_report(report, Path(tmpdir) / "rs1.json", "json")
            loaded = load_report(path)

        assert loaded.suite == "rs1"
        assert loaded.columns == report.columns
        assert loaded.rows[0] == report.rows[0]
        assert math.isnan(loaded.rows[1]["ratio"])
        assert loaded.summary == report.summary
        assert loaded.wall_time == 0.0

    def test_wall_time_does_not_change_bytes(self) -> None:
        a = sample_report()
        b = sample_report()
        b.wall_time = 99.0

        with tempfile.TemporaryDirectory() as tmpdir:
            for fmt in ("csv", "json"):
                pa = emit_report(a, Path(tmpdir) / f"a.{fmt}", fmt)
                pb = emit_report(b, Path(tmpdir) / f"b.{fmt}", fmt)

                assert pa.read_bytes() == pb.read_bytes()

    def test_unknown_format(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ReportIOError, match="format"):
                emit_report(sample_report(), Path(tmpdir) / "r.xml", "xml")

    def test_unwritable_path(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            blocker = Path(tmpdir) / "file"
            blocker.write_text("")

            with pytest.raises(ReportIOError, match="cannot write"):
                emit_report(sample_report(), blocker / "r.csv")

    def test_load_missing(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ReportIOError, match="cannot read"):
                load_report(Path(tmpdir) / "missing.json")

    def test_load_not_a_report(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "r.json"
            path.write_text(json.dumps({"rows": []}))

            with pytest.raises(ReportIOError, match="not a JSON report"):
                load_report(path)
