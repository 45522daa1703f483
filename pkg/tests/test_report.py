"""Tests for the CSV, JSON and SVG report writers."""

import csv
import io
import json
import xml.etree.ElementTree as ET

from smrlab import (
    CSV_COLUMNS,
    NormSpec,
    PathRow,
    RatioReport,
    report_summary,
    write_json,
    write_report_csv,
    write_svg_chart,
)


def toy_report(experiment_id="toy", n=3):
    rows = [
        PathRow(path_id=i, J=1.0 + i, sol_norm=0.5 + i, ratio=(0.5 + i) / (1.0 + i), sup_norm=0.1)
        for i in range(n)
    ]
    return RatioReport(
        experiment_id=experiment_id,
        spec=NormSpec(p=4, q=2, sigma=-1.0, kappa=0.0),
        K=16,
        M=32,
        n_noise=2,
        n_paths=n,
        margin=0.875,
        compliant=True,
        J=2.0,
        sol_norm=1.5,
        ratio=0.75,
        ratio_p95=0.9,
        sup_norm=0.1,
        rows=rows,
    )


def test_csv_columns_exact():
    assert CSV_COLUMNS == [
        "experiment_id",
        "path_id",
        "p",
        "q",
        "sigma",
        "kappa",
        "K",
        "M",
        "N_noise",
        "margin",
        "J",
        "sol_norm",
        "ratio",
    ]


def test_csv_rows_and_header():
    buf = io.StringIO()
    write_report_csv(toy_report(), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    reader = csv.DictReader(io.StringIO(buf.getvalue()))
    rows = list(reader)
    assert [r["path_id"] for r in rows] == ["0", "1", "2"]
    assert all(r["experiment_id"] == "toy" for r in rows)
    assert rows[0]["K"] == "16" and rows[0]["M"] == "32" and rows[0]["N_noise"] == "2"


def test_csv_float_format_roundtrips():
    rep = toy_report()
    buf = io.StringIO()
    write_report_csv(rep, buf)
    row = next(csv.DictReader(io.StringIO(buf.getvalue())))
    # .17g renders doubles exactly: parsing back must be lossless
    assert float(row["ratio"]) == rep.rows[0].ratio
    assert float(row["margin"]) == rep.margin
    assert row["ratio"] == format(rep.rows[0].ratio, ".17g")


def test_csv_timestamp_line_optional():
    buf = io.StringIO()
    write_report_csv(toy_report(), buf, timestamp="2026-01-01T00:00:00")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# generated 2026-01-01T00:00:00"
    assert lines[1] == ",".join(CSV_COLUMNS)
    plain = io.StringIO()
    write_report_csv(toy_report(), plain)
    assert not plain.getvalue().startswith("#")


def test_csv_multiple_reports_concatenate():
    buf = io.StringIO()
    write_report_csv([toy_report("a", 2), toy_report("b", 2)], buf)
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert [r["experiment_id"] for r in rows] == ["a", "a", "b", "b"]


def test_summary_json_schema():
    doc = report_summary(toy_report())
    assert doc["schema_version"] == "1"
    assert len(doc["experiments"]) == 1
    exp = doc["experiments"][0]
    for key in (
        "experiment_id",
        "p",
        "q",
        "sigma",
        "kappa",
        "K",
        "M",
        "N_noise",
        "n_paths",
        "margin",
        "compliant",
        "J",
        "sol_norm",
        "ratio",
        "ratio_p95",
        "sup_norm",
    ):
        assert key in exp
    assert exp["compliant"] is True
    buf = io.StringIO()
    write_json(doc, buf)
    assert json.loads(buf.getvalue()) == doc
    assert buf.getvalue().endswith("\n")


def test_svg_is_valid_xml_with_series():
    buf = io.StringIO()
    write_svg_chart(
        [("ratio", [0, 1, 2], [0.5, 0.6, 0.55]), ("p95", [0, 1, 2], [0.7, 0.8, 0.75])],
        buf,
        title="ratio vs refinement",
        xlabel="level",
        ylabel="ratio",
    )
    root = ET.fromstring(buf.getvalue())
    assert root.tag.endswith("svg")
    ns = "{http://www.w3.org/2000/svg}"
    polylines = root.findall(f"{ns}polyline")
    assert len(polylines) == 2
    texts = [t.text for t in root.findall(f"{ns}text")]
    assert "ratio vs refinement" in texts
    assert "level" in texts and "ratio" in texts


def test_svg_degenerate_series():
    # constant series and a single point must not divide by zero
    buf = io.StringIO()
    write_svg_chart([("flat", [0, 1], [2.0, 2.0]), ("pt", [3], [2.0])], buf, "t", "x", "y")
    ET.fromstring(buf.getvalue())
