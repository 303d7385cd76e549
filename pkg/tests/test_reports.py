"""Report rendering and parsing round trips."""

import pytest

from logsigrnn.reports import RunReport, parse_report, render_report


def test_round_trip():
    report = RunReport(
        "demo",
        seed=7,
        config={"width": 3, "mode": "drop"},
        metrics={"accuracy": 0.9875, "samples": 200.0},
        timings={"total_seconds": 1.5},
    )
    report.add_table("rates", ["rate", "accuracy"], [[0.2, 0.95], [0.4, 0.9]])
    back = parse_report(render_report(report))
    assert back.command == "demo"
    assert back.seed == 7
    assert back.config == {"width": "3", "mode": "drop"}
    assert back.metrics["accuracy"] == 0.9875
    assert back.timings["total_seconds"] == 1.5
    columns, rows = back.tables["rates"]
    assert columns == ["rate", "accuracy"]
    assert [float(x) for x in rows[1]] == [0.4, 0.9]


def test_float_cells_survive_exactly():
    report = RunReport("demo")
    value = 0.1 + 0.2
    report.add_table("t", ["x"], [[value]])
    back = parse_report(render_report(report))
    assert float(back.tables["t"][1][0][0]) == value


def test_rejects_non_report_text():
    with pytest.raises(ValueError, match="magic"):
        parse_report("hello\n")


def test_rejects_whitespace_cells():
    report = RunReport("demo")
    with pytest.raises(ValueError, match="whitespace"):
        report.add_table("t", ["x"], [["a b"]])


def test_rendering_is_deterministic():
    kwargs = dict(
        config={"b": 1, "a": 2}, metrics={"z": 1.0, "y": 2.0}, timings={"t": 0.1}
    )
    assert render_report(RunReport("c", **kwargs)) == render_report(RunReport("c", **kwargs))
