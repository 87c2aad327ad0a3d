# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import pytest

from src.pooled_stego_lab.errors import ConfigFileError
from src.pooled_stego_lab.report import (
    Report,
    ReportCell,
    render_tables,
    report_from_dict,
    table_rows,
)


@pytest.fixture
def report():
    cells = [
        ReportCell(pooling, strategy, b, pe, 0.0, (pe, pe))
        for pooling, offset in (("disc", 0.0), ("mean", 0.1))
        for strategy in ("linear", "greedy")
        for b, pe in ((2, 0.3 + offset), (10, 0.1 + offset))
    ]
    return Report({"runs": 2}, cells, {"skipped": {}})


def test_cell_lookup(report):
    assert report.cell("mean", "greedy", 10).pe_mean == pytest.approx(0.2)
    with pytest.raises(KeyError):
        report.cell("max", "greedy", 10)


def test_table_rows(report):
    rows = table_rows(report)
    assert len(rows) == 8 + 4
    assert rows[0]["pe_runs"] == "0.3;0.3"
    assert rows[0]["pooling"] == "disc"
    averages = [row for row in rows if row["strategy"] == "average"]
    assert [(row["pooling"], row["bag_size"]) for row in averages] == [
        ("disc", 2),
        ("disc", 10),
        ("mean", 2),
        ("mean", 10),
    ]


def test_render_tables_one_block_per_pooling(report):
    text = render_tables(report)
    blocks = text.strip().split("\n\n")
    assert [block.splitlines()[0] for block in blocks] == ["P_e, g_disc", "P_e, g_mean"]
    header = blocks[0].splitlines()[1]
    assert header.index("b=2") < header.index("b=10")
    assert "linear" in blocks[0]
    assert "0.3000" in blocks[0]
    assert "0.4000" in blocks[1]
    assert blocks[0].splitlines()[-1].split() == ["average", "0.3000", "0.1000"]


def test_missing_cells_render_as_dashes():
    cells = [
        ReportCell("max", "ims", 2, 0.25, 0.0, (0.25,)),
        ReportCell("max", "dels", 4, 0.5, 0.0, (0.5,)),
    ]
    report = Report({}, cells)
    lines = render_tables(report).splitlines()
    ims = next(line for line in lines if line.startswith("ims"))
    assert ims.split()[1:] == ["0.2500", "-"]


def test_report_round_trips_through_dict(report):
    again = report_from_dict(report.to_dict())
    assert again.to_dict() == report.to_dict()


def test_report_from_a_bad_dict():
    with pytest.raises(ConfigFileError):
        report_from_dict({"cells": [{"pooling": "disc"}]})


def test_strategy_average_is_taken_run_by_run():
    cells = [
        ReportCell("clair", "greedy", 2, 0.2, 0.01, (0.1, 0.3)),
        ReportCell("clair", "dels", 2, 0.4, 0.0, (0.4, 0.4)),
        ReportCell("clair", "greedy", 4, 0.1, 0.0, (0.1, 0.1)),
    ]
    report = Report({}, cells)
    average = report.average("clair", 2)
    assert average.strategy == "average"
    assert average.pe_runs == pytest.approx((0.25, 0.35))
    assert average.pe_mean == pytest.approx(0.3)
    assert average.pe_var == pytest.approx(0.0025)
    assert report.average("clair", 4).pe_mean == pytest.approx(0.1)
    with pytest.raises(KeyError):
        report.average("disc", 2)


def test_averages_are_written_to_the_dict(report):
    data = report.to_dict()
    assert len(data["averages"]) == 4
    assert {a["strategy"] for a in data["averages"]} == {"average"}
    assert report_from_dict(data).average("mean", 10).pe_mean == pytest.approx(0.2)
