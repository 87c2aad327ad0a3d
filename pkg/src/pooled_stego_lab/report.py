# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .constants import POOLINGS, STRATEGY_AVERAGE
from .errors import ConfigFileError


@dataclass(frozen=True)
class ReportCell:
    pooling: str
    strategy: str
    bag_size: int
    pe_mean: float
    pe_var: float
    pe_runs: Tuple[float, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pooling": self.pooling,
            "strategy": self.strategy,
            "bag_size": self.bag_size,
            "pe_mean": self.pe_mean,
            "pe_var": self.pe_var,
            "pe_runs": list(self.pe_runs),
        }


@dataclass(frozen=True)
class Report:
    config: Dict[str, Any]
    cells: List[ReportCell]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def cell(self, pooling: str, strategy: str, bag_size: int) -> ReportCell:
        for c in self.cells:
            if (c.pooling, c.strategy, c.bag_size) == (pooling, strategy, bag_size):
                return c
        raise KeyError((pooling, strategy, bag_size))

    @property
    def averages(self) -> List[ReportCell]:
        return strategy_averages(self.cells)

    def average(self, pooling: str, bag_size: int) -> ReportCell:
        for c in self.averages:
            if (c.pooling, c.bag_size) == (pooling, bag_size):
                return c
        raise KeyError((pooling, bag_size))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "cells": [c.to_dict() for c in self.cells],
            "averages": [c.to_dict() for c in self.averages],
            "metadata": self.metadata,
        }


def strategy_averages(cells: Sequence[ReportCell]) -> List[ReportCell]:
    """
    P_e averaged over strategies for every (pooling, bag size), run by run
    when all cells hold the same number of runs.
    """
    groups: Dict[Tuple[str, int], List[ReportCell]] = {}
    for c in cells:
        groups.setdefault((c.pooling, c.bag_size), []).append(c)
    averages = []
    for (pooling, bag_size), group in groups.items():
        if len({len(c.pe_runs) for c in group}) == 1 and group[0].pe_runs:
            runs = np.mean([c.pe_runs for c in group], axis=0)
        else:
            runs = np.array([np.mean([c.pe_mean for c in group])])
        averages.append(
            ReportCell(
                pooling=pooling,
                strategy=STRATEGY_AVERAGE,
                bag_size=bag_size,
                pe_mean=float(np.mean(runs)),
                pe_var=float(np.var(runs)),
                pe_runs=tuple(float(v) for v in runs),
            )
        )
    return averages


def report_from_dict(data: Dict[str, Any], source: str = "<report>") -> Report:
    try:
        cells = [
            ReportCell(
                pooling=str(c["pooling"]),
                strategy=str(c["strategy"]),
                bag_size=int(c["bag_size"]),
                pe_mean=float(c["pe_mean"]),
                pe_var=float(c["pe_var"]),
                pe_runs=tuple(float(v) for v in c["pe_runs"]),
            )
            for c in data["cells"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigFileError(source, f"not a report: {e!r}") from e
    return Report(dict(data.get("config", {})), cells, dict(data.get("metadata", {})))


def table_rows(report: Report) -> List[Dict[str, Any]]:
    """One CSV row per cell and per strategy average, runs joined by ';'"""
    return [
        {
            "pooling": c.pooling,
            "strategy": c.strategy,
            "bag_size": c.bag_size,
            "pe_mean": repr(c.pe_mean),
            "pe_var": repr(c.pe_var),
            "pe_runs": ";".join(repr(v) for v in c.pe_runs),
        }
        for c in report.cells + report.averages
    ]


def _ordered(values) -> List:
    seen: List = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def render_tables(report: Report) -> str:
    """
    Aligned text tables of mean P_e, one per pooling function: strategies in
    rows, bag sizes in columns, closed by the average over strategies.
    """
    sizes = sorted(_ordered(c.bag_size for c in report.cells))
    strategies = _ordered(c.strategy for c in report.cells)
    poolings = [p for p in POOLINGS if any(c.pooling == p for c in report.cells)]
    by_key = {
        (c.pooling, c.strategy, c.bag_size): c
        for c in report.cells + report.averages
    }
    name_width = max([len("strategy")] + [len(s) for s in strategies])
    col_width = max(8, max(len(f"b={b}") for b in sizes))

    blocks = []
    for pooling in poolings:
        lines = [f"P_e, g_{pooling}"]
        header = "strategy".ljust(name_width) + "".join(
            f"b={b}".rjust(col_width + 2) for b in sizes
        )
        lines.append(header)
        lines.append("-" * len(header))
        for strategy in strategies + [STRATEGY_AVERAGE]:
            if strategy == STRATEGY_AVERAGE:
                lines.append("-" * len(header))
            cells = []
            for b in sizes:
                cell = by_key.get((pooling, strategy, b))
                text = "-" if cell is None else f"{cell.pe_mean:.4f}"
                cells.append(text.rjust(col_width + 2))
            lines.append(strategy.ljust(name_width) + "".join(cells))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
