"""CSV reports of a learning run.

Three layouts are fixed byte for byte:

* location-pair p-values per evaluation variable (``Scenario,Deli-Bath,...``);
* location-pair test on the judgment (``Scenario,p-value,Rejected``);
* the order-effect screen (``Scenario,PREFthenEVAL,EVALthenPREF,p-value,Rejected``).

The matching ``read_*`` functions parse the same layouts back into
:class:`TestResult` objects so that the edge rule can be replayed on
p-values taken from elsewhere.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Mapping, Sequence

from ..stats import TestResult
from .pipeline import (
    JUDGMENT,
    NH1_LABELS,
    NH3_LABELS,
    EdgeReport,
    OrderEffectRow,
    OrderEffectScreen,
    decide,
)
from .survey import EVAL_BY_NAME, EVAL_VARS

NA = "NA"
LOCATION_EV_HEADER = ("Scenario", *NH1_LABELS)
LOCATION_JUDGMENT_HEADER = ("Scenario", "p-value", "Rejected")
ORDER_EFFECTS_HEADER = ("Scenario", "PREFthenEVAL", "EVALthenPREF", "p-value", "Rejected")
_TITLE_TO_NAME = {e.title: e.name for e in EVAL_VARS}


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def p4(p: float) -> str:
    return f"{p:.4f}"


def p3e(p: float) -> str:
    return f"{p:.3E}"


def _find(edges: Sequence[EdgeReport], family: str, source: str, target: str) -> EdgeReport | None:
    for e in edges:
        if e.family == family and e.source == source and e.target == target:
            return e
    return None


def location_ev_csv(cells: Mapping[str, Mapping[str, TestResult]]) -> str:
    """Location-pair p-values, one row per evaluation variable.

    ``cells[name][pair_label]``; absent cells (skipped tests) print ``NA``.
    """
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(LOCATION_EV_HEADER)
    for ev in EVAL_VARS:
        row = cells.get(ev.name, {})
        w.writerow([ev.title, *(p4(row[lab].p_value) if lab in row else NA for lab in NH1_LABELS)])
    return buf.getvalue()


def location_ev_from_edges(edges: Sequence[EdgeReport]) -> str:
    cells = {}
    for ev in EVAL_VARS:
        e = _find(edges, "NH1", "Location", ev.name)
        cells[ev.name] = dict(e.tests) if e else {}
    return location_ev_csv(cells)


def location_judgment_csv(rows: Sequence[tuple[str, TestResult]]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(LOCATION_JUDGMENT_HEADER)
    for label, r in rows:
        w.writerow([label, p3e(r.p_value), str(r.reject)])
    return buf.getvalue()


def location_judgment_from_edges(edges: Sequence[EdgeReport]) -> str:
    e = _find(edges, "NH3", "Location", JUDGMENT)
    got = dict(e.tests) if e else {}
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(LOCATION_JUDGMENT_HEADER)
    for label in NH3_LABELS:
        if label in got:
            w.writerow([label, p3e(got[label].p_value), str(got[label].reject)])
        else:
            w.writerow([label, NA, NA])
    return buf.getvalue()


def mean_sd(summary: tuple[int, float, float]) -> str:
    _, m, sd = summary
    return f"{m:.4f} ({sd:.4f})"


def order_effects_csv(rows: Sequence[OrderEffectRow] | OrderEffectScreen) -> str:
    """Order-effect screen; the p-value is printed with four decimals."""
    if isinstance(rows, OrderEffectScreen):
        rows = rows.rows
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(ORDER_EFFECTS_HEADER)
    for r in rows:
        w.writerow([r.code, mean_sd(r.judge_first), mean_sd(r.eval_first), p4(r.result.p_value), str(r.result.reject)])
    return buf.getvalue()


def tests_csv(edges: Sequence[EdgeReport]) -> str:
    """Every individual test, in canonical order."""
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["family", "source", "target", "comparison", "method", "statistic", "p_value", "n", "rejected"])
    for e in edges:
        for label, r in e.tests:
            stat = "" if math.isnan(r.statistic) else f"{r.statistic:g}"
            w.writerow([e.family, e.source, e.target, label, r.method.value, stat,
                        f"{r.p_value:.6E}", r.n_effective, str(r.reject)])
    return buf.getvalue()


def edges_csv(edges: Sequence[EdgeReport]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["family", "source", "target", "tests", "rejected", "skipped", "edge", "rule"])
    for e in edges:
        w.writerow([e.family, e.source, e.target, len(e.tests), e.n_rejected, len(e.skipped),
                    str(e.edge_present), e.rule])
    return buf.getvalue()


# -- reading the layouts back -------------------------------------------------------


def _rows(text: str, header: tuple[str, ...]):
    reader = csv.reader(io.StringIO(text))
    got = tuple(next(reader))
    if got != header:
        raise ValueError(f"expected header {header}, got {got}")
    return [row for row in reader if row]


def read_location_ev(text: str, alpha: float = 0.05) -> dict[str, dict[str, TestResult]]:
    """``{variable name: {pair label: TestResult}}`` from a location-pair table."""
    out = {}
    for row in _rows(text, LOCATION_EV_HEADER):
        name = _TITLE_TO_NAME.get(row[0], row[0])
        if name not in EVAL_BY_NAME:
            raise ValueError(f"unknown evaluation variable {row[0]!r}")
        out[name] = {
            lab: TestResult.reported(float(cell), alpha)
            for lab, cell in zip(NH1_LABELS, row[1:])
            if cell != NA
        }
    return out


def read_location_judgment(text: str, alpha: float = 0.05) -> list[tuple[str, TestResult]]:
    return [(row[0], TestResult.reported(float(row[1]), alpha)) for row in _rows(text, LOCATION_JUDGMENT_HEADER)]


def read_order_effects(text: str, alpha: float = 0.05) -> list[tuple[str, TestResult]]:
    return [(row[0], TestResult.reported(float(row[3]), alpha)) for row in _rows(text, ORDER_EFFECTS_HEADER)]


def replay_edges(
    location_ev: Mapping[str, Mapping[str, TestResult]],
    location_judgment: Sequence[tuple[str, TestResult]],
    rule: str = "any",
) -> set[tuple[str, str]]:
    """Location edges implied by reported p-values under ``rule``."""
    edges = {("Location", name) for name, cells in location_ev.items() if decide(list(cells.items()), rule)}
    if decide(list(location_judgment), rule):
        edges.add(("Location", JUDGMENT))
    return edges
