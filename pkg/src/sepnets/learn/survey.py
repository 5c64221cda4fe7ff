"""Survey records: one subject's answers for one line-cutting scenario."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import astuple, dataclass, fields
from enum import Enum
from typing import Iterable, NamedTuple

from ..errors import SurveyFormatError

LOCATIONS = ("Deli", "Bathroom", "Airport")


class Reason(NamedTuple):
    label: str
    location: str
    code: str
    main_service: bool
    already_waited: bool


# label, location, short code used in the order-effect table, main service, already waited
REASONS = tuple(
    Reason(*row)
    for row in [
        ("Spoon", "Deli", "DFO_SP", False, True),
        ("Water", "Deli", "DFO_WA", False, True),
        ("Soda", "Deli", "DFO_SO", True, True),
        ("Catering Order", "Deli", "DFO_CA", False, False),
        ("Fasted", "Deli", "DFO_CO", True, False),
        ("Diabetic", "Deli", "DFO_SU", True, False),
        ("Oven Repair", "Deli", "DFO_BR", False, False),
        ("Soap", "Deli", "DFO_HS", False, False),
        ("Toilet Paper", "Deli", "DFO_TP", False, False),
        ("Spouse", "Deli", "DFO_MA", True, False),
        ("Father", "Deli", "DFO_FA", True, False),
        ("Sandwich", "Deli", "DFO_SW", True, False),
        ("Wash Hands", "Bathroom", "BFO_HA", False, False),
        ("Cleaner", "Bathroom", "BFO_CL", False, False),
        ("Vomit", "Bathroom", "BFO_TU", True, False),
        ("Get Jacket", "Bathroom", "BFO_JA", False, True),
        ("Friend", "Bathroom", "BFO_FR", True, False),
        ("Aid", "Bathroom", "BFO_EL", True, False),
        ("Use Bathroom", "Bathroom", "BFO_BR", True, False),
        ("Departure in 20min", "Airport", "AFO_MN", True, False),
        ("Crying Baby", "Airport", "AFO_BA", True, False),
        ("Forgot Jacket", "Airport", "AFO_JA", False, True),
        ("Cafe Worker", "Airport", "AFO_CA", False, False),
        ("Go to Bathroom", "Airport", "AFO_BR", True, True),
        ("Departure in 3h", "Airport", "AFO_HR", True, False),
    ]
)
REASON_BY_LABEL = {r.label: r for r in REASONS}
REASON_BY_CODE = {r.code: r for r in REASONS}
REASON_LABELS = tuple(r.label for r in REASONS)


def reasons_at(location: str) -> tuple[str, ...]:
    return tuple(r.label for r in REASONS if r.location == location)


class OrderCondition(str, Enum):
    JUDGE_FIRST = "JudgeFirst"
    EVAL_FIRST = "EvalFirst"


class EvalVar(NamedTuple):
    column: str
    name: str  # variable name in learned nets
    title: str  # row label in the report tables
    low: int
    high: int


EVAL_VARS = (
    EvalVar("global_welfare", "GlobalWelfare", "Global Welfare", -50, 50),
    EvalVar("first_person", "FirstPerson", "First Person Welfare", -50, 50),
    EvalVar("middle_person", "MiddlePerson", "Middle Person Welfare", -50, 50),
    EvalVar("last_person", "LastPerson", "Last Person Welfare", -50, 50),
    EvalVar("cutter", "Cutter", "Line Cutter Welfare", -50, 50),
    EvalVar("universalization", "Universalization", "Universalization", -50, 50),
    EvalVar("likelihood", "Likelihood", "Likelihood", 0, 100),
)
EVAL_BY_NAME = {e.name: e for e in EVAL_VARS}

HEADER = (
    "subject_id",
    "order_condition",
    "location",
    "reason",
    "main_service",
    "already_waited",
    *(e.column for e in EVAL_VARS),
    "judgment",
)


@dataclass(frozen=True)
class SurveyRecord:
    subject_id: str
    order_condition: OrderCondition
    location: str
    reason: str
    main_service: bool
    already_waited: bool
    global_welfare: int
    first_person: int
    middle_person: int
    last_person: int
    cutter: int
    universalization: int
    likelihood: int
    judgment: bool

    def evaluation(self, name: str) -> int:
        return getattr(self, EVAL_BY_NAME[name].column)

    def scenario_value(self, name: str) -> str:
        """Value of a scenario variable of the learned net, as a domain label."""
        if name == "Reason":
            return self.reason
        if name == "Location":
            return self.location
        if name == "MainService":
            return str(self.main_service)
        if name == "AlreadyWaited":
            return str(self.already_waited)
        raise KeyError(name)


_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


def _bool(raw: str, col: str) -> bool:
    s = raw.strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    raise ValueError(f"{col}={raw!r} is not a boolean (0/1)")


def _int_in(raw: str, col: str, lo: int, hi: int) -> int:
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{col}={raw!r} is not a number") from None
    if value != int(value):
        raise ValueError(f"{col}={raw!r} is not an integer")
    if not lo <= value <= hi:
        raise ValueError(f"{col}={raw!r} is outside [{lo}, {hi}]")
    return int(value)


def _record(row: dict) -> SurveyRecord:
    try:
        order = OrderCondition(row["order_condition"].strip())
    except ValueError:
        raise ValueError(f"order_condition={row['order_condition']!r} is not JudgeFirst/EvalFirst") from None
    location = row["location"].strip()
    if location not in LOCATIONS:
        raise ValueError(f"location={location!r} is not one of {LOCATIONS}")
    raw_reason = row["reason"].strip()
    reason = REASON_BY_LABEL.get(raw_reason) or REASON_BY_CODE.get(raw_reason)
    if reason is None:
        raise ValueError(f"reason={raw_reason!r} is not a known scenario")
    if reason.location != location:
        raise ValueError(f"reason {reason.label!r} belongs to {reason.location}, not {location}")
    subject = row["subject_id"].strip()
    if not subject:
        raise ValueError("subject_id is empty")
    evals = {e.column: _int_in(row[e.column], e.column, e.low, e.high) for e in EVAL_VARS}
    return SurveyRecord(
        subject_id=subject,
        order_condition=order,
        location=location,
        reason=reason.label,
        main_service=_bool(row["main_service"], "main_service"),
        already_waited=_bool(row["already_waited"], "already_waited"),
        judgment=_bool(row["judgment"], "judgment"),
        **evals,
    )


def parse_survey(text: str) -> list[SurveyRecord]:
    """Parse survey CSV text; see :data:`HEADER` for the required columns.

    All bad rows are collected and reported together with their 1-based line
    numbers (the header is line 1).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SurveyFormatError("empty survey file") from None
    header = [h.strip() for h in header]
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]
    if tuple(header) != HEADER:
        raise SurveyFormatError(
            "header mismatch: expected " + ",".join(HEADER) + " got " + ",".join(header)
        )
    records, problems = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(HEADER):
            problems.append((lineno, f"expected {len(HEADER)} fields, got {len(row)}"))
            continue
        try:
            records.append(_record(dict(zip(HEADER, row))))
        except ValueError as exc:
            problems.append((lineno, str(exc)))
    if problems:
        detail = "; ".join(f"row {n}: {msg}" for n, msg in problems[:20])
        raise SurveyFormatError(f"{len(problems)} invalid rows: {detail}", problems)
    return records


def ingest(source) -> list[SurveyRecord]:
    """Read and validate a survey CSV from a path or an open text file."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return parse_survey(fh.read())
    return parse_survey(source.read())


def write_survey(records: Iterable[SurveyRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    names = [f.name for f in fields(SurveyRecord)]
    assert tuple(names) == HEADER
    for r in records:
        row = []
        for v in astuple(r):
            if isinstance(v, bool):
                row.append(int(v))
            elif isinstance(v, Enum):
                row.append(v.value)
            else:
                row.append(v)
        w.writerow(row)
    return buf.getvalue()
