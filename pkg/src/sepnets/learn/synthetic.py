"""Synthetic survey generators for tests, demos and calibration runs."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np

from .survey import (
    EVAL_VARS,
    LOCATIONS,
    REASON_BY_LABEL,
    OrderCondition,
    SurveyRecord,
    reasons_at,
)

_ORDERS = (OrderCondition.JUDGE_FIRST, OrderCondition.EVAL_FIRST)


def _clip(x, lo, hi) -> int:
    return int(min(max(round(float(x)), lo), hi))


def _record(subject, order, reason_label, evals: dict, judgment: bool) -> SurveyRecord:
    reason = REASON_BY_LABEL[reason_label]
    clipped = {e.column: _clip(evals.get(e.column, 0), e.low, e.high) for e in EVAL_VARS}
    return SurveyRecord(
        subject_id=subject,
        order_condition=order,
        location=reason.location,
        reason=reason.label,
        main_service=reason.main_service,
        already_waited=reason.already_waited,
        judgment=bool(judgment),
        **clipped,
    )


def survey_sample(n_subjects: int = 301, seed: int = 0) -> list[SurveyRecord]:
    """Loosely realistic survey: each subject is assigned a location and a
    question order and answers every scenario of that location.

    Welfare answers depend on the scenario, likelihood on the location, and
    the judgment on a noisy mix of the welfare answers.
    """
    rng = np.random.default_rng(seed)
    reason_effect = {}
    for loc in LOCATIONS:
        for r in reasons_at(loc):
            reason_effect[r] = rng.normal(0, 12)
    loc_effect = {"Deli": 10.0, "Bathroom": 0.0, "Airport": -5.0}
    records = []
    for i in range(n_subjects):
        loc = LOCATIONS[i % len(LOCATIONS)]
        order = _ORDERS[int(rng.integers(2))]
        subject = f"s{i + 1:04d}"
        bias = rng.normal(0, 8)
        for r in reasons_at(loc):
            base = reason_effect[r] + bias
            evals = {
                "global_welfare": base + rng.normal(0, 10),
                "first_person": base + rng.normal(0, 12),
                "middle_person": base + rng.normal(0, 12),
                "last_person": base + loc_effect[loc] + rng.normal(0, 12),
                "cutter": 25 + rng.normal(0, 15),
                "universalization": base + rng.normal(0, 15),
                "likelihood": 50 + base + 2 * loc_effect[loc] + rng.normal(0, 15),
            }
            score = 0.08 * (evals["global_welfare"] + evals["universalization"]) + rng.normal(0, 1)
            records.append(_record(subject, order, r, evals, score > 0))
    return records


def cell_sample(
    n_per_cell: int = 60,
    shift: float = 0.0,
    sd: float = 15.0,
    seed: int = 0,
    shifted_location: str = "Deli",
) -> list[SurveyRecord]:
    """One record per subject, ``n_per_cell`` subjects per location.

    Every evaluation answer is i.i.d. normal with standard deviation ``sd``
    (likelihood centred at 50, the rest at 0), except that likelihood is
    moved up by ``shift`` at ``shifted_location``.  Judgments are fair coin
    flips.  With ``shift=0`` this is the null generator.
    """
    rng = np.random.default_rng(seed)
    records = []
    k = 0
    for loc in LOCATIONS:
        reasons = reasons_at(loc)
        for i in range(n_per_cell):
            k += 1
            evals = {e.column: rng.normal(0, sd) for e in EVAL_VARS}
            evals["likelihood"] = 50 + rng.normal(0, sd) + (shift if loc == shifted_location else 0.0)
            records.append(_record(
                f"c{k:05d}", _ORDERS[i % 2], reasons[i % len(reasons)], evals, rng.random() < 0.5,
            ))
    return records


# Per-reason design constants of the structure fixture: ``s`` shifts the
# welfare answers, ``t`` is the judgment threshold.  ``s`` is symmetric
# about zero within each location, so no welfare variable differs between
# locations unless a location term is added on purpose.  The first four
# reasons of Deli and Bathroom share the threshold multiset {-2, 0, 4, 6}.
_S = {
    "Spoon": -11, "Water": -9, "Soda": 7, "Catering Order": -5, "Fasted": -3, "Diabetic": -7,
    "Oven Repair": 1, "Soap": -1, "Toilet Paper": 3, "Spouse": 5, "Father": 9, "Sandwich": 11,
    "Wash Hands": -4, "Cleaner": -6, "Vomit": -2, "Get Jacket": 2, "Friend": 4, "Aid": 0,
    "Use Bathroom": 6,
    "Departure in 20min": -5, "Crying Baby": -3, "Forgot Jacket": 1, "Cafe Worker": 3,
    "Go to Bathroom": -1, "Departure in 3h": 5,
}
_T = {
    "Spoon": 6, "Water": 4, "Soda": -2, "Catering Order": 0, "Fasted": 2, "Diabetic": 4,
    "Oven Repair": 2, "Soap": 0, "Toilet Paper": 2, "Spouse": -2, "Father": -4, "Sandwich": -8,
    "Wash Hands": 4, "Cleaner": 6, "Vomit": 0, "Get Jacket": -2, "Friend": -4, "Aid": 2,
    "Use Bathroom": -8,
    "Departure in 20min": -4, "Crying Baby": -6, "Forgot Jacket": -8, "Cafe Worker": -6,
    "Go to Bathroom": -4, "Departure in 3h": -8,
}
_GRID = tuple(range(-9, 10, 2))


def structured_survey() -> list[SurveyRecord]:
    """Deterministic balanced survey with a known dependency structure.

    Each location has 100 subjects on a 10x10 grid of latent traits
    ``(z, w)``; every subject answers every scenario of their location.

    * every welfare answer except Cutter moves with the scenario and with
      ``z``; judgment is ``z < t`` for a per-scenario threshold ``t``, so
      those answers are tied to the judgment;
    * Cutter depends on ``w`` only, hence neither on the scenario nor on
      the judgment, but is higher at the Deli;
    * LastPerson and Likelihood are also higher at the Deli;
    * judgment rates of the Airport's first four scenarios are lower than
      those of the other two locations, which match exactly.

    Every null comparison is exactly balanced, so the learned graph does
    not depend on the significance level within a wide range.
    """
    records = []
    k = 0
    for loc in LOCATIONS:
        deli = 1 if loc == "Deli" else 0
        for z in _GRID:
            for wi, w in enumerate(_GRID):
                k += 1
                subject = f"p{k:04d}"
                order = _ORDERS[wi % 2]
                for r in reasons_at(loc):
                    s = _S[r]
                    evals = {
                        "global_welfare": 2 * s + 2 * z,
                        "first_person": s + 2 * z,
                        "middle_person": s + 2 * z,
                        "last_person": s + 2 * z + 10 * deli,
                        "cutter": 20 * deli + 2 * w,
                        "universalization": 2 * s + 2 * z,
                        "likelihood": 50 + s + 2 * z + 15 * deli,
                    }
                    records.append(_record(subject, order, r, evals, z < _T[r]))
    return records


def plant_order_effect(records: Sequence[SurveyRecord], reason: str) -> list[SurveyRecord]:
    """Flip every judgment of ``reason`` given in the evaluate-first order."""
    return [
        replace(r, judgment=not r.judgment)
        if r.reason == reason and r.order_condition is OrderCondition.EVAL_FIRST
        else r
        for r in records
    ]
