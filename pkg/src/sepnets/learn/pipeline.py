"""From survey records to a SEP-net.

The structure comes from four families of pairwise tests:

* NH1  Location -> evaluation variable, one test per location pair;
* NH2  Reason -> evaluation variable, one test per reason pair;
* NH3  Location -> judgment, on a fixed subset of reasons per location;
* NH4  evaluation variable -> judgment, comparing quartile buckets of the
  variable within each scenario.

An edge is drawn when the family's tests clear the aggregation rule
(default: at least one rejection).  Evaluation functions are medians of the
matching responses and the judgment cp-table is estimated from the
empirical yes-rate per context.
"""

from __future__ import annotations

import itertools
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from ..errors import MissingEfEntry
from ..prefmodel import (
    CpStatement,
    EvaluationFunction,
    NetDocument,
    VarClass,
    VariableSpec,
)
from ..stats import (
    BUCKET_LABELS,
    TestResult,
    bonferroni,
    bucket_label,
    median,
    quartile_boundaries,
    rank_sum,
    signed_rank,
)
from .survey import (
    EVAL_BY_NAME,
    EVAL_VARS,
    LOCATIONS,
    REASON_BY_LABEL,
    REASON_LABELS,
    REASONS,
    OrderCondition,
    SurveyRecord,
    reasons_at,
)

log = logging.getLogger(__name__)

JUDGMENT = "Judgment"
YES, NO = "yes", "no"
LOCATION_PAIRS = (("Deli", "Bathroom"), ("Deli", "Airport"), ("Airport", "Bathroom"))
NH1_LABELS = ("Deli-Bath", "Deli-Airpt", "Airpt-Bath")
NH3_LABELS = ("Deli-Bath", "Deli-Air", "Air-Bath")
# first four reasons of each location in table order
DEFAULT_NH3_REASONS = {loc: reasons_at(loc)[:4] for loc in LOCATIONS}
EXTRA_SCENARIO_VARS = ("MainService", "AlreadyWaited")


@dataclass(frozen=True)
class LearnConfig:
    """Knobs of :func:`infer_structure`.

    ``between_test`` compares different subjects (locations, buckets, order
    conditions); ``within_test`` compares reasons inside one location, where
    the same subjects answered every reason, so pairing by subject works.
    """

    between_test: str = "rank_sum"
    within_test: str = "signed_rank"
    rule: str = "any"  # or "majority"
    min_n: int = 5
    nh2_pairs: str = "within_location"  # or "all"
    nh3_reasons: Mapping[str, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_NH3_REASONS))
    nh3_k: int = 4
    nh3_seed: int | None = None
    include_extra_scenario: bool = False
    bonferroni: bool = False
    estimator: str = "median"
    quartile_method: str = "tukey"
    delta: float = 0.1
    hypotheses: tuple[str, ...] = ("NH1", "NH2", "NH3", "NH4")
    jobs: int = 1

    def nh3_subset(self) -> dict[str, tuple[str, ...]]:
        if self.nh3_seed is None:
            return {loc: tuple(self.nh3_reasons[loc]) for loc in LOCATIONS}
        rng = random.Random(self.nh3_seed)
        out = {}
        for loc in LOCATIONS:
            pool = list(reasons_at(loc))
            out[loc] = tuple(sorted(rng.sample(pool, min(self.nh3_k, len(pool))), key=REASON_LABELS.index))
        return out

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["nh3_reasons"] = {k: list(v) for k, v in self.nh3_subset().items()}
        d["hypotheses"] = list(self.hypotheses)
        return d


@dataclass(frozen=True)
class EdgeReport:
    family: str
    source: str
    target: str
    tests: tuple[tuple[str, TestResult], ...]
    edge_present: bool
    rule: str
    skipped: tuple[str, ...] = ()

    @property
    def n_rejected(self) -> int:
        return sum(r.reject for _, r in self.tests)


def decide(tests: Sequence[tuple[str, TestResult]], rule: str = "any") -> bool:
    """Aggregate a family of tests into an edge decision."""
    n_rej = sum(r.reject for _, r in tests)
    if rule == "any":
        return n_rej > 0
    if rule == "majority":
        return n_rej * 2 > len(tests)
    raise ValueError(f"unknown rule {rule!r}")


def _rule_text(rule, bonf):
    base = "edge iff any test rejects" if rule == "any" else "edge iff a majority of tests reject"
    return base + (" (Bonferroni within family)" if bonf else "")


def _run_test(kind: str, a, b, alpha: float) -> TestResult:
    if kind == "rank_sum":
        return rank_sum(a, b, alpha)
    if kind == "signed_rank":
        n = min(len(a), len(b))
        return signed_rank(list(a)[:n], list(b)[:n], alpha)
    raise ValueError(f"unknown test {kind!r}")


def _paired_by_subject(ra: Sequence[SurveyRecord], rb: Sequence[SurveyRecord], value: Callable):
    """Values of the subjects present in both groups, matched by subject."""
    ib = {r.subject_id: r for r in rb}
    common = sorted(r.subject_id for r in ra if r.subject_id in ib)
    ia = {r.subject_id: r for r in ra}
    return [value(ia[s]) for s in common], [value(ib[s]) for s in common]


def _by_subject(rs):
    return sorted(rs, key=lambda r: r.subject_id)


# -- order effects -------------------------------------------------------------


@dataclass(frozen=True)
class OrderEffectRow:
    reason: str
    code: str
    judge_first: tuple[int, float, float]  # n, mean, population sd
    eval_first: tuple[int, float, float]
    result: TestResult


@dataclass(frozen=True)
class OrderEffectScreen:
    rows: tuple[OrderEffectRow, ...]
    skipped: tuple[str, ...]
    pooled: bool


def _summary(values):
    a = np.asarray(values, dtype=float)
    return (len(a), float(a.mean()), float(a.std()))


def order_effect_screen(records: Sequence[SurveyRecord], alpha: float = 0.05, test: str = "rank_sum") -> OrderEffectScreen:
    """Per-scenario test of judgment across the two question orders.

    ``pooled`` is True iff no scenario rejects, which licenses pooling the
    two order conditions.  Scenarios answered under one condition only are
    skipped with a warning.
    """
    rows, skipped = [], []
    for reason in REASONS:
        rs = [r for r in records if r.reason == reason.label]
        if not rs:
            continue
        jf = [int(r.judgment) for r in _by_subject(rs) if r.order_condition is OrderCondition.JUDGE_FIRST]
        ef = [int(r.judgment) for r in _by_subject(rs) if r.order_condition is OrderCondition.EVAL_FIRST]
        if not jf or not ef:
            log.warning("order screen: %s has only one order condition, skipped", reason.label)
            skipped.append(reason.label)
            continue
        res = _run_test(test, jf, ef, alpha)
        rows.append(OrderEffectRow(reason.label, reason.code, _summary(jf), _summary(ef), res))
    pooled = not any(r.result.reject for r in rows)
    return OrderEffectScreen(tuple(rows), tuple(skipped), pooled)


# -- estimation ----------------------------------------------------------------


def _matches(record: SurveyRecord, context: Mapping) -> bool:
    return all(record.scenario_value(k) == str(v) for k, v in context.items())


def estimate_ef(records: Sequence[SurveyRecord], evar: str, context: Mapping | Sequence = (), estimator: str = "median") -> float:
    """Point estimate of ``evar`` over the records matching a scenario context.

    ``context`` maps scenario-variable names (``Reason``, ``Location``, ...)
    to values.  Median by default, ``estimator="mean"`` for the mean.
    """
    context = dict(context)
    vals = [r.evaluation(evar) for r in records if _matches(r, context)]
    if not vals:
        raise MissingEfEntry(evar, context)
    if estimator == "median":
        return median(vals)
    if estimator == "mean":
        return float(np.mean(vals))
    raise ValueError(f"unknown estimator {estimator!r}")


def _record_context_value(record: SurveyRecord, var: str, quartiles: Mapping):
    if var in EVAL_BY_NAME:
        return bucket_label(float(record.evaluation(var)), quartiles[var])
    return record.scenario_value(var)


def cp_table_estimate(
    records: Sequence[SurveyRecord],
    context: Mapping,
    quartiles: Mapping[str, Sequence[float]] | None = None,
    min_n: int = 5,
    delta: float = 0.1,
) -> CpStatement | None:
    """Judgment cp-statement for one parent context, or None when fewer than
    ``min_n`` records match (a missing statement).

    Evaluation variables in ``context`` are given as bucket labels and
    matched against each record's own response, bucketed by ``quartiles``.
    The empirical yes-rate is kept as the statement's annotation.
    """
    quartiles = quartiles or {}
    context = dict(context)
    hits = [r for r in records if all(_record_context_value(r, k, quartiles) == v for k, v in context.items())]
    if len(hits) < min_n:
        return None
    p = sum(r.judgment for r in hits) / len(hits)
    if p > 0.5 + delta:
        strata = ((YES,), (NO,))
    elif p < 0.5 - delta:
        strata = ((NO,), (YES,))
    else:
        strata = ((YES, NO),)
    return CpStatement(tuple(context.items()), strata, round(p, 6))


# -- structure ------------------------------------------------------------------


@dataclass(frozen=True)
class _Job:
    family: str
    source: str
    target: str
    label: str
    kind: str
    a: tuple
    b: tuple


@dataclass(frozen=True)
class StructureResult:
    edges: tuple[EdgeReport, ...]
    net: NetDocument
    quartiles: Mapping[str, tuple[float, float, float]]
    config: LearnConfig
    alpha: float

    def parents(self, target: str) -> tuple[str, ...]:
        return tuple(e.source for e in self.edges if e.target == target and e.edge_present)

    def edge_set(self) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.edges if e.edge_present}


def _group(records, key):
    out: dict = {}
    for r in records:
        out.setdefault(key(r), []).append(r)
    return out


def _jobs_nh1(records, config, skipped):
    by_loc = _group(records, lambda r: r.location)
    jobs = []
    for ev in EVAL_VARS:
        for (la, lb), label in zip(LOCATION_PAIRS, NH1_LABELS):
            ra, rb = _by_subject(by_loc.get(la, [])), _by_subject(by_loc.get(lb, []))
            if min(len(ra), len(rb)) < config.min_n:
                skipped.setdefault(("Location", ev.name), []).append(label)
                continue
            jobs.append(_Job("NH1", "Location", ev.name, label, config.between_test,
                             tuple(r.evaluation(ev.name) for r in ra), tuple(r.evaluation(ev.name) for r in rb)))
    return jobs


def _reason_pairs(config):
    if config.nh2_pairs == "all":
        return list(itertools.combinations(REASON_LABELS, 2))
    if config.nh2_pairs != "within_location":
        raise ValueError(f"unknown nh2_pairs {config.nh2_pairs!r}")
    return [p for loc in LOCATIONS for p in itertools.combinations(reasons_at(loc), 2)]


def _jobs_nh2(records, config, skipped):
    by_reason = _group(records, lambda r: r.reason)
    jobs = []
    for ev in EVAL_VARS:
        for ra_label, rb_label in _reason_pairs(config):
            ra, rb = by_reason.get(ra_label, []), by_reason.get(rb_label, [])
            label = f"{ra_label}-{rb_label}"
            paired = config.within_test == "signed_rank" and (
                REASON_BY_LABEL[ra_label].location == REASON_BY_LABEL[rb_label].location
            )
            if paired:
                a, b = _paired_by_subject(ra, rb, lambda r: r.evaluation(ev.name))
                kind = "signed_rank"
            else:
                a = [r.evaluation(ev.name) for r in _by_subject(ra)]
                b = [r.evaluation(ev.name) for r in _by_subject(rb)]
                kind = config.between_test if config.within_test == "signed_rank" else config.within_test
            if min(len(a), len(b)) < config.min_n:
                skipped.setdefault(("Reason", ev.name), []).append(label)
                continue
            jobs.append(_Job("NH2", "Reason", ev.name, label, kind, tuple(a), tuple(b)))
    return jobs


def _jobs_extra(records, config, skipped):
    jobs = []
    for sv in EXTRA_SCENARIO_VARS:
        groups = _group(records, lambda r: r.scenario_value(sv))
        ra, rb = _by_subject(groups.get("True", [])), _by_subject(groups.get("False", []))
        for ev in EVAL_VARS:
            if min(len(ra), len(rb)) < config.min_n:
                skipped.setdefault((sv, ev.name), []).append("True-False")
                continue
            jobs.append(_Job("SV", sv, ev.name, "True-False", config.between_test,
                             tuple(r.evaluation(ev.name) for r in ra), tuple(r.evaluation(ev.name) for r in rb)))
        if min(len(ra), len(rb)) >= config.min_n:
            jobs.append(_Job("SV", sv, JUDGMENT, "True-False", config.between_test,
                             tuple(int(r.judgment) for r in ra), tuple(int(r.judgment) for r in rb)))
        else:
            skipped.setdefault((sv, JUDGMENT), []).append("True-False")
    return jobs


def _jobs_nh3(records, config, skipped):
    subset = config.nh3_subset()
    jobs = []
    for (la, lb), label in zip(LOCATION_PAIRS, NH3_LABELS):
        ra = _by_subject(r for r in records if r.location == la and r.reason in subset[la])
        rb = _by_subject(r for r in records if r.location == lb and r.reason in subset[lb])
        if min(len(ra), len(rb)) < config.min_n:
            skipped.setdefault(("Location", JUDGMENT), []).append(label)
            continue
        jobs.append(_Job("NH3", "Location", JUDGMENT, label, config.between_test,
                         tuple(int(r.judgment) for r in ra), tuple(int(r.judgment) for r in rb)))
    return jobs


def _jobs_nh4(records, config, quartiles, skipped):
    by_reason = _group(records, lambda r: r.reason)
    jobs = []
    for ev in EVAL_VARS:
        q = quartiles[ev.name]
        for reason in REASON_LABELS:
            rs = _by_subject(by_reason.get(reason, []))
            if not rs:
                continue
            buckets = _group(rs, lambda r: bucket_label(float(r.evaluation(ev.name)), q))
            for qa, qb in itertools.combinations(BUCKET_LABELS, 2):
                ga, gb = buckets.get(qa, []), buckets.get(qb, [])
                if not ga and not gb:
                    continue
                label = f"{reason}:{qa}-{qb}"
                if min(len(ga), len(gb)) < config.min_n:
                    if ga and gb:
                        skipped.setdefault((ev.name, JUDGMENT), []).append(label)
                    continue
                jobs.append(_Job("NH4", ev.name, JUDGMENT, label, config.between_test,
                                 tuple(int(r.judgment) for r in ga), tuple(int(r.judgment) for r in gb)))
    return jobs


def run_tests(records: Sequence[SurveyRecord], alpha: float = 0.05, config: LearnConfig | None = None,
              quartiles: Mapping | None = None) -> tuple[EdgeReport, ...]:
    """All hypothesis-test families, aggregated into edge reports."""
    config = config or LearnConfig()
    if quartiles is None:
        quartiles = _quartiles(records, config)
    skipped: dict = {}
    jobs = []
    if "NH1" in config.hypotheses:
        jobs += _jobs_nh1(records, config, skipped)
    if "NH2" in config.hypotheses:
        jobs += _jobs_nh2(records, config, skipped)
    if config.include_extra_scenario:
        jobs += _jobs_extra(records, config, skipped)
    if "NH3" in config.hypotheses:
        jobs += _jobs_nh3(records, config, skipped)
    if "NH4" in config.hypotheses:
        jobs += _jobs_nh4(records, config, quartiles, skipped)

    families: dict = {}
    for j in jobs:
        families.setdefault((j.family, j.source, j.target), []).append(j)

    def family_alpha(key):
        return bonferroni(alpha, len(families[key])) if config.bonferroni else alpha

    def run(j):
        return _run_test(j.kind, j.a, j.b, family_alpha((j.family, j.source, j.target)))

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    by_key: dict = {}
    for j, res in zip(jobs, results):
        by_key.setdefault((j.family, j.source, j.target), []).append((j.label, res))

    for (src, tgt), labels in skipped.items():
        for label in labels:
            log.info("skipped %s -> %s %s: fewer than %d observations", src, tgt, label, config.min_n)

    reports = []
    for key, tests in by_key.items():
        family, src, tgt = key
        reports.append(EdgeReport(
            family, src, tgt, tuple(tests), decide(tests, config.rule),
            _rule_text(config.rule, config.bonferroni), tuple(skipped.get((src, tgt), ())),
        ))
    for (src, tgt), labels in skipped.items():
        if not any(r.source == src and r.target == tgt for r in reports):
            fam = _family_of(src, tgt)
            reports.append(EdgeReport(fam, src, tgt, (), False, _rule_text(config.rule, config.bonferroni), tuple(labels)))
    return tuple(sorted(reports, key=_report_key))


def _family_of(src, tgt):
    if src == "Location":
        return "NH3" if tgt == JUDGMENT else "NH1"
    if src == "Reason":
        return "NH2"
    if src in EXTRA_SCENARIO_VARS:
        return "SV"
    return "NH4"


_FAMILY_ORDER = {"NH1": 0, "NH2": 1, "SV": 2, "NH3": 3, "NH4": 4}
_VAR_ORDER = {n: i for i, n in enumerate(["Reason", "Location", *EXTRA_SCENARIO_VARS, *(e.name for e in EVAL_VARS), JUDGMENT])}


def _report_key(r: EdgeReport):
    return (_FAMILY_ORDER[r.family], _VAR_ORDER[r.source], _VAR_ORDER[r.target])


def _quartiles(records, config):
    out = {}
    for ev in EVAL_VARS:
        vals = [r.evaluation(ev.name) for r in records]
        out[ev.name] = quartile_boundaries(vals, config.quartile_method) if vals else (
            float(ev.low), (ev.low + ev.high) / 2.0, float(ev.high))
    return out


def _scenario_domains(records, config):
    doms = {"Reason": REASON_LABELS, "Location": LOCATIONS}
    if config.include_extra_scenario:
        doms["MainService"] = ("True", "False")
        doms["AlreadyWaited"] = ("True", "False")
    return doms


def build_net(records: Sequence[SurveyRecord], edges: Sequence[EdgeReport], quartiles: Mapping, config: LearnConfig) -> NetDocument:
    """Assemble the learned SEP-net from edge decisions and the data."""
    present = {(e.source, e.target) for e in edges if e.edge_present}
    scen = _scenario_domains(records, config)
    variables = [VariableSpec(name, VarClass.SCENARIO, values) for name, values in scen.items()]
    eval_functions = {}
    for ev in EVAL_VARS:
        parents = tuple(s for s in scen if (s, ev.name) in present)
        variables.append(VariableSpec(ev.name, VarClass.EVALUATION, bounds=(ev.low, ev.high),
                                      parents=parents, quartiles=quartiles[ev.name]))
        contexts = sorted(
            {tuple((p, r.scenario_value(p)) for p in parents) for r in records},
            key=lambda ctx: tuple(scen[p].index(v) for p, v in ctx),
        )
        table = tuple((ctx, estimate_ef(records, ev.name, ctx, config.estimator)) for ctx in contexts)
        eval_functions[ev.name] = EvaluationFunction(ev.name, table)

    pv_parents = tuple(
        [s for s in scen if (s, JUDGMENT) in present] + [e.name for e in EVAL_VARS if (e.name, JUDGMENT) in present]
    )
    variables.append(VariableSpec(JUDGMENT, VarClass.PREFERENCE, (YES, NO), parents=pv_parents))

    def order_of(p, v):
        return scen[p].index(v) if p in scen else BUCKET_LABELS.index(v)

    contexts = sorted(
        {tuple((p, _record_context_value(r, p, quartiles)) for p in pv_parents) for r in records},
        key=lambda ctx: tuple(order_of(p, v) for p, v in ctx),
    )
    rows = []
    for ctx in contexts:
        st = cp_table_estimate(records, ctx, quartiles, config.min_n, config.delta)
        if st is not None:
            rows.append(st)
    return NetDocument(
        tuple(variables),
        {JUDGMENT: tuple(rows)},
        eval_functions,
        "learned-sep-net",
        f"learned from {len(records)} survey records",
    )


def infer_structure(records: Sequence[SurveyRecord], alpha: float = 0.05, config: LearnConfig | None = None) -> StructureResult:
    """Run the NH1-NH4 tests and assemble the learned SEP-net.

    Expects order conditions already pooled (see :func:`order_effect_screen`).
    """
    config = config or LearnConfig()
    if not records:
        raise ValueError("no survey records")
    quartiles = _quartiles(records, config)
    edges = run_tests(records, alpha, config, quartiles)
    net = build_net(records, edges, quartiles, config)
    return StructureResult(edges, net, quartiles, config, alpha)


def with_alpha(config: LearnConfig, **changes) -> LearnConfig:
    return replace(config, **changes)
