"""SEP-net semantics: scenarios, evaluation functions, per-scenario orders.

Within one scenario the evaluation variables are pinned to their
evaluation-function estimates and the preference variables behave as an
ordinary CP-net (the *projection*).  Outcomes from different scenarios are
never comparable, and outcomes whose evaluations differ from the estimates
are isolated.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import MissingEfEntry, OutcomeError
from .prefmodel import (
    CpStatement,
    NetDocument,
    Outcome,
    VarClass,
    VariableSpec,
    enumerate_outcomes,
    format_number,
)
from .semantics import (
    FlipEdge,
    PreorderGraph,
    _components,
    _flips,
    default_cap,
    optimal_outcome,
)


class MissingStatementWarning(UserWarning):
    """Projection left a preference variable with no applicable statement."""


@dataclass(frozen=True)
class ScenarioAssignment:
    values: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, net: NetDocument, values: Mapping[str, str]) -> "ScenarioAssignment":
        scen = net.of_kind(VarClass.SCENARIO)
        names = {v.name for v in scen}
        extra = set(values) - names
        if extra:
            raise OutcomeError(f"{sorted(extra)} are not scenario variables")
        missing = [v.name for v in scen if v.name not in values]
        if missing:
            raise OutcomeError(f"scenario does not assign {missing}")
        for v in scen:
            if values[v.name] not in v.values:
                raise OutcomeError(f"{values[v.name]!r} is not in the domain of {v.name}")
        return cls(tuple((v.name, values[v.name]) for v in scen))

    def as_dict(self) -> dict:
        return dict(self.values)

    @property
    def label(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.values)

    def sort_key(self, net: NetDocument):
        return tuple(net.var(k).values.index(v) for k, v in self.values)

    def __str__(self):
        return self.label


def all_scenarios(net: NetDocument) -> list[ScenarioAssignment]:
    """Every scenario of ``net`` in canonical order."""
    scen = net.of_kind(VarClass.SCENARIO)
    return [
        ScenarioAssignment(tuple(zip((v.name for v in scen), combo)))
        for combo in itertools.product(*(v.values for v in scen))
    ]


@dataclass(frozen=True)
class SepOutcome:
    scenario: ScenarioAssignment
    evaluations: tuple[tuple[str, float], ...]
    preferences: tuple[tuple[str, str], ...]

    def to_record(self) -> dict:
        """Flat record with ``scenario.*``, ``eval.*`` and ``pref.*`` keys."""
        rec = {f"scenario.{k}": v for k, v in self.scenario.values}
        rec.update({f"eval.{k}": format_number(v) for k, v in self.evaluations})
        rec.update({f"pref.{k}": v for k, v in self.preferences})
        return rec

    def to_outcome(self, net: NetDocument) -> Outcome:
        merged = {**dict(self.scenario.values), **dict(self.evaluations), **dict(self.preferences)}
        return Outcome(tuple((n, merged[n]) for n in net.names))


def _scenario(net, scenario) -> ScenarioAssignment:
    if isinstance(scenario, ScenarioAssignment):
        return scenario
    return ScenarioAssignment.of(net, scenario)


def apply_ef(net: NetDocument, scenario) -> dict[str, float]:
    """Evaluation-variable estimates for ``scenario``.

    Variables are resolved in topological order so that an evaluation
    variable may condition on another one.  Raises :class:`MissingEfEntry`
    naming the variable and context when a table has no matching row.
    """
    scenario = _scenario(net, scenario)
    known: dict = dict(scenario.values)
    out: dict[str, float] = {}
    for name in net.topological_order():
        spec = net.var(name)
        if spec.kind is not VarClass.EVALUATION:
            continue
        ctx = tuple((p, known[p]) for p in spec.parents)
        ef = net.eval_functions.get(name)
        if ef is None:
            raise MissingEfEntry(name, ctx)
        try:
            value = ef.lookup(ctx)
        except MissingEfEntry:
            # evaluation parents may be keyed by their bucket label
            bucketed = tuple((p, net.var(p).context_value(v)) for p, v in ctx)
            value = ef.lookup(bucketed)
        known[name] = value
        out[name] = value
    return out


def project(net: NetDocument, scenario, evaluations: Mapping[str, float] | None = None) -> NetDocument:
    """The CP-net over preference variables only, for one scenario.

    Statement rows whose scenario/evaluation part disagrees with the
    scenario and the evaluation estimates are dropped; the rest keep only
    their preference-variable context.
    """
    scenario = _scenario(net, scenario)
    if evaluations is None:
        evaluations = apply_ef(net, scenario)
    fixed = {**scenario.as_dict(), **dict(evaluations)}
    fixed_key = {k: net.var(k).context_value(v) for k, v in fixed.items()}

    variables = []
    tables = {}
    for spec in net.of_kind(VarClass.PREFERENCE):
        p_parents = tuple(p for p in spec.parents if net.var(p).kind is VarClass.PREFERENCE)
        variables.append(VariableSpec(spec.name, VarClass.PREFERENCE, spec.values, parents=p_parents))
        rows = net.cp_tables.get(spec.name)
        if rows is None:
            continue
        kept = []
        for st in rows:
            ctx = dict(st.context)
            if all(
                net.var(k).context_value(v) == fixed_key[k]
                for k, v in ctx.items()
                if k in fixed_key
            ):
                kept.append(CpStatement(tuple((p, ctx[p]) for p in p_parents), st.strata, st.annotation))
        if rows and not kept:
            warnings.warn(
                f"no statement of {spec.name} applies to scenario {scenario.label}",
                MissingStatementWarning,
                stacklevel=2,
            )
        tables[spec.name] = tuple(kept)
    return NetDocument(
        tuple(variables),
        tables,
        {},
        f"{net.name}[{scenario.label}]" if net.name else "",
        net.description,
    )


def sep_optimal(net: NetDocument, scenario, tie_break: bool = False) -> SepOutcome:
    """Top outcome for one scenario: estimates for the evaluation variables,
    forward sweep over the projected preference net."""
    scenario = _scenario(net, scenario)
    evals = apply_ef(net, scenario)
    cp = project(net, scenario, evals)
    best = optimal_outcome(cp, {}, tie_break=tie_break)
    return SepOutcome(scenario, tuple(evals.items()), tuple(best.items))


def sep_order(
    net: NetDocument,
    scenarios: Iterable,
    cap: int | None = None,
    off_ef: Sequence[Outcome] = (),
) -> PreorderGraph:
    """Union of the per-scenario induced orders.

    ``off_ef`` is a diagnostic: full outcomes whose evaluation values differ
    from the estimates are added as isolated nodes.
    """
    cap = default_cap() if cap is None else cap
    uniq = {}
    for s in scenarios:
        s = _scenario(net, s)
        uniq[s] = s
    ordered = sorted(uniq, key=lambda s: s.sort_key(net))
    scen_names = [v.name for v in net.of_kind(VarClass.SCENARIO)]

    nodes: list[Outcome] = []
    edges: list[FlipEdge] = []
    estimates = {}
    for s in ordered:
        evals = apply_ef(net, s)
        estimates[s.values] = evals
        cp = project(net, s, evals)
        fixed = {**s.as_dict(), **evals}

        def lift(o: Outcome, fixed=fixed) -> Outcome:
            m = o.mapping
            return Outcome(tuple((n, fixed[n] if n in fixed else m[n]) for n in net.names))

        local = enumerate_outcomes(cp, cap=cap)
        nodes.extend(lift(o) for o in local)
        for o in local:
            for e in _flips(cp, o):
                edges.append(FlipEdge(lift(e.source), lift(e.target), e.variable, e.kind))

    isolated = []
    evars = [v.name for v in net.of_kind(VarClass.EVALUATION)]
    for o in off_ef:
        net.check_outcome(o)
        key = tuple((k, o[k]) for k in scen_names)
        evals = estimates.get(key)
        if evals is None:
            evals = apply_ef(net, dict(key))
        if any(float(o[k]) != float(evals[k]) for k in evars) and o not in nodes:
            isolated.append(o)
    nodes.extend(isolated)

    comps, labels = _components(tuple(nodes), edges, scen_names)
    iso = set(isolated)
    labels = tuple(
        f"{lab} (off-estimate)" if len(c) == 1 and c[0] in iso else lab
        for c, lab in zip(comps, labels)
    )
    return PreorderGraph(tuple(nodes), tuple(edges), comps, labels)
