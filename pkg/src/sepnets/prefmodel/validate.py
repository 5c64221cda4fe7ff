"""Structural checks on net documents."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

from ..errors import CapExceeded
from ..stats import BUCKET_LABELS
from .types import NetDocument, Outcome, VarClass

DEFAULT_CAP = 2**20


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    variable: str | None = None

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """``violations`` make a net invalid; ``notes`` are informational
    (missing statements, scenario variables without cp-tables, ...)."""

    violations: tuple[Issue, ...] = ()
    notes: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return bool(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def _context_value_ok(spec, value) -> bool:
    if spec.is_numeric:
        if isinstance(value, str):
            return value in BUCKET_LABELS and spec.quartiles is not None
        return spec.contains(value)
    return value in spec.values


def validate(net: NetDocument) -> ValidationReport:
    """Report every structural problem of ``net``.

    Violations: empty or duplicated domains, bad evaluation ranges, class
    layering (scenario variables have no parents, evaluation variables
    depend only on scenario/evaluation variables), unknown parents,
    dependency cycles, malformed cp-tables and out-of-range evaluation
    values.  Incomplete tables are notes, not violations.
    """
    bad: list[Issue] = []
    notes: list[Issue] = []
    seen = set()
    for v in net.variables:
        if v.name in seen:
            bad.append(Issue("duplicate-variable", f"{v.name} is declared twice", v.name))
        seen.add(v.name)

    for v in net.variables:
        if v.is_numeric:
            if v.bounds is None or not v.bounds[0] < v.bounds[1]:
                bad.append(Issue("bad-range", f"{v.name} needs min < max, got {v.bounds}", v.name))
            elif v.quartiles is not None:
                q = v.quartiles
                if not (q[0] <= q[1] <= q[2]) or not all(v.contains(x) for x in q):
                    bad.append(Issue("bad-quartiles", f"quartiles {q} of {v.name} are not ordered within range", v.name))
        else:
            if not v.values:
                bad.append(Issue("empty-domain", f"{v.name} has an empty domain", v.name))
            if len(set(v.values)) != len(v.values):
                bad.append(Issue("duplicate-value", f"{v.name} lists a value twice", v.name))

        for p in v.parents:
            if p not in net:
                bad.append(Issue("unknown-parent", f"{v.name} depends on undeclared {p}", v.name))
                continue
            pk = net.var(p).kind
            if v.kind is VarClass.SCENARIO:
                bad.append(Issue("layering", f"scenario variable {v.name} cannot have parent {p}", v.name))
            elif v.kind is VarClass.EVALUATION and pk is VarClass.PREFERENCE:
                bad.append(Issue("layering", f"evaluation variable {v.name} cannot depend on preference variable {p}", v.name))
        if len(set(v.parents)) != len(v.parents):
            bad.append(Issue("duplicate-parent", f"{v.name} lists a parent twice", v.name))

    g = nx.DiGraph()
    g.add_nodes_from(net.names)
    g.add_edges_from((p, v.name) for v in net.variables for p in v.parents if p in net)
    for cycle in sorted(nx.simple_cycles(g), key=lambda c: (len(c), c))[:10]:
        bad.append(Issue("cycle", "dependency cycle " + " -> ".join(cycle + cycle[:1])))

    for var, rows in net.cp_tables.items():
        if var not in net:
            bad.append(Issue("unknown-variable", f"cp-table for undeclared {var}", var))
            continue
        spec = net.var(var)
        if spec.kind is not VarClass.PREFERENCE:
            bad.append(Issue("cp-table-class", f"{spec.kind.value} variable {var} cannot have a cp-table", var))
            continue
        keys = set()
        for st in rows:
            ctx = dict(st.context)
            if set(ctx) != set(spec.parents) or len(ctx) != len(st.context):
                bad.append(Issue("bad-context", f"{var} statement context {sorted(ctx)} is not over {list(spec.parents)}", var))
                continue
            for k, val in ctx.items():
                if k in net and not _context_value_ok(net.var(k), val):
                    bad.append(Issue("bad-context", f"{val!r} is not a valid value of {k} in a {var} context", var))
            key = net.normalize_context(st.context)
            if key in keys:
                bad.append(Issue("repeated-context", f"{var} has two statements for one context", var))
            keys.add(key)
            flat = [x for s in st.strata for x in s]
            if len(set(flat)) != len(flat):
                bad.append(Issue("repeated-value", f"{var} statement lists a value in two strata", var))
            for x in flat:
                if x not in spec.values:
                    bad.append(Issue("bad-value", f"{x!r} is not in the domain of {var}", var))
            absent = [x for x in spec.values if x not in flat]
            if absent:
                notes.append(Issue("missing-values", f"{var} given {ctx} says nothing about {absent}", var))
        contexts = net.parent_contexts(var) if all(p in net for p in spec.parents) else None
        if contexts is not None:
            absent = [c for c in contexts if net.normalize_context(c) not in keys]
            if absent:
                notes.append(Issue("missing-statements", f"{var} has no statement for {len(absent)} of {len(contexts)} parent contexts", var))

    for v in net.variables:
        if v.kind is VarClass.SCENARIO and v.name not in net.cp_tables:
            notes.append(Issue("no-cp-table", f"no cp-table for scenario variable {v.name}", v.name))
        elif v.kind is VarClass.PREFERENCE and v.name not in net.cp_tables:
            notes.append(Issue("missing-statements", f"preference variable {v.name} has no cp-table", v.name))
        elif v.kind is VarClass.EVALUATION and v.name not in net.eval_functions:
            notes.append(Issue("no-eval-function", f"evaluation variable {v.name} has no evaluation function", v.name))

    for var, ef in net.eval_functions.items():
        if var not in net:
            bad.append(Issue("unknown-variable", f"evaluation function for undeclared {var}", var))
            continue
        spec = net.var(var)
        if spec.kind is not VarClass.EVALUATION:
            bad.append(Issue("ef-class", f"{spec.kind.value} variable {var} cannot have an evaluation function", var))
            continue
        seen_ctx = set()
        for ctx, value in ef.table:
            d = dict(ctx)
            if set(d) != set(spec.parents):
                bad.append(Issue("bad-context", f"{var} evaluation context {sorted(d)} is not over {list(spec.parents)}", var))
            key = frozenset(ctx)
            if key in seen_ctx:
                bad.append(Issue("repeated-context", f"{var} evaluation function repeats a context", var))
            seen_ctx.add(key)
            if not spec.contains(value):
                bad.append(Issue("ef-range", f"{var} evaluation value {value} lies outside {spec.bounds}", var))

    return ValidationReport(tuple(bad), tuple(notes))


def outcome_space_size(net: NetDocument, eval_grid=None, fixed=None) -> int:
    fixed = fixed or {}
    size = 1
    for v in net.variables:
        if v.name in fixed:
            continue
        if v.is_numeric:
            size *= len((eval_grid or {}).get(v.name, ()))
        else:
            size *= len(v.values)
    return size


def enumerate_outcomes(net: NetDocument, eval_grid=None, cap: int = DEFAULT_CAP, fixed=None) -> list[Outcome]:
    """All outcomes of ``net`` in lexicographic declaration order.

    Evaluation variables range over ``eval_grid[name]``.  ``fixed`` pins
    some variables to a single value.  Raises :class:`CapExceeded` when the
    product of domain sizes is larger than ``cap``.
    """
    fixed = dict(fixed or {})
    eval_grid = eval_grid or {}
    domains = []
    for v in net.variables:
        if v.name in fixed:
            domains.append((fixed[v.name],))
        elif v.is_numeric:
            if v.name not in eval_grid:
                raise ValueError(f"evaluation variable {v.name} needs a finite grid to enumerate")
            domains.append(tuple(float(x) for x in eval_grid[v.name]))
        else:
            domains.append(v.values)
    size = 1
    for d in domains:
        size *= len(d)
    if size > cap:
        raise CapExceeded(size, cap)
    names = net.names
    return [Outcome(tuple(zip(names, combo))) for combo in itertools.product(*domains)]
