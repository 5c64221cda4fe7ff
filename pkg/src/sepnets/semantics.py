"""Order semantics of CP-nets with indifference and missing statements.

An outcome improves to a worse one through a *worsening flip*: one
preference variable moves to a value in a strictly lower stratum of its
active cp-statement.  Moving within a stratum is an *indifferent*
(sideways) flip and goes both ways.  Values a statement does not mention
have no flips in or out, and neither do scenario or evaluation variables.

``alpha`` dominates ``beta`` when a chain of flips leads from ``alpha`` to
``beta`` but none leads back; chains both ways make them equivalent and
no chain either way makes them incomparable.  Dominance is written
``alpha > beta`` throughout (the better outcome on the left).
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import networkx as nx

from .errors import AmbiguousTop, CapExceeded, OutcomeError
from .prefmodel import DEFAULT_CAP, NetDocument, Outcome, VarClass, enumerate_outcomes


def default_cap() -> int:
    """Outcome cap, overridable with the ``SEPNETS_MAX_OUTCOMES`` variable."""
    raw = os.environ.get("SEPNETS_MAX_OUTCOMES")
    return int(raw) if raw else DEFAULT_CAP


class FlipKind(str, Enum):
    WORSENING = "Worsening"
    INDIFFERENT = "Indifferent"


class Relation(str, Enum):
    DOMINATES = "Dominates"
    DOMINATED_BY = "DominatedBy"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class FlipEdge:
    source: Outcome
    target: Outcome
    variable: str
    kind: FlipKind

    def __str__(self):
        arrow = "~" if self.kind is FlipKind.INDIFFERENT else ">"
        return f"{self.source} {arrow} {self.target} [{self.variable}]"


@dataclass(frozen=True)
class DominanceResult:
    relation: Relation
    witness: tuple[FlipEdge, ...] = ()


def _flips(net: NetDocument, outcome: Outcome):
    for spec in net.variables:
        if spec.kind is not VarClass.PREFERENCE:
            continue
        st = net.statement_for(spec.name, outcome)
        if st is None:
            continue
        current = outcome[spec.name]
        r = st.rank(current)
        if r is None:
            continue
        for value in spec.values:
            if value == current:
                continue
            rv = st.rank(value)
            if rv is None or rv < r:
                continue
            kind = FlipKind.WORSENING if rv > r else FlipKind.INDIFFERENT
            yield FlipEdge(outcome, outcome.with_value(spec.name, value), spec.name, kind)


def worsening_flips(net: NetDocument, outcome: Outcome) -> list[FlipEdge]:
    """Every single-variable worsening or indifferent flip out of ``outcome``."""
    net.check_outcome(outcome)
    return list(_flips(net, outcome))


def _search(net, start, goal, cap):
    """Shortest flip chain from start to goal (BFS), or None."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for edge in _flips(net, node):
            nxt = edge.target
            if nxt in parent:
                continue
            parent[nxt] = edge
            if nxt == goal:
                chain = []
                while parent[nxt] is not None:
                    chain.append(parent[nxt])
                    nxt = parent[nxt].source
                return tuple(reversed(chain))
            if len(parent) > cap:
                raise CapExceeded(len(parent), cap)
            queue.append(nxt)
    return None


def dominates(net: NetDocument, alpha: Outcome, beta: Outcome, cap: int | None = None) -> DominanceResult:
    """Compare two outcomes by exhaustive search of the flip graph.

    The witness is a shortest flip chain from the better outcome to the
    worse one (from ``alpha`` to ``beta`` when equivalent).
    """
    cap = default_cap() if cap is None else cap
    for o in (alpha, beta):
        try:
            net.check_outcome(o)
        except OutcomeError as exc:
            raise OutcomeError(f"{o} does not belong to this net: {exc}") from None
    if alpha == beta:
        return DominanceResult(Relation.EQUIVALENT, ())
    down = _search(net, alpha, beta, cap)
    up = _search(net, beta, alpha, cap)
    if down is not None and up is not None:
        return DominanceResult(Relation.EQUIVALENT, down)
    if down is not None:
        return DominanceResult(Relation.DOMINATES, down)
    if up is not None:
        return DominanceResult(Relation.DOMINATED_BY, up)
    return DominanceResult(Relation.INCOMPARABLE, ())


def optimal_outcome(net: NetDocument, fixed: Mapping | None = None, tie_break: bool = False) -> Outcome:
    """Most preferred outcome given ``fixed`` values, by a forward sweep.

    Every scenario variable must be fixed.  Preference variables take the
    single value of the top stratum of their active statement, in
    topological order.  Evaluation variables are kept only if fixed.

    Raises :class:`AmbiguousTop` when a needed statement is missing or its
    top stratum holds several values, unless ``tie_break`` is set, in which
    case the first candidate in declaration order is taken.
    """
    fixed = dict(fixed or {})
    for k, v in fixed.items():
        if k not in net:
            raise OutcomeError(f"unknown variable {k}")
        if not net.var(k).contains(v):
            raise OutcomeError(f"{v!r} is not in the domain of {k}")
    unfixed = [v.name for v in net.of_kind(VarClass.SCENARIO) if v.name not in fixed]
    if unfixed:
        raise ValueError(f"scenario variables must be fixed: {unfixed}")

    assignment = {}
    for name in net.topological_order():
        spec = net.var(name)
        if name in fixed:
            assignment[name] = fixed[name]
            continue
        if spec.kind is not VarClass.PREFERENCE:
            continue
        missing = [p for p in spec.parents if p not in assignment]
        if missing:
            raise ValueError(f"{name} depends on {missing}, which have no value; fix them")
        st = net.statement_for(name, assignment)
        top = st.top if st is not None else ()
        if len(top) == 1:
            assignment[name] = top[0]
            continue
        candidates = [v for v in spec.values if v in top] if top else list(spec.values)
        if not tie_break:
            ctx = {p: assignment[p] for p in spec.parents}
            raise AmbiguousTop(name, ctx, candidates)
        assignment[name] = candidates[0]
    return Outcome(tuple((n, assignment[n]) for n in net.names if n in assignment))


@dataclass(frozen=True)
class PreorderGraph:
    """Explicit flip graph over a set of outcomes.

    ``components`` partitions ``nodes`` into weakly connected components,
    ordered by their first node; ``labels`` names each component.
    """

    nodes: tuple[Outcome, ...]
    edges: tuple[FlipEdge, ...]
    components: tuple[tuple[Outcome, ...], ...]
    labels: tuple[str, ...] = ()

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for e in self.edges:
            g.add_edge(e.source, e.target, variable=e.variable, kind=e.kind)
        return g

    def reaches(self, a: Outcome, b: Outcome) -> bool:
        return a == b or nx.has_path(self.to_networkx(), a, b)

    def component_of(self, outcome: Outcome) -> int:
        for i, comp in enumerate(self.components):
            if outcome in comp:
                return i
        raise KeyError(outcome)

    def maxima(self, component: int | None = None) -> tuple[Outcome, ...]:
        """Outcomes not strictly dominated by any other node."""
        g = self.to_networkx()
        cond = nx.condensation(g)
        tops = set()
        for scc in cond.nodes:
            if cond.in_degree(scc) == 0:
                tops.update(cond.nodes[scc]["members"])
        pool = self.nodes if component is None else self.components[component]
        return tuple(o for o in pool if o in tops)


def _components(nodes, edges, label_vars):
    index = {o: i for i, o in enumerate(nodes)}
    parent = list(range(len(nodes)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in edges:
        a, b = find(index[e.source]), find(index[e.target])
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, list] = {}
    for i, o in enumerate(nodes):
        groups.setdefault(find(i), []).append(o)
    comps = tuple(tuple(g) for _, g in sorted(groups.items()))
    labels = tuple(", ".join(f"{k}={c[0][k]}" for k in label_vars) for c in comps)
    return comps, labels


def build_preorder(net: NetDocument, nodes, label_vars=None) -> PreorderGraph:
    nodes = tuple(nodes)
    node_set = set(nodes)
    edges = tuple(e for o in nodes for e in _flips(net, o) if e.target in node_set)
    if label_vars is None:
        label_vars = [v.name for v in net.variables if v.kind is not VarClass.PREFERENCE]
    comps, labels = _components(nodes, edges, label_vars)
    return PreorderGraph(nodes, edges, comps, labels)


def induced_preorder(
    net: NetDocument,
    fixed: Mapping | None = None,
    eval_grid: Mapping | None = None,
    cap: int | None = None,
) -> PreorderGraph:
    """Materialize the flip graph over all outcomes agreeing with ``fixed``."""
    cap = default_cap() if cap is None else cap
    fixed = dict(fixed or {})
    for k, v in fixed.items():
        if k not in net or not net.var(k).contains(v):
            raise OutcomeError(f"{k}={v!r} is not a value of this net")
    nodes = enumerate_outcomes(net, eval_grid, cap, fixed)
    return build_preorder(net, nodes)


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    cycle: tuple[FlipEdge, ...] = ()

    def __bool__(self):
        return self.consistent


def is_consistent(net: NetDocument, eval_grid: Mapping | None = None, cap: int | None = None) -> ConsistencyResult:
    """True iff no cycle of the induced graph contains a worsening flip.

    Works on any net, cyclic dependency graphs included; on failure the
    result carries one offending cycle, starting with its worsening flip.
    """
    graph = induced_preorder(net, eval_grid=eval_grid, cap=cap)
    g = graph.to_networkx()
    scc_of = {}
    for i, scc in enumerate(nx.strongly_connected_components(g)):
        for o in scc:
            scc_of[o] = i
    for e in graph.edges:
        if e.kind is FlipKind.WORSENING and scc_of[e.source] == scc_of[e.target]:
            path = nx.shortest_path(g, e.target, e.source)
            back = tuple(
                FlipEdge(a, b, g.edges[a, b]["variable"], g.edges[a, b]["kind"])
                for a, b in zip(path, path[1:])
            )
            return ConsistencyResult(False, (e,) + back)
    return ConsistencyResult(True, ())
