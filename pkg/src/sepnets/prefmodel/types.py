"""Domain types for CP-nets and SEP-nets.

A net is a list of variables, each in one of three classes:

* scenario variables fix the decision context and carry no preferences,
* evaluation variables hold a numeric estimate in a closed range and get
  their value from a context-indexed evaluation function,
* preference variables carry ordinary cp-tables.

A plain CP-net is a net whose variables are all preference variables
(plus, optionally, scenario variables that only split the induced order
into components).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import networkx as nx

from ..errors import CyclicNetError, MissingEfEntry, OutcomeError
from ..stats import BUCKET_LABELS, bucket_label

Value = Union[str, float]
Context = tuple  # tuple[tuple[str, Value], ...]


class VarClass(str, Enum):
    SCENARIO = "scenario"
    EVALUATION = "evaluation"
    PREFERENCE = "preference"


def _context_tuple(context) -> Context:
    if context is None:
        return ()
    if isinstance(context, Mapping):
        return tuple(context.items())
    return tuple((k, v) for k, v in context)


@dataclass(frozen=True)
class VariableSpec:
    """One variable of a net.

    Scenario and preference variables have a finite ``values`` domain whose
    declaration order is used for deterministic output only.  Evaluation
    variables have ``bounds = (min, max)`` and may carry quartile boundaries
    used to bucket their values when they condition a cp-table.
    """

    name: str
    kind: VarClass
    values: tuple[str, ...] = ()
    bounds: tuple[float, float] | None = None
    parents: tuple[str, ...] = ()
    quartiles: tuple[float, float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", VarClass(self.kind))
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "parents", tuple(self.parents))
        if self.bounds is not None:
            object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if self.quartiles is not None:
            object.__setattr__(self, "quartiles", tuple(float(q) for q in self.quartiles))

    @property
    def is_numeric(self) -> bool:
        return self.kind is VarClass.EVALUATION

    def contains(self, value) -> bool:
        if self.is_numeric:
            if isinstance(value, str) or self.bounds is None:
                return False
            return self.bounds[0] <= float(value) <= self.bounds[1]
        return value in self.values

    def context_value(self, value) -> Value:
        """Normalize ``value`` for matching as a parent in a cp-table context.

        Numeric evaluation values are replaced by their quartile bucket when
        the variable has quartile boundaries.
        """
        if self.is_numeric and not isinstance(value, str):
            if self.quartiles is not None:
                return bucket_label(float(value), self.quartiles)
            return float(value)
        return value


@dataclass(frozen=True)
class CpStatement:
    """A conditional preference row ``context : s1 > s2 > ...``.

    Each stratum is a tuple of mutually indifferent values; earlier strata
    are preferred.  Domain values that appear in no stratum are missing.
    """

    context: Context
    strata: tuple[tuple[str, ...], ...]
    annotation: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "context", _context_tuple(self.context))
        object.__setattr__(self, "strata", tuple(tuple(s) for s in self.strata))

    @classmethod
    def parse(cls, context, relation: str, annotation=None) -> "CpStatement":
        """Build a statement from text such as ``"c > d ~ e"``."""
        from .format import parse_relation

        return cls(context, parse_relation(relation), annotation)

    @cached_property
    def _ranks(self) -> dict:
        return {v: i for i, stratum in enumerate(self.strata) for v in stratum}

    @property
    def covered(self) -> frozenset:
        return frozenset(self._ranks)

    def rank(self, value) -> int | None:
        """Stratum index of ``value`` (0 is most preferred), None if missing."""
        return self._ranks.get(value)

    @property
    def top(self) -> tuple[str, ...]:
        return self.strata[0] if self.strata else ()

    def relation_text(self) -> str:
        from .format import format_relation

        return format_relation(self.strata)


@dataclass(frozen=True)
class EvaluationFunction:
    """Context-indexed point estimates for one evaluation variable.

    Per parent context this is the one-argument map that picks a single
    value between the variable's min and max.
    """

    owner: str
    table: tuple[tuple[Context, float], ...] = ()

    def __post_init__(self):
        if isinstance(self.table, Mapping):
            rows = self.table.items()
        else:
            rows = self.table
        object.__setattr__(
            self, "table", tuple((_context_tuple(c), float(v)) for c, v in rows)
        )

    @cached_property
    def _index(self) -> dict:
        return {frozenset(c): v for c, v in self.table}

    def lookup(self, context) -> float:
        key = frozenset(_context_tuple(context))
        try:
            return self._index[key]
        except KeyError:
            raise MissingEfEntry(self.owner, dict(_context_tuple(context))) from None


@dataclass(frozen=True)
class Outcome:
    """A full assignment of one value per variable, in net declaration order."""

    items: tuple[tuple[str, Value], ...]

    @classmethod
    def of(cls, net: "NetDocument", values) -> "Outcome":
        """Build and check an outcome against ``net``.

        ``values`` is either a mapping name -> value or a sequence of values
        in declaration order.
        """
        if isinstance(values, Mapping):
            unknown = set(values) - set(net.names)
            if unknown:
                raise OutcomeError(f"unknown variables {sorted(unknown)}")
            missing = [n for n in net.names if n not in values]
            if missing:
                raise OutcomeError(f"outcome does not assign {missing}")
            items = tuple((n, values[n]) for n in net.names)
        else:
            values = tuple(values)
            if len(values) != len(net.variables):
                raise OutcomeError(
                    f"expected {len(net.variables)} values, got {len(values)}"
                )
            items = tuple(zip(net.names, values))
        out = cls(items)
        net.check_outcome(out)
        return out

    @cached_property
    def mapping(self) -> dict:
        return dict(self.items)

    def __getitem__(self, name):
        return self.mapping[name]

    def get(self, name, default=None):
        return self.mapping.get(name, default)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.items)

    def as_dict(self) -> dict:
        return dict(self.items)

    def with_value(self, name, value) -> "Outcome":
        return Outcome(tuple((n, value if n == name else v) for n, v in self.items))

    def label(self, sep: str = ",") -> str:
        return sep.join(_fmt_value(v) for _, v in self.items)

    def __str__(self):
        return "(" + self.label() + ")"


def _fmt_value(v) -> str:
    if isinstance(v, str):
        return v
    from .format import format_number

    return format_number(v)


@dataclass(frozen=True)
class NetDocument:
    """A CP-net or SEP-net.

    ``cp_tables`` maps preference variables to their statements and
    ``eval_functions`` maps evaluation variables to their functions.  The
    constructor performs no validation beyond shape; see
    :func:`sepnets.prefmodel.validate`.
    """

    variables: tuple[VariableSpec, ...] = ()
    cp_tables: Mapping[str, tuple[CpStatement, ...]] = field(default_factory=dict)
    eval_functions: Mapping[str, EvaluationFunction] = field(default_factory=dict)
    name: str = ""
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "cp_tables", {k: tuple(v) for k, v in dict(self.cp_tables).items()}
        )
        object.__setattr__(self, "eval_functions", dict(self.eval_functions))

    # -- lookup -------------------------------------------------------------

    @cached_property
    def _by_name(self) -> dict:
        return {v.name: v for v in self.variables}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def var(self, name: str) -> VariableSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def of_kind(self, kind) -> tuple[VariableSpec, ...]:
        kind = VarClass(kind)
        return tuple(v for v in self.variables if v.kind is kind)

    def dependency_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        for v in self.variables:
            for p in v.parents:
                g.add_edge(p, v.name)
        return g

    @cached_property
    def _topo(self):
        g = self.dependency_graph()
        try:
            # lexicographic tie-break by declaration index keeps output stable
            order = list(nx.lexicographical_topological_sort(g, key=self.names.index))
        except nx.NetworkXUnfeasible:
            return None
        return tuple(order)

    def topological_order(self) -> tuple[str, ...]:
        if self._topo is None:
            cycle = nx.find_cycle(self.dependency_graph())
            raise CyclicNetError(
                "dependency cycle: " + " -> ".join(a for a, _ in cycle) + f" -> {cycle[0][0]}"
            )
        return self._topo

    @property
    def is_acyclic(self) -> bool:
        return self._topo is not None

    # -- cp-table access ----------------------------------------------------

    def normalize_context(self, context) -> frozenset:
        out = []
        for k, v in _context_tuple(context):
            spec = self._by_name.get(k)
            out.append((k, spec.context_value(v) if spec is not None else v))
        return frozenset(out)

    @cached_property
    def _statement_index(self) -> dict:
        index = {}
        for var, rows in self.cp_tables.items():
            index[var] = {self.normalize_context(st.context): st for st in rows}
        return index

    def statement_for(self, var: str, assignment) -> CpStatement | None:
        """The cp-statement of ``var`` active under ``assignment`` (or None)."""
        table = self._statement_index.get(var)
        if not table:
            return None
        spec = self.var(var)
        key = self.normalize_context((p, assignment[p]) for p in spec.parents)
        return table.get(key)

    def parent_contexts(self, var: str):
        """All complete parent contexts of ``var``, or None if some parent is
        an unbucketed evaluation variable (continuous, not enumerable)."""
        spec = self.var(var)
        domains = []
        for p in spec.parents:
            ps = self.var(p)
            if ps.is_numeric:
                if ps.quartiles is None:
                    return None
                domains.append(BUCKET_LABELS)
            else:
                domains.append(ps.values)
        return [tuple(zip(spec.parents, combo)) for combo in itertools.product(*domains)]

    # -- outcomes -----------------------------------------------------------

    def check_outcome(self, outcome: Outcome) -> None:
        if outcome.names != self.names:
            raise OutcomeError(
                f"outcome over {list(outcome.names)} does not match net variables {list(self.names)}"
            )
        for spec, (_, value) in zip(self.variables, outcome.items):
            if not spec.contains(value):
                raise OutcomeError(f"{value!r} is not in the domain of {spec.name}")

    def outcome(self, values) -> Outcome:
        return Outcome.of(self, values)


def make_net(
    variables: Sequence[VariableSpec],
    cp_tables: Mapping[str, Iterable[CpStatement]] | None = None,
    eval_functions: Mapping[str, EvaluationFunction] | None = None,
    name: str = "",
    description: str = "",
) -> NetDocument:
    return NetDocument(tuple(variables), cp_tables or {}, eval_functions or {}, name, description)
