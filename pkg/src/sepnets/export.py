"""Writers for :class:`~sepnets.semantics.PreorderGraph`."""

from __future__ import annotations

import csv
import io
import json

from .prefmodel import format_number
from .semantics import FlipKind, PreorderGraph


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _jsonable(v):
    return v if isinstance(v, str) else float(v)


def to_dot(graph: PreorderGraph) -> str:
    """One ``digraph`` per component; an indifferent pair becomes a single
    ``dir=both`` edge."""
    out = []
    for i, comp in enumerate(graph.components):
        members = set(comp)
        label = graph.labels[i] if i < len(graph.labels) else ""
        out.append(f"digraph component_{i} {{")
        if label:
            out.append(f"  label={_dot_id(label)};")
        out.append("  rankdir=TB;")
        for o in comp:
            out.append(f"  {_dot_id(o.label())};")
        done = set()
        for e in graph.edges:
            if e.source not in members:
                continue
            a, b = e.source.label(), e.target.label()
            if e.kind is FlipKind.INDIFFERENT:
                key = frozenset((a, b))
                if key in done:
                    continue
                done.add(key)
                out.append(f"  {_dot_id(a)} -> {_dot_id(b)} [label={_dot_id(e.variable)}, dir=both, style=dashed];")
            else:
                out.append(f"  {_dot_id(a)} -> {_dot_id(b)} [label={_dot_id(e.variable)}];")
        out.append("}")
    return "\n".join(out) + "\n"


def to_csv(graph: PreorderGraph) -> str:
    """Flat edge list ``from,to,variable,kind``; outcomes are written as
    their comma-joined values."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "variable", "kind"])
    for e in graph.edges:
        w.writerow([e.source.label(), e.target.label(), e.variable, e.kind.value])
    return buf.getvalue()


def to_jsonl(graph: PreorderGraph) -> str:
    lines = []
    comp_of = {o: i for i, comp in enumerate(graph.components) for o in comp}
    for e in graph.edges:
        rec = {
            "component": comp_of[e.source],
            "from": {k: _jsonable(v) for k, v in e.source.items},
            "to": {k: _jsonable(v) for k, v in e.target.items},
            "variable": e.variable,
            "kind": e.kind.value,
        }
        lines.append(json.dumps(rec, ensure_ascii=False, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def outcome_record(outcome, prefix_of=None) -> dict:
    """Flat ``{name: value}`` record, numbers formatted canonically."""
    rec = {}
    for k, v in outcome.items:
        key = prefix_of(k) + k if prefix_of else k
        rec[key] = v if isinstance(v, str) else format_number(v)
    return rec
