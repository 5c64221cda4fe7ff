"""Text format for net documents.

Grammar (one item per line; ``#`` starts a comment; blank lines ignored)::

    document  := header* section*
    header    := ("name" | "description") ":" TEXT
    section   := "[variables]" variable* | "[cptables]" statement*
               | "[evalfunctions]" evalrow*
    variable  := IDENT ":" CLASS DOMAIN [QUARTILES] ["<-" IDENT ("," IDENT)*]
    CLASS     := "scenario" | "evaluation" | "preference"
    DOMAIN    := "{" LABEL ("," LABEL)* "}"      (scenario, preference)
               | "[" NUMBER "," NUMBER "]"        (evaluation: min, max)
    QUARTILES := "quartiles" "(" NUMBER "," NUMBER "," NUMBER ")"
    statement := IDENT ["|" context] ":" relation ["@" NUMBER]
    evalrow   := IDENT ["|" context] ":" NUMBER
    context   := IDENT "=" VALUE ("," IDENT "=" VALUE)*
    relation  := [stratum (">" stratum)*]
    stratum   := LABEL ("~" LABEL)*

LABEL and IDENT are bare tokens (no whitespace and none of
``, { } [ ] ( ) = : > ~ | @ # < "``) or double-quoted strings with ``\\"``
and ``\\\\`` escapes.  A context value for an evaluation parent is either a
number or a bucket label ``Q1``..``Q4``.  Domain values left out of a
relation are missing (no preference stated about them).

:func:`serialize_net` writes the canonical form: fixed section order,
single spaces, contexts in parent order, ``\\n`` line endings.
"""

from __future__ import annotations

import math
import re

from ..errors import NetSyntaxError
from ..stats import BUCKET_LABELS
from .types import CpStatement, EvaluationFunction, NetDocument, VarClass, VariableSpec

_BARE = re.compile(r'[^\s,{}\[\]()=:>~|@#<"]+')
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
SECTIONS = ("variables", "cptables", "evalfunctions")


# -- lexing -----------------------------------------------------------------


class _Line:
    """Token cursor over one physical line."""

    def __init__(self, text, lineno):
        self.text = text
        self.lineno = lineno
        self.pos = 0

    def error(self, msg, pos=None):
        col = (self.pos if pos is None else pos) + 1
        raise NetSyntaxError(msg, self.lineno, col)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text) or self.text[self.pos] == "#"

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def accept(self, s):
        self.skip_ws()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def token(self, what="label"):
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == '"':
            start = self.pos
            self.pos += 1
            out = []
            while True:
                if self.pos >= len(self.text):
                    self.error("unterminated quoted string", start)
                ch = self.text[self.pos]
                if ch == "\\" and self.pos + 1 < len(self.text):
                    out.append(self.text[self.pos + 1])
                    self.pos += 2
                    continue
                if ch == '"':
                    self.pos += 1
                    return "".join(out)
                out.append(ch)
                self.pos += 1
        m = _BARE.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def number(self, what="number"):
        self.skip_ws()
        start = self.pos
        tok = self.token(what)
        if not _NUMBER.match(tok):
            self.error(f"expected {what}, got {tok!r}", start)
        return float(tok)

    def end(self):
        if not self.at_end():
            self.error(f"unexpected {self.text[self.pos:]!r}")


# -- formatting helpers -------------------------------------------------------


def format_number(x: float) -> str:
    x = float(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_label(s: str) -> str:
    if s and _BARE.fullmatch(s):
        return s
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_relation(strata) -> str:
    return " > ".join(" ~ ".join(format_label(v) for v in s) for s in strata)


def parse_relation(text: str) -> tuple[tuple[str, ...], ...]:
    """Parse ``"a > b ~ c"`` into strata; the empty string means no statement."""
    line = _Line(text, 0)
    strata = _relation(line)
    line.end()
    return strata


def _relation(line: _Line):
    strata = []
    if line.at_end() or line.peek() == "@":
        return ()
    while True:
        stratum = [line.token("value")]
        while line.accept("~"):
            stratum.append(line.token("value"))
        strata.append(tuple(stratum))
        if not line.accept(">"):
            break
    return tuple(strata)


# -- parsing --------------------------------------------------------------------


def _context(line: _Line, spec_of):
    ctx = []
    while True:
        line.skip_ws()
        start = line.pos
        key = line.token("parent name")
        line.expect("=")
        vstart = line.pos
        raw = line.token("value")
        spec = spec_of(key)
        if spec is None:
            line.error(f"unknown variable {key!r} in context", start)
        if spec.is_numeric and raw not in BUCKET_LABELS:
            if not _NUMBER.match(raw):
                line.error(f"expected number or bucket label for {key}, got {raw!r}", vstart)
            value = float(raw)
        else:
            value = raw
        ctx.append((key, value))
        if not line.accept(","):
            return tuple(ctx)


def parse_net(text: str) -> NetDocument:
    """Parse a net document.

    Raises :class:`NetSyntaxError` with line and column on malformed input,
    duplicate variables and references to undeclared variables.
    Structural problems (layering, cycles, incomplete tables) are left to
    :func:`sepnets.prefmodel.validate`.
    """
    if text.startswith("\ufeff"):
        text = text[1:]
    name = description = ""
    section = None
    variables: list[VariableSpec] = []
    var_lines: dict[str, int] = {}
    pending_parents: list[tuple[str, str, _Line, int]] = []
    cp_rows: dict[str, list[CpStatement]] = {}
    ef_rows: dict[str, list] = {}
    seen_ctx: set = set()

    def spec_of(n):
        for v in variables:
            if v.name == n:
                return v
        return None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _Line(raw, lineno)
        if line.at_end():
            continue
        if line.peek() == "[":
            line.expect("[")
            sec = line.token("section name")
            if sec not in SECTIONS:
                line.error(f"unknown section {sec!r}")
            line.expect("]")
            line.end()
            section = sec
            continue

        if section is None:
            key = line.token("header")
            if key not in ("name", "description"):
                line.error(f"expected 'name:' or 'description:' before the first section, got {key!r}")
            line.expect(":")
            value = raw[line.pos:].strip()
            if key == "name":
                name = value
            else:
                description = value
            continue

        if section == "variables":
            start = line.pos
            vname = line.token("variable name")
            if vname in var_lines:
                line.error(f"duplicate variable {vname!r} (first declared on line {var_lines[vname]})", start)
            line.expect(":")
            kpos = line.pos
            kind_tok = line.token("variable class")
            try:
                kind = VarClass(kind_tok)
            except ValueError:
                line.error(f"unknown variable class {kind_tok!r}", kpos)
            values, bounds, quartiles = (), None, None
            if kind is VarClass.EVALUATION:
                line.expect("[")
                lo = line.number("minimum")
                line.expect(",")
                hi = line.number("maximum")
                line.expect("]")
                bounds = (lo, hi)
                if line.accept("quartiles"):
                    line.expect("(")
                    qs = [line.number("quartile")]
                    for _ in range(2):
                        line.expect(",")
                        qs.append(line.number("quartile"))
                    line.expect(")")
                    quartiles = tuple(qs)
            else:
                line.expect("{")
                vals = []
                if line.peek() != "}":
                    vals.append(line.token("value"))
                    while line.accept(","):
                        vals.append(line.token("value"))
                line.expect("}")
                values = tuple(vals)
            parents = []
            if line.accept("<-"):
                while True:
                    ppos = line.pos
                    parents.append(line.token("parent name"))
                    pending_parents.append((vname, parents[-1], line, ppos))
                    if not line.accept(","):
                        break
            line.end()
            var_lines[vname] = lineno
            variables.append(VariableSpec(vname, kind, values, bounds, tuple(parents), quartiles))
            continue

        # cptables / evalfunctions rows
        start = line.pos
        owner = line.token("variable name")
        if spec_of(owner) is None:
            line.error(f"unknown variable {owner!r}", start)
        ctx = _context(line, spec_of) if line.accept("|") else ()
        line.expect(":")
        key = (section, owner, frozenset(ctx))
        if key in seen_ctx:
            line.error(f"duplicate context for {owner}", start)
        seen_ctx.add(key)
        if section == "cptables":
            strata = _relation(line)
            annotation = line.number("annotation") if line.accept("@") else None
            line.end()
            cp_rows.setdefault(owner, []).append(CpStatement(ctx, strata, annotation))
        else:
            value = line.number("evaluation value")
            line.end()
            ef_rows.setdefault(owner, []).append((ctx, value))

    declared = {v.name for v in variables}
    for vname, parent, line, pos in pending_parents:
        if parent not in declared:
            line.error(f"unknown parent {parent!r} of {vname}", pos)

    def in_parent_order(owner, ctx):
        order = spec_of(owner).parents
        rank = {p: i for i, p in enumerate(order)}
        return tuple(sorted(ctx, key=lambda kv: rank.get(kv[0], len(order))))

    cp_rows = {
        k: [CpStatement(in_parent_order(k, st.context), st.strata, st.annotation) for st in rows]
        for k, rows in cp_rows.items()
    }
    ef_rows = {k: [(in_parent_order(k, c), v) for c, v in rows] for k, rows in ef_rows.items()}

    return NetDocument(
        tuple(variables),
        cp_rows,
        {k: EvaluationFunction(k, tuple(v)) for k, v in ef_rows.items()},
        name,
        description,
    )


# -- serialization ------------------------------------------------------------


def _format_context(net: NetDocument, var: str, context) -> str:
    ctx = dict(context)
    order = list(net.var(var).parents) if var in net else []
    keys = [k for k in order if k in ctx] + [k for k in ctx if k not in order]
    parts = []
    for k in keys:
        v = ctx[k]
        parts.append(f"{format_label(k)}={format_label(v) if isinstance(v, str) else format_number(v)}")
    return ", ".join(parts)


def serialize_net(net: NetDocument) -> str:
    """Canonical text of ``net``; ``parse_net(serialize_net(n)) == n`` for
    nets whose contexts list parents in declaration order."""
    out = []
    if net.name:
        out.append(f"name: {net.name}")
    if net.description:
        out.append(f"description: {net.description}")
    if out:
        out.append("")
    out.append("[variables]")
    for v in net.variables:
        if v.is_numeric:
            lo, hi = v.bounds if v.bounds is not None else (0.0, 0.0)
            dom = f"[{format_number(lo)}, {format_number(hi)}]"
            if v.quartiles is not None:
                dom += " quartiles (" + ", ".join(format_number(q) for q in v.quartiles) + ")"
        else:
            dom = "{" + ", ".join(format_label(x) for x in v.values) + "}"
        line = f"{format_label(v.name)}: {v.kind.value} {dom}"
        if v.parents:
            line += " <- " + ", ".join(format_label(p) for p in v.parents)
        out.append(line)
    out.append("")
    out.append("[cptables]")
    names = list(net.names)
    for var in sorted(net.cp_tables, key=lambda k: (names.index(k) if k in names else len(names), k)):
        for st in net.cp_tables[var]:
            head = format_label(var)
            if st.context:
                head += " | " + _format_context(net, var, st.context)
            rel = format_relation(st.strata)
            line = f"{head}: {rel}" if rel else f"{head}:"
            if st.annotation is not None:
                line += f" @ {format_number(st.annotation)}"
            out.append(line)
    out.append("")
    out.append("[evalfunctions]")
    for var in sorted(net.eval_functions, key=lambda k: (names.index(k) if k in names else len(names), k)):
        for ctx, value in net.eval_functions[var].table:
            head = format_label(var)
            if ctx:
                head += " | " + _format_context(net, var, ctx)
            out.append(f"{head}: {format_number(value)}")
    return "\n".join(out) + "\n"
