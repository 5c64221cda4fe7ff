"""Command-line interface: ``sepnets <command> ...``.

Commands::

    validate  NET                      structural report; exit 1 on violations
    optimal   NET --scenario K=V ...   most preferred outcome, comma-joined
    dominance NET A B                  relation, then the witness chain
    order     NET [--format F] [--out] induced preorder (csv, dot, json-lines)
    learn     CSV --out NET            learn a SEP-net from survey data
    report    --location-ev F ...      replay the edge rule on p-value tables

Outcomes are written as comma-joined values in declaration order
(``a,o,c_bar``) or as ``K=V`` pairs (``S=a,T=o,P=c_bar``).  A label ending
in ``_bar`` also matches the same label with a combining overline.

Exit codes: 0 success, 1 semantic failure, 2 input error, 3 outcome cap
exceeded.  Results go to stdout, diagnostics and the run manifest to stderr
unless ``--manifest`` names a file.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import unicodedata
import warnings
from datetime import datetime, timezone
from typing import Sequence

from . import __version__
from .errors import (
    AmbiguousTop,
    CapExceeded,
    CyclicNetError,
    MissingEfEntry,
    NetSyntaxError,
    OutcomeError,
    SurveyFormatError,
)
from .export import to_csv, to_dot, to_jsonl
from .prefmodel import NetDocument, Outcome, VarClass, parse_net, serialize_net, validate
from .semantics import dominates, induced_preorder, optimal_outcome
from .sepnet import ScenarioAssignment, all_scenarios, apply_ef, sep_optimal, sep_order

EXIT_OK, EXIT_SEMANTIC, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
OVERLINE = "\u0304"
log = logging.getLogger("sepnets")


class UsageError(Exception):
    """Bad command-line input (exit 2)."""


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Everything needed to rerun a command; only ``timestamp`` varies."""

    command: str
    inputs: dict
    flags: dict
    seed: int | None
    version: str
    timestamp: str
    argv: tuple[str, ...] = ()

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d["argv"] = list(self.argv)
        return json.dumps(d, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        d["argv"] = tuple(d.get("argv", ()))
        return cls(**d)

    def reproducible(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("timestamp")
        return d


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_net(path: str) -> NetDocument:
    return parse_net(_read_text(path))


# -- labels and outcomes ---------------------------------------------------------


def resolve_label(net: NetDocument, var: str, raw: str):
    """Domain value of ``var`` written as ``raw``, accepting ``x_bar`` for x̄."""
    if var not in net:
        raise UsageError(f"unknown variable {var!r}")
    spec = net.var(var)
    raw = raw.strip()
    if spec.is_numeric:
        try:
            return float(raw)
        except ValueError:
            raise UsageError(f"{var} takes a number, got {raw!r}") from None
    nfc = unicodedata.normalize("NFC", raw)
    candidates = {raw, nfc}
    if raw.endswith("_bar"):
        candidates.add(unicodedata.normalize("NFC", raw[:-4] + OVERLINE))
    nfd = unicodedata.normalize("NFD", raw)
    if nfd.endswith(OVERLINE):
        candidates.add(nfd[:-1] + "_bar")
    for value in spec.values:
        if value in candidates or unicodedata.normalize("NFC", value) in candidates:
            return value
    raise UsageError(f"{raw!r} is not a value of {var} (values: {', '.join(spec.values)})")


def _split_pairs(items: Sequence[str]) -> list[str]:
    out = []
    for item in items:
        out.extend(p for p in item.split(",") if p.strip())
    return out


def parse_assignments(net: NetDocument, items: Sequence[str]) -> dict:
    out = {}
    for pair in _split_pairs(items):
        if "=" not in pair:
            raise UsageError(f"expected K=V, got {pair!r}")
        k, v = (s.strip() for s in pair.split("=", 1))
        out[k] = resolve_label(net, k, v)
    return out


def parse_outcome(net: NetDocument, text: str) -> Outcome:
    parts = [p.strip() for p in text.split(",")]
    try:
        if all("=" in p for p in parts):
            return Outcome.of(net, parse_assignments(net, parts))
        if len(parts) != len(net.names):
            raise UsageError(f"outcome {text!r} has {len(parts)} values, the net has {len(net.names)} variables")
        return Outcome.of(net, [resolve_label(net, n, p) for n, p in zip(net.names, parts)])
    except OutcomeError as exc:
        raise UsageError(str(exc)) from None


def _is_sep(net: NetDocument) -> bool:
    return bool(net.of_kind(VarClass.EVALUATION))


# -- commands --------------------------------------------------------------------


def cmd_validate(args) -> int:
    net = _load_net(args.net)
    report = validate(net)
    for issue in report.violations:
        print(f"violation\t{issue.code}\t{issue.variable or ''}\t{issue.message}")
    for issue in report.notes:
        print(f"note\t{issue.code}\t{issue.variable or ''}\t{issue.message}")
    print("ok" if report.ok else "invalid")
    return EXIT_OK if report.ok else EXIT_SEMANTIC


def cmd_optimal(args) -> int:
    net = _load_net(args.net)
    fixed = parse_assignments(net, args.scenario)
    scen = [v.name for v in net.of_kind(VarClass.SCENARIO)]
    missing = [n for n in scen if n not in fixed]
    if missing:
        raise UsageError(f"--scenario must assign every scenario variable; missing {', '.join(missing)}")
    if _is_sep(net):
        extra = [k for k in fixed if k not in scen]
        if extra:
            raise UsageError(f"only scenario variables can be fixed in a SEP-net, not {', '.join(extra)}")
        best = sep_optimal(net, ScenarioAssignment.of(net, fixed), tie_break=args.tie_break).to_outcome(net)
    else:
        best = optimal_outcome(net, fixed, tie_break=args.tie_break)
    print(best.label())
    return EXIT_OK


def cmd_dominance(args) -> int:
    net = _load_net(args.net)
    a, b = parse_outcome(net, args.a), parse_outcome(net, args.b)
    res = dominates(net, a, b, cap=args.cap)
    print(res.relation.name)
    for e in res.witness:
        print(f"{e.source.label()}\t{e.target.label()}\t{e.variable}\t{e.kind.value}")
    return EXIT_OK


_WRITERS = {"dot": to_dot, "csv": to_csv, "json-lines": to_jsonl}


def cmd_order(args) -> int:
    net = _load_net(args.net)
    fmt = args.format
    out = args.out
    if args.dot:
        fmt, out = "dot", args.dot
    fixed = parse_assignments(net, args.scenario)
    if _is_sep(net):
        if fixed:
            scenarios = [ScenarioAssignment.of(net, fixed)]
        else:
            scenarios = []
            for s in all_scenarios(net):
                try:
                    apply_ef(net, s)
                except MissingEfEntry as exc:
                    log.warning("skipping scenario %s: %s", s.label, exc)
                    continue
                scenarios.append(s)
        graph = sep_order(net, scenarios, cap=args.cap)
    else:
        graph = induced_preorder(net, fixed, cap=args.cap)
    text = _WRITERS[fmt](graph)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"{len(graph.components)} components, {len(graph.nodes)} outcomes, {len(graph.edges)} flips", file=sys.stderr)
    return EXIT_OK


REPORT_FILES = {
    "order": "order_effects.csv",
    "location_ev": "location_ev.csv",
    "location_judgment": "location_judgment.csv",
    "tests": "tests.csv",
    "edges": "edges.csv",
}


def _learn_config(args):
    from .learn.pipeline import LearnConfig

    return LearnConfig(
        between_test=args.between_test,
        within_test=args.within_test,
        rule=args.rule,
        min_n=args.min_n,
        nh2_pairs=args.nh2_pairs,
        nh3_seed=args.seed if args.nh3_random else None,
        include_extra_scenario=args.include_extra,
        bonferroni=args.bonferroni,
        estimator=args.estimator,
        quartile_method=args.quartiles,
        delta=args.delta,
        jobs=args.jobs,
    )


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_learn(args) -> int:
    from .learn import reports
    from .learn.pipeline import infer_structure, order_effect_screen
    from .learn.survey import ingest

    config = _learn_config(args)
    records = ingest(args.csv)
    reports_dir = args.reports or os.path.dirname(os.path.abspath(args.out))
    os.makedirs(reports_dir, exist_ok=True)

    screen = order_effect_screen(records, args.alpha, test=config.between_test)
    _write(os.path.join(reports_dir, REPORT_FILES["order"]), reports.order_effects_csv(screen))
    if not screen.pooled and not args.force_pool:
        bad = ", ".join(r.reason for r in screen.rows if r.result.reject)
        print(f"order effect detected ({bad}); pass --force-pool to learn anyway", file=sys.stderr)
        return EXIT_SEMANTIC

    result = infer_structure(records, args.alpha, config)
    _write(args.out, serialize_net(result.net))
    _write(os.path.join(reports_dir, REPORT_FILES["location_ev"]), reports.location_ev_from_edges(result.edges))
    _write(os.path.join(reports_dir, REPORT_FILES["location_judgment"]), reports.location_judgment_from_edges(result.edges))
    _write(os.path.join(reports_dir, REPORT_FILES["tests"]), reports.tests_csv(result.edges))
    edges = reports.edges_csv(result.edges)
    _write(os.path.join(reports_dir, REPORT_FILES["edges"]), edges)
    sys.stdout.write(edges)
    if args.manifest is None:
        args.manifest = os.path.join(reports_dir, "manifest.json")
    return EXIT_OK


def cmd_report(args) -> int:
    from .learn import reports

    ev = reports.read_location_ev(_read_text(args.location_ev), args.alpha) if args.location_ev else {}
    judgment = reports.read_location_judgment(_read_text(args.location_judgment), args.alpha) if args.location_judgment else []
    for src, tgt in sorted(reports.replay_edges(ev, judgment, args.rule)):
        print(f"edge\t{src}\t{tgt}")
    if args.order_effects:
        rows = reports.read_order_effects(_read_text(args.order_effects), args.alpha)
        rejected = [label for label, r in rows if r.reject]
        for label in rejected:
            print(f"order-effect\t{label}")
        print(f"pooled\t{not rejected}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _alpha(text: str) -> float:
    a = float(text)
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sepnets", description="Reason over and learn SEP-nets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    p.add_argument("--manifest", help="write the run manifest (JSON) to this file")
    sub = p.add_subparsers(dest="command", required=True)

    def net_cmd(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("net", help="net document")
        sp.set_defaults(func=func, inputs=("net",))
        return sp

    net_cmd("validate", cmd_validate, "check a net document")

    sp = net_cmd("optimal", cmd_optimal, "most preferred outcome for a scenario")
    sp.add_argument("--scenario", action="append", default=[], metavar="K=V")
    sp.add_argument("--tie-break", action="store_true", help="take the first of tied top values")

    sp = net_cmd("dominance", cmd_dominance, "compare two outcomes")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--cap", type=_positive, help="max outcomes visited (default $SEPNETS_MAX_OUTCOMES or 2^20)")

    sp = net_cmd("order", cmd_order, "materialize the induced preorder")
    sp.add_argument("--format", choices=sorted(_WRITERS), default="dot")
    sp.add_argument("--out", help="output file (default stdout)")
    sp.add_argument("--dot", metavar="OUT", help="shorthand for --format dot --out OUT")
    sp.add_argument("--scenario", action="append", default=[], metavar="K=V")
    sp.add_argument("--cap", type=_positive)

    sp = sub.add_parser("learn", help="learn a SEP-net from a survey CSV")
    sp.add_argument("csv")
    sp.add_argument("--out", required=True, help="learned net document")
    sp.add_argument("--reports", help="directory for CSV reports (default: next to --out)")
    sp.add_argument("--alpha", type=_alpha, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nh3-random", action="store_true", help="draw the per-location reason subset from --seed")
    sp.add_argument("--rule", choices=("any", "majority"), default="any")
    sp.add_argument("--between-test", choices=("rank_sum", "signed_rank"), default="rank_sum")
    sp.add_argument("--within-test", choices=("rank_sum", "signed_rank"), default="signed_rank")
    sp.add_argument("--nh2-pairs", choices=("within_location", "all"), default="within_location")
    sp.add_argument("--include-extra", action="store_true", help="also test MainService and AlreadyWaited")
    sp.add_argument("--bonferroni", action="store_true")
    sp.add_argument("--estimator", choices=("median", "mean"), default="median")
    sp.add_argument("--quartiles", choices=("tukey", "linear"), default="tukey")
    sp.add_argument("--min-n", type=_positive, default=5)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--force-pool", action="store_true", help="learn even if an order effect is found")
    sp.add_argument("--jobs", type=_positive, default=1)
    sp.set_defaults(func=cmd_learn, inputs=("csv",))

    sp = sub.add_parser("report", help="replay the edge rule on p-value tables")
    sp.add_argument("--location-ev", help="location-pair table for the evaluation variables")
    sp.add_argument("--location-judgment", help="location-pair table for the judgment")
    sp.add_argument("--order-effects", help="order-effect table")
    sp.add_argument("--alpha", type=_alpha, default=0.05)
    sp.add_argument("--rule", choices=("any", "majority"), default="any")
    sp.set_defaults(func=cmd_report, inputs=("location_ev", "location_judgment", "order_effects"))
    return p


def _manifest(args, argv) -> RunManifest:
    skip = {"func", "inputs", "manifest", "command", "verbose"}
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    inputs = {}
    for key in args.inputs:
        path = getattr(args, key, None)
        if path and os.path.exists(path):
            inputs[path] = _sha256(path)
    return RunManifest(
        command=args.command,
        inputs=inputs,
        flags=flags,
        seed=getattr(args, "seed", None),
        version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        argv=tuple(argv),
    )


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NetSyntaxError, SurveyFormatError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        for lineno, msg in getattr(exc, "rows", ())[20:]:
            print(f"  row {lineno}: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (AmbiguousTop, CyclicNetError, MissingEfEntry) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except (OutcomeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    manifest = _manifest(args, argv)
    if args.manifest:
        _write(args.manifest, manifest.to_json())
    else:
        print("manifest: " + json.dumps(dataclasses.asdict(manifest), sort_keys=True, ensure_ascii=False),
              file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
