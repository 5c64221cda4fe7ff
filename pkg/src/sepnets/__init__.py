"""SEP-nets: CP-nets split into scenario, evaluation and preference layers.

Subpackages and modules:

* :mod:`sepnets.prefmodel`  net documents, text format, validation
* :mod:`sepnets.semantics`  flips, dominance, optimal outcomes, induced preorders
* :mod:`sepnets.sepnet`     scenarios, evaluation functions, per-scenario orders
* :mod:`sepnets.stats`      rank tests, quartiles, correlation
* :mod:`sepnets.learn`      survey ingestion and structure learning
"""

from importlib import resources

from .errors import (
    AmbiguousTop,
    CapExceeded,
    CyclicNetError,
    MissingEfEntry,
    NetSyntaxError,
    OutcomeError,
    SepNetError,
    SurveyFormatError,
)
from .prefmodel import NetDocument, Outcome, parse_net, serialize_net, validate
from .semantics import Relation, dominates, induced_preorder, is_consistent, optimal_outcome
from .sepnet import apply_ef, project, sep_optimal, sep_order

__version__ = "0.1.0"


def load_bundled(name: str) -> NetDocument:
    """Parse one of the nets shipped in ``sepnets/data`` (e.g. ``"airport"``)."""
    text = resources.files(__package__).joinpath("data", f"{name}.sepnet").read_text(encoding="utf-8")
    return parse_net(text)


def bundled_path(name: str) -> str:
    return str(resources.files(__package__).joinpath("data", f"{name}.sepnet"))


__all__ = [
    "AmbiguousTop",
    "CapExceeded",
    "CyclicNetError",
    "MissingEfEntry",
    "NetDocument",
    "NetSyntaxError",
    "Outcome",
    "OutcomeError",
    "Relation",
    "SepNetError",
    "SurveyFormatError",
    "apply_ef",
    "bundled_path",
    "dominates",
    "induced_preorder",
    "is_consistent",
    "load_bundled",
    "optimal_outcome",
    "parse_net",
    "project",
    "sep_optimal",
    "sep_order",
    "serialize_net",
    "validate",
]
