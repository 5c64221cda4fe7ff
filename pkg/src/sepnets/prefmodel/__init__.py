"""Net documents: types, text format and structural validation."""

from .format import format_number, parse_net, parse_relation, serialize_net
from .types import (
    CpStatement,
    EvaluationFunction,
    NetDocument,
    Outcome,
    VarClass,
    VariableSpec,
    make_net,
)
from .validate import (
    DEFAULT_CAP,
    Issue,
    ValidationReport,
    enumerate_outcomes,
    outcome_space_size,
    validate,
)

__all__ = [
    "CpStatement",
    "DEFAULT_CAP",
    "EvaluationFunction",
    "Issue",
    "NetDocument",
    "Outcome",
    "ValidationReport",
    "VarClass",
    "VariableSpec",
    "enumerate_outcomes",
    "format_number",
    "make_net",
    "outcome_space_size",
    "parse_net",
    "parse_relation",
    "serialize_net",
    "validate",
]
