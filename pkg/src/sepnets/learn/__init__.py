"""Learning SEP-nets from moral-judgment survey data."""

from .pipeline import (
    JUDGMENT,
    EdgeReport,
    LearnConfig,
    OrderEffectRow,
    OrderEffectScreen,
    StructureResult,
    build_net,
    cp_table_estimate,
    decide,
    estimate_ef,
    infer_structure,
    order_effect_screen,
    run_tests,
)
from .survey import (
    EVAL_VARS,
    HEADER,
    LOCATIONS,
    REASONS,
    OrderCondition,
    SurveyRecord,
    ingest,
    parse_survey,
    write_survey,
)
from .synthetic import cell_sample, plant_order_effect, structured_survey, survey_sample

__all__ = [
    "EVAL_VARS",
    "EdgeReport",
    "HEADER",
    "JUDGMENT",
    "LOCATIONS",
    "LearnConfig",
    "OrderCondition",
    "OrderEffectRow",
    "OrderEffectScreen",
    "REASONS",
    "StructureResult",
    "SurveyRecord",
    "build_net",
    "cell_sample",
    "cp_table_estimate",
    "decide",
    "estimate_ef",
    "infer_structure",
    "ingest",
    "order_effect_screen",
    "parse_survey",
    "plant_order_effect",
    "run_tests",
    "structured_survey",
    "survey_sample",
    "write_survey",
]
