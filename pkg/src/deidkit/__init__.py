"""deidkit: PHI de-identification toolkit for free-text health records.

Detects PHI spans with pluggable token scorers, biases decisions toward
recall, renders redacted or pseudonymized text, evaluates with per-class
and merged metrics, and runs an iterative k-fold annotation-audit loop.
"""

__version__ = "0.1.0"

from .bias import BiasConfig, adjust, decide, decide_labels, sweep
from .corpus import (
    DatasetVersion,
    Document,
    GoldSpan,
    PreprocessConfig,
    dataset_to_exchange_json,
    ingest,
    preprocess,
    split,
)
from .evaluation import MetricsReport, evaluate, report_table
from .ontology import (
    NON_PHI,
    Concept,
    ConceptDb,
    build_default_db,
    load_db,
    remap_granularity,
    save_db,
)
from .redactor import PlanSpan, RedactedOutput, RedactionPlan, redact, surrogate
from .synth import SynthConfig, generate
from .tokenizer import Token, TokenLabeling, lift_labels, project_spans, tokenize

__all__ = [
    "BiasConfig",
    "Concept",
    "ConceptDb",
    "DatasetVersion",
    "Document",
    "GoldSpan",
    "MetricsReport",
    "NON_PHI",
    "PlanSpan",
    "PreprocessConfig",
    "RedactedOutput",
    "RedactionPlan",
    "SynthConfig",
    "Token",
    "TokenLabeling",
    "adjust",
    "build_default_db",
    "dataset_to_exchange_json",
    "decide",
    "decide_labels",
    "evaluate",
    "generate",
    "ingest",
    "lift_labels",
    "load_db",
    "preprocess",
    "project_spans",
    "redact",
    "remap_granularity",
    "report_table",
    "save_db",
    "split",
    "surrogate",
    "sweep",
    "tokenize",
]
