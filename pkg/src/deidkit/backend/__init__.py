"""Pluggable token scorers.

Three backends share one interface (``class_order``, ``score_tokens``):
the natively trained reference linear classifier, the rule/regex baseline,
and the adapter for external transformer scorers. Probability rows always
align with the bound concept database's class order, and always sum to 1
within 1e-6.
"""

from __future__ import annotations

import numpy as np

from ..corpus import DatasetVersion
from ..errors import UnsupportedBackend
from .external import BACKEND_EXTERNAL, EXTERNAL_TRAINING_TEMPLATE, ExternalScorer
from .features import DEFAULT_HASH_DIM, doc_features, feature_matrix, token_features
from .reference import (
    BACKEND_REFERENCE,
    DroppedClassWarning,
    LinearTokenScorer,
    TrainConfig,
    fine_tune,
    load_model,
    save_model,
)
from .reference import train as _train_reference
from .rules import BACKEND_RULES, RuleBaselineScorer, rule_baseline_db

__all__ = [
    "BACKEND_EXTERNAL",
    "BACKEND_REFERENCE",
    "BACKEND_RULES",
    "DEFAULT_HASH_DIM",
    "DroppedClassWarning",
    "EXTERNAL_TRAINING_TEMPLATE",
    "ExternalScorer",
    "LinearTokenScorer",
    "RuleBaselineScorer",
    "TrainConfig",
    "doc_features",
    "feature_matrix",
    "fine_tune",
    "load_model",
    "rule_baseline_db",
    "save_model",
    "score",
    "token_features",
    "train",
    "validate_prediction",
]


def train(backend_kind: str, ds: DatasetVersion, doc_ids, cfg: TrainConfig):
    """Train a scorer of the given kind on the listed documents."""
    if backend_kind == BACKEND_REFERENCE:
        return _train_reference(ds, doc_ids, cfg)
    if backend_kind == BACKEND_RULES:
        raise UnsupportedBackend(
            "the rule baseline is not trainable; use rule_baseline_db()")
    if backend_kind == BACKEND_EXTERNAL:
        raise UnsupportedBackend(
            "external scorers are trained on their own side of the wire; "
            "construct an ExternalScorer instead")
    raise UnsupportedBackend(f"unknown backend kind: {backend_kind}")


def score(model, tokens) -> np.ndarray:
    """Score tokens and enforce the normalization invariant on the result."""
    probs = model.score_tokens(tuple(tokens))
    validate_prediction(probs, len(tokens), len(model.class_order))
    return probs


def validate_prediction(probs: np.ndarray, n_tokens: int, n_classes: int) -> None:
    if probs.shape != (n_tokens, n_classes):
        raise ValueError(f"prediction shape {probs.shape} != ({n_tokens}, {n_classes})")
    if probs.size == 0:
        return
    if probs.min() < 0 or probs.max() > 1:
        raise ValueError("probabilities outside [0, 1]")
    if np.abs(probs.sum(axis=1) - 1.0).max() > 1e-6:
        raise ValueError("probability rows do not sum to 1 within 1e-6")
