"""Recall-biased decoding: down-weight the non-PHI class before argmax.

The adjusted vector keeps every positive-class entry bitwise unchanged and
scales only entry 0 by (1 - lambda). It is NOT renormalized: only argmax
consumes it, and renormalizing would not change any decision. Downstream
code must never treat adjusted vectors as probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import LambdaOutOfRange
from .evaluation import MetricsReport, evaluate
from .tokenizer import TokenLabeling, project_spans, tokenize


@dataclass(frozen=True)
class BiasConfig:
    lam: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise LambdaOutOfRange(f"lambda must be in [0, 1], got {self.lam}")


def adjust(probs: np.ndarray, cfg: BiasConfig) -> np.ndarray:
    """Apply the negative-class down-weighting to one probability vector."""
    probs = np.asarray(probs, dtype=np.float64)
    out = probs.copy()
    out[..., 0] = probs[..., 0] - cfg.lam * probs[..., 0]
    return out


def decide(adjusted: Sequence[float]) -> int:
    """Argmax with the recall-first tie rule.

    A tie between class 0 and a positive class resolves to the positive
    class; ties among positive classes resolve to the lowest index.
    """
    vec = np.asarray(adjusted, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError("decide expects a nonempty 1-d score vector")
    if vec.size == 1:
        return 0
    best_pos = 1 + int(np.argmax(vec[1:]))
    return best_pos if vec[best_pos] >= vec[0] else 0


def decide_labels(probs: np.ndarray, lam: float) -> np.ndarray:
    """Vectorized adjust-then-decide over a (tokens, classes) matrix."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape[0] == 0 or probs.shape[1] == 1:
        return np.zeros(probs.shape[0], dtype=np.int64)
    adjusted0 = probs[:, 0] - lam * probs[:, 0]
    best_pos = 1 + np.argmax(probs[:, 1:], axis=1)
    pos_score = probs[np.arange(len(probs)), best_pos]
    return np.where(pos_score >= adjusted0, best_pos, 0).astype(np.int64)


def sweep(
    model,
    ds,
    doc_ids: Sequence[str],
    lambda_grid: Sequence[float],
    provenance: Mapping | None = None,
) -> list[MetricsReport]:
    """Evaluate one model across a lambda grid, scoring each document once.

    Raw predictions are cached and only the decision step is repeated per
    lambda, so every report reflects identical model outputs.
    """
    grid = list(lambda_grid)
    for lam in grid:
        if not (0.0 <= lam <= 1.0):
            raise LambdaOutOfRange(f"lambda grid value out of range: {lam}")
    if grid != sorted(grid):
        raise ValueError("lambda grid must be sorted ascending")

    class_index = {cid: i for i, cid in enumerate(model.class_order)}
    gold: dict[str, TokenLabeling] = {}
    cached: dict[str, np.ndarray] = {}
    tokens_by_doc = {}
    for doc_id in sorted(doc_ids):
        doc = ds.document(doc_id)
        tokens = tokenize(doc.text)
        tokens_by_doc[doc_id] = tokens
        gold[doc_id] = project_spans(
            tokens, ds.spans_for(doc_id), class_index, doc_id, len(doc.text))
        cached[doc_id] = model.score_tokens(tokens)

    reports = []
    for lam in grid:
        pred = {
            doc_id: TokenLabeling(doc_id, tuple(decide_labels(cached[doc_id], lam).tolist()))
            for doc_id in cached
        }
        prov = dict(provenance or {})
        prov["lambda"] = lam
        reports.append(evaluate(gold, pred, model.class_order, prov))
    return reports
