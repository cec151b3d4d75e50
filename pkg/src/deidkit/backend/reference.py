"""Reference scorer: multinomial logistic regression over hashed features.

Training is full-batch gradient descent with a fixed iteration count, over
documents in canonical (doc_id-sorted) order, so the final parameters do
not depend on the order the caller supplies documents in. Inverse-frequency
class weights are on by default: PHI classes are rare against class 0.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..corpus import DatasetVersion
from ..errors import ClassOrderMismatch, EmptyTrainingSet
from ..ontology import NON_PHI, ConceptDb
from ..tokenizer import Token, project_spans
from .features import DEFAULT_HASH_DIM, doc_features, feature_matrix

BACKEND_REFERENCE = "reference-linear"


class DroppedClassWarning(UserWarning):
    """A class had no positive training examples and cannot be predicted."""


@dataclass(frozen=True)
class TrainConfig:
    db: ConceptDb
    seed: int = 0
    iterations: int = 250
    learning_rate: float = 0.5
    momentum: float = 0.9
    l2: float = 1e-4
    hash_dim: int = DEFAULT_HASH_DIM
    class_weighting: bool = True
    decision_lambda: float = 0.0


@dataclass(frozen=True)
class LinearTokenScorer:
    backend_kind: str = field(default=BACKEND_REFERENCE, init=False)
    class_order: tuple[str, ...] = ()
    weights: np.ndarray = None  # (n_classes, hash_dim)
    bias: np.ndarray = None  # (n_classes,)
    hash_dim: int = DEFAULT_HASH_DIM
    provenance: dict = field(default_factory=dict)

    @property
    def model_id(self) -> str:
        h = hashlib.sha256()
        h.update(self.weights.tobytes())
        h.update(self.bias.tobytes())
        h.update("\x00".join(self.class_order).encode())
        return h.hexdigest()[:12]

    def score_tokens(self, tokens: tuple[Token, ...]) -> np.ndarray:
        X = feature_matrix(tokens, self.hash_dim)
        return _softmax(X @ self.weights.T + self.bias)

    def score_text(self, text: str) -> tuple[tuple[Token, ...], np.ndarray]:
        tokens, X = doc_features(text, self.hash_dim)
        return tokens, _softmax(X @ self.weights.T + self.bias)


def _softmax(scores: np.ndarray) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    scores = scores - scores.max(axis=-1, keepdims=True)
    np.exp(scores, out=scores)
    scores /= scores.sum(axis=-1, keepdims=True)
    return scores


def _gather(ds: DatasetVersion, doc_ids, class_index, hash_dim):
    """Stack features and gold labels for the given documents in canonical order."""
    mats, labels = [], []
    for doc_id in sorted(doc_ids):
        doc = ds.document(doc_id)
        tokens, X = doc_features(doc.text, hash_dim)
        mats.append(X)
        labeling = project_spans(tokens, ds.spans_for(doc_id), class_index, doc_id, len(doc.text))
        labels.extend(labeling.labels)
    X = sparse.vstack(mats, format="csr") if mats else sparse.csr_matrix((0, hash_dim))
    return X, np.asarray(labels, dtype=np.int64)


def _descend(X, y, W, b, cfg: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    n_classes = W.shape[0]
    Y = np.zeros((len(y), n_classes))
    Y[np.arange(len(y)), y] = 1.0

    if cfg.class_weighting:
        counts = np.bincount(y, minlength=n_classes).astype(np.float64)
        present = counts > 0
        w_class = np.ones(n_classes)
        w_class[present] = counts[present].sum() / (present.sum() * counts[present])
        sample_w = w_class[y]
    else:
        sample_w = np.ones(len(y))
    total_w = sample_w.sum()

    # Work in the subspace of columns that can change: features present in
    # the data plus already-nonzero weights (fine-tuning). Columns outside it
    # have zero gradient and zero L2 pull, so results are identical.
    active = np.union1d(np.unique(X.indices), np.nonzero(np.any(W != 0, axis=0))[0])
    X_sub = X[:, active].tocsr()
    Xt = X_sub.T.tocsr()
    W_sub = np.ascontiguousarray(W[:, active])
    vW = np.zeros_like(W_sub)
    vb = np.zeros_like(b)
    for _ in range(cfg.iterations):
        P = _softmax(X_sub @ W_sub.T + b)
        G = (P - Y) * (sample_w / total_w)[:, None]
        grad_W = (Xt @ G).T + cfg.l2 * W_sub
        grad_b = G.sum(axis=0)
        vW = cfg.momentum * vW - cfg.learning_rate * grad_W
        vb = cfg.momentum * vb - cfg.learning_rate * grad_b
        W_sub = W_sub + vW
        b = b + vb
    W_out = W.copy()
    W_out[:, active] = W_sub
    return W_out, b


def train(ds: DatasetVersion, doc_ids, cfg: TrainConfig) -> LinearTokenScorer:
    doc_ids = tuple(doc_ids)
    if not doc_ids:
        raise EmptyTrainingSet("training requires at least one document")
    class_order = cfg.db.class_order
    class_index = {cid: i for i, cid in enumerate(class_order)}
    X, y = _gather(ds, doc_ids, class_index, cfg.hash_dim)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("training documents contain no tokens")

    counts = np.bincount(y, minlength=len(class_order))
    for c in range(1, len(class_order)):
        if counts[c] == 0:
            warnings.warn(
                f"class {class_order[c]!r} has no positive training examples; "
                f"it is dropped from this model's reachable predictions",
                DroppedClassWarning,
                stacklevel=2,
            )

    W = np.zeros((len(class_order), cfg.hash_dim))
    b = np.zeros(len(class_order))
    W, b = _descend(X, y, W, b, cfg)
    return LinearTokenScorer(
        class_order=class_order,
        weights=W,
        bias=b,
        hash_dim=cfg.hash_dim,
        provenance={
            "trained_on": [ds.version_id],
            "doc_count": len(doc_ids),
            "seed": cfg.seed,
            "iterations": cfg.iterations,
        },
    )


def fine_tune(model: LinearTokenScorer, ds: DatasetVersion, doc_ids,
              cfg: TrainConfig) -> LinearTokenScorer:
    """Continue training from the parent's parameters on new documents.

    The parent is untouched. A concept db whose class order extends the
    model's is allowed: existing rows are remapped, new classes start at
    zero. Zero new documents is a no-op that only extends provenance.
    """
    new_order = cfg.db.class_order
    if cfg.hash_dim != model.hash_dim:
        raise ClassOrderMismatch(
            f"hash_dim {cfg.hash_dim} differs from the parent model's {model.hash_dim}")
    if new_order != model.class_order:
        if new_order[0] != NON_PHI or not set(model.class_order).issubset(new_order):
            raise ClassOrderMismatch(
                f"model classes {model.class_order} are not a subset of the "
                f"target class order {new_order}")
        old_index = {cid: i for i, cid in enumerate(model.class_order)}
        W = np.zeros((len(new_order), model.hash_dim))
        b = np.zeros(len(new_order))
        for j, cid in enumerate(new_order):
            if cid in old_index:
                W[j] = model.weights[old_index[cid]]
                b[j] = model.bias[old_index[cid]]
    else:
        W = model.weights.copy()
        b = model.bias.copy()

    doc_ids = tuple(doc_ids)
    provenance = dict(model.provenance)
    provenance["trained_on"] = list(provenance.get("trained_on", [])) + [ds.version_id]
    provenance["fine_tuned_docs"] = len(doc_ids)
    if doc_ids:
        class_index = {cid: i for i, cid in enumerate(new_order)}
        X, y = _gather(ds, doc_ids, class_index, cfg.hash_dim)
        W, b = _descend(X, y, W, b, cfg)
    return LinearTokenScorer(
        class_order=new_order,
        weights=W,
        bias=b,
        hash_dim=model.hash_dim,
        provenance=provenance,
    )


# --- serialization ----------------------------------------------------------

def save_model(model: LinearTokenScorer, path) -> None:
    meta = {
        "backend_kind": model.backend_kind,
        "class_order": list(model.class_order),
        "hash_dim": model.hash_dim,
        "provenance": model.provenance,
    }
    np.savez(
        path,
        weights=model.weights,
        bias=model.bias,
        meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
    )


def load_model(path) -> LinearTokenScorer:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("backend_kind") != BACKEND_REFERENCE:
            raise ClassOrderMismatch(f"not a {BACKEND_REFERENCE} model file")
        return LinearTokenScorer(
            class_order=tuple(meta["class_order"]),
            weights=data["weights"],
            bias=data["bias"],
            hash_dim=meta["hash_dim"],
            provenance=meta["provenance"],
        )
