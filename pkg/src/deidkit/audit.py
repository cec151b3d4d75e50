"""Iterative annotation-quality loop: k-fold disagreement mining and review.

Each round trains one model per fold on the other folds, scores the held-out
fold, and surfaces every disagreement between model and gold as a review
item. Items are mined at token-run granularity: one missed name yields one
item, not three.

Item kinds follow the annotation-audit perspective, because the loop exists
to find annotation mistakes:

- ``FN``: the annotation is missing PHI the model detected (gold 0,
  model nonzero), the dominant real-world case of annotators overlooking
  a mention;
- ``FP``: the annotation marks PHI the model rejects (gold nonzero,
  model 0);
- ``class-swap``: both nonzero and different.

A reviewer either fixes the annotation (creating a new dataset version) or
confirms the disagreement as a model error. The loop converges when a whole
round closes with zero fixes: every remaining disagreement is a confirmed
model error.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend as backend_mod
from .backend import TrainConfig
from .bias import decide_labels
from .corpus import ChangeEntry, DatasetVersion, apply_changelog
from .errors import ConflictingEdits, StaleItem, TooFewDocuments
from .evaluation import MetricsReport, evaluate
from .ontology import NON_PHI, ConceptDb
from .tokenizer import TokenLabeling, project_spans

KIND_FN = "FN"
KIND_FP = "FP"
KIND_SWAP = "class-swap"

STATUS_PENDING = "pending"
STATUS_FIXED = "annotator-error-fixed"
STATUS_CONFIRMED = "model-error-confirmed"

VERDICT_FIX = "fix-annotation"
VERDICT_CONFIRM = "confirm-model-error"


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignment: dict[str, int]

    def fold_docs(self, fold: int) -> tuple[str, ...]:
        return tuple(sorted(d for d, f in self.assignment.items() if f == fold))

    def other_docs(self, fold: int) -> tuple[str, ...]:
        return tuple(sorted(d for d, f in self.assignment.items() if f != fold))


def make_folds(ds: DatasetVersion, k: int = 5, seed: int = 0) -> FoldPlan:
    if k < 2:
        raise ValueError("k must be >= 2")
    ids = sorted(ds.doc_ids())
    if len(ids) < k:
        raise TooFewDocuments(f"{len(ids)} documents cannot fill {k} folds")
    rng = random.Random(seed)
    rng.shuffle(ids)
    return FoldPlan(k=k, seed=seed, assignment={doc: i % k for i, doc in enumerate(ids)})


@dataclass
class DisagreementItem:
    item_id: str
    doc_id: str
    token_start: int
    token_end: int  # exclusive
    start: int  # character offsets of the token run
    end: int
    kind: str
    gold_label: str
    model_label: str
    fold_index: int
    round_number: int
    status: str = STATUS_PENDING
    claimed_by: str | None = None
    trained_on: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "doc_id": self.doc_id,
            "token_start": self.token_start,
            "token_end": self.token_end,
            "start": self.start,
            "end": self.end,
            "kind": self.kind,
            "gold_label": self.gold_label,
            "model_label": self.model_label,
            "fold_index": self.fold_index,
            "round_number": self.round_number,
            "status": self.status,
            "claimed_by": self.claimed_by,
        }


@dataclass(frozen=True)
class SpanEdit:
    doc_id: str
    start: int
    end: int
    concept_id: str | None  # None deletes overlapping gold spans

    def overlaps(self, other: "SpanEdit") -> bool:
        return self.doc_id == other.doc_id and self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class ReviewDecision:
    item_id: str
    verdict: str
    edits: tuple[SpanEdit, ...] = ()
    reviewer_id: str = "anonymous"
    timestamp: str = ""

    def __post_init__(self):
        if self.verdict not in (VERDICT_FIX, VERDICT_CONFIRM):
            raise ValueError(f"unknown verdict: {self.verdict}")
        if self.verdict == VERDICT_FIX and not self.edits:
            raise ValueError("fix-annotation requires at least one edit")
        if self.verdict == VERDICT_CONFIRM and self.edits:
            raise ValueError("confirm-model-error carries no edits")


@dataclass(frozen=True)
class RoundResult:
    round_number: int
    plan: FoldPlan
    items: tuple[DisagreementItem, ...]
    gold: dict[str, TokenLabeling]
    probs: dict[str, np.ndarray]
    class_order: tuple[str, ...]

    def metrics(self, lam: float = 0.0, provenance: dict | None = None) -> MetricsReport:
        pred = {
            d: TokenLabeling(d, tuple(decide_labels(p, lam).tolist()))
            for d, p in self.probs.items()
        }
        prov = dict(provenance or {})
        prov.update({"round": self.round_number, "lambda": lam})
        return evaluate(self.gold, pred, self.class_order, prov)

    def sweep_series(self, grid=None) -> list[dict]:
        grid = [round(x, 10) for x in (grid or [i / 10 for i in range(11)])]
        series = []
        for lam in grid:
            rep = self.metrics(lam)
            micro_p, micro_r, _ = rep.micro()
            series.append({
                "lambda": lam,
                "precision": micro_p,
                "recall": micro_r,
                "merged_precision": rep.merged_precision,
                "merged_recall": rep.merged_recall,
            })
        return series


def run_round(
    ds: DatasetVersion,
    plan: FoldPlan,
    backend_kind: str,
    cfg: TrainConfig,
    round_number: int = 1,
) -> RoundResult:
    """Train k held-out models and mine disagreement items.

    Every document is scored exactly once, by the model whose training
    folds exclude it; the items record that model's training set so the
    no-leakage property stays checkable.
    """
    class_order = cfg.db.class_order
    class_index = {cid: i for i, cid in enumerate(class_order)}
    items: list[DisagreementItem] = []
    gold: dict[str, TokenLabeling] = {}
    probs: dict[str, np.ndarray] = {}

    for fold in range(plan.k):
        train_docs = plan.other_docs(fold)
        test_docs = plan.fold_docs(fold)
        model = backend_mod.train(backend_kind, ds, train_docs, cfg)
        trained_on = frozenset(train_docs)
        for doc_id in test_docs:
            doc = ds.document(doc_id)
            tokens, doc_probs = model.score_text(doc.text)
            labeling = project_spans(
                tokens, ds.spans_for(doc_id), class_index, doc_id, len(doc.text))
            decisions = decide_labels(doc_probs, cfg.decision_lambda)
            gold[doc_id] = labeling
            probs[doc_id] = doc_probs
            items.extend(_mine_runs(
                doc_id, tokens, labeling.labels, decisions, class_order,
                fold, round_number, trained_on))
    return RoundResult(
        round_number=round_number,
        plan=plan,
        items=tuple(items),
        gold=gold,
        probs=probs,
        class_order=class_order,
    )


def _mine_runs(doc_id, tokens, gold_labels, model_labels, class_order,
               fold, round_number, trained_on):
    items = []
    i = 0
    n = len(tokens)
    while i < n:
        g, m = gold_labels[i], int(model_labels[i])
        if g == m:
            i += 1
            continue
        j = i + 1
        while j < n and gold_labels[j] == g and int(model_labels[j]) == m:
            j += 1
        if g == 0:
            kind = KIND_FN  # annotation lacks PHI the model found
        elif m == 0:
            kind = KIND_FP  # annotation marks PHI the model rejects
        else:
            kind = KIND_SWAP
        items.append(DisagreementItem(
            item_id=f"r{round_number}:{doc_id}:{i}-{j}",
            doc_id=doc_id,
            token_start=i,
            token_end=j,
            start=tokens[i].start,
            end=tokens[j - 1].end,
            kind=kind,
            gold_label=class_order[g],
            model_label=class_order[m],
            fold_index=fold,
            round_number=round_number,
            trained_on=trained_on,
        ))
        i = j
    return items


def apply_decisions(
    ds: DatasetVersion,
    decisions,
    items: dict[str, DisagreementItem],
    db: ConceptDb | None = None,
) -> DatasetVersion:
    """Close items per the decisions; fixes produce a child dataset version.

    Returns the same version when no decision fixes the annotation. Raises
    StaleItem for unknown/closed items and ConflictingEdits when two fixes
    touch overlapping ranges.
    """
    decisions = list(decisions)
    fix_edits: list[SpanEdit] = []
    for d in decisions:
        item = items.get(d.item_id)
        if item is None:
            raise StaleItem(f"unknown item: {d.item_id}")
        if item.status != STATUS_PENDING:
            raise StaleItem(f"item {d.item_id} is already {item.status}")
        if item.claimed_by is not None and d.reviewer_id != item.claimed_by:
            raise StaleItem(
                f"item {d.item_id} is claimed by {item.claimed_by!r}")
        if d.verdict == VERDICT_FIX:
            for edit in d.edits:
                if edit.doc_id != item.doc_id:
                    raise StaleItem(
                        f"edit doc {edit.doc_id!r} does not match item doc {item.doc_id!r}")
                clash = next((e for e in fix_edits if e.overlaps(edit)), None)
                if clash is not None:
                    raise ConflictingEdits(
                        f"edits overlap in doc {edit.doc_id!r}: "
                        f"[{clash.start},{clash.end}) and [{edit.start},{edit.end})")
                fix_edits.append(edit)

    changelog: list[ChangeEntry] = []
    removed: set[tuple] = set()
    for edit in fix_edits:
        for s in ds.spans_for(edit.doc_id):
            key = (s.doc_id, s.start, s.end, s.concept_id)
            if s.start < edit.end and edit.start < s.end and key not in removed:
                removed.add(key)
                changelog.append(ChangeEntry("remove", s.doc_id, s.start, s.end, s.concept_id))
        if edit.concept_id is not None:
            if db is not None and not db.is_active_leaf(edit.concept_id):
                raise StaleItem(f"edit concept {edit.concept_id!r} is not an active leaf")
            changelog.append(ChangeEntry("add", edit.doc_id, edit.start, edit.end, edit.concept_id))

    for d in decisions:
        item = items[d.item_id]
        item.status = STATUS_FIXED if d.verdict == VERDICT_FIX else STATUS_CONFIRMED

    if not changelog:
        return ds
    return apply_changelog(ds, changelog)


def is_converged(items, decisions) -> bool:
    """True iff every item of the round is closed and none required a fix."""
    items = list(items)
    if any(it.status == STATUS_PENDING for it in items):
        return False
    return all(it.status == STATUS_CONFIRMED for it in items)


# --- stateful session (used by the service) ---------------------------------

@dataclass
class AuditRound:
    number: int
    result: RoundResult | None = None
    items: dict[str, DisagreementItem] = field(default_factory=dict)
    decisions: list[ReviewDecision] = field(default_factory=list)
    status: str = "running"  # running | review | failed
    error: str | None = None
    dataset_version: int = 0


class AuditSession:
    """Single-writer orchestration of rounds, decisions, and versions.

    Fold seeds stay fixed for the whole session, so fold membership only
    changes when documents do.
    """

    def __init__(
        self,
        ds: DatasetVersion,
        cfg: TrainConfig,
        backend_kind: str = backend_mod.BACKEND_REFERENCE,
        k: int = 5,
        fold_seed: int = 0,
    ):
        self._lock = threading.RLock()
        self.versions: list[DatasetVersion] = [ds]
        self.cfg = cfg
        self.backend_kind = backend_kind
        self.k = k
        self.fold_seed = fold_seed
        self.rounds: list[AuditRound] = []

    @property
    def current(self) -> DatasetVersion:
        with self._lock:
            return self.versions[-1]

    @property
    def current_round(self) -> AuditRound | None:
        with self._lock:
            return self.rounds[-1] if self.rounds else None

    def pending_items(self) -> list[DisagreementItem]:
        rnd = self.current_round
        if rnd is None:
            return []
        with self._lock:
            return [it for it in rnd.items.values() if it.status == STATUS_PENDING]

    def can_start_round(self) -> bool:
        rnd = self.current_round
        return rnd is None or (rnd.status == "review" and not self.pending_items())

    def start_round(self) -> AuditRound:
        with self._lock:
            if not self.can_start_round():
                raise StaleItem("cannot start a round while items are pending")
            number = len(self.rounds) + 1
            rnd = AuditRound(number=number, dataset_version=self.current.version_id)
            self.rounds.append(rnd)
        ds = self.current
        plan = make_folds(ds, self.k, self.fold_seed)
        try:
            result = run_round(ds, plan, self.backend_kind, self.cfg, number)
        except Exception as e:  # surfaced via service status
            with self._lock:
                rnd.status = "failed"
                rnd.error = f"round {number}: {e}"
            raise
        with self._lock:
            rnd.result = result
            rnd.items = {it.item_id: it for it in result.items}
            rnd.status = "review"
        return rnd

    def claim(self, item_id: str, reviewer_id: str) -> DisagreementItem:
        with self._lock:
            rnd = self.current_round
            if rnd is None or item_id not in rnd.items:
                raise StaleItem(f"unknown item: {item_id}")
            item = rnd.items[item_id]
            if item.status != STATUS_PENDING:
                raise StaleItem(f"item {item_id} is already {item.status}")
            if item.claimed_by is not None and item.claimed_by != reviewer_id:
                raise StaleItem(f"item {item_id} is claimed by {item.claimed_by!r}")
            item.claimed_by = reviewer_id
            return item

    def submit(self, decision: ReviewDecision) -> int:
        """Apply one decision; returns the current dataset version id."""
        with self._lock:
            rnd = self.current_round
            if rnd is None:
                raise StaleItem("no active round")
            new_ds = apply_decisions(self.current, [decision], rnd.items, self.cfg.db)
            rnd.decisions.append(decision)
            if new_ds is not self.current:
                self.versions.append(new_ds)
            return self.versions[-1].version_id

    def converged(self) -> bool:
        rnd = self.current_round
        if rnd is None or rnd.status != "review":
            return False
        with self._lock:
            return is_converged(rnd.items.values(), rnd.decisions)
