"""Annotated-corpus ingestion, preprocessing, versioning, and splits.

Dataset versions are immutable. Every derived version records the exact
span edits that produced it, so any later version can be reconstructed by
replaying changelogs from version 1.

Offsets are unicode code point indices, end-exclusive. Overlapping gold
spans are rejected at ingest: token-level metrics presume one label per
token.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from .errors import EmptyCorpus, MalformedRecord, OverlappingSpans, UnknownConcept
from .ontology import ConceptDb

EXCHANGE_FORMAT = "deidkit-annotations"


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    source_tag: str = ""


@dataclass(frozen=True)
class GoldSpan:
    doc_id: str
    start: int
    end: int
    concept_id: str

    def overlaps(self, other: "GoldSpan") -> bool:
        return self.doc_id == other.doc_id and self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class ChangeEntry:
    """One span edit in a version's changelog."""

    op: str  # add | remove | relabel | deactivate
    doc_id: str | None = None
    start: int | None = None
    end: int | None = None
    concept_id: str | None = None
    to_concept: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @staticmethod
    def from_dict(obj: Mapping) -> "ChangeEntry":
        return ChangeEntry(**obj)


@dataclass(frozen=True)
class PreprocessConfig:
    min_occurrences: int = 10
    merge_map: tuple[tuple[str, str], ...] = (("forename", "name"), ("surname", "name"))

    def __post_init__(self):
        if self.min_occurrences < 0:
            raise ValueError("min_occurrences must be >= 0")


@dataclass(frozen=True)
class DatasetVersion:
    version_id: int
    parent_version: int | None
    documents: tuple[Document, ...]
    gold_spans: tuple[GoldSpan, ...]
    active_concepts: tuple[str, ...]
    changelog: tuple[ChangeEntry, ...] = ()
    _doc_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for doc in self.documents:
            if doc.doc_id in index:
                raise MalformedRecord(f"duplicate doc_id: {doc.doc_id}")
            index[doc.doc_id] = doc
        _validate_spans(index, self.gold_spans)
        object.__setattr__(self, "_doc_index", index)
        object.__setattr__(self, "gold_spans", tuple(sorted(
            self.gold_spans, key=lambda s: (s.doc_id, s.start))))

    def document(self, doc_id: str) -> Document:
        try:
            return self._doc_index[doc_id]
        except KeyError:
            raise MalformedRecord(f"unknown doc_id: {doc_id}") from None

    def doc_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._doc_index))

    def spans_for(self, doc_id: str) -> tuple[GoldSpan, ...]:
        return tuple(s for s in self.gold_spans if s.doc_id == doc_id)

    def span_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.gold_spans:
            counts[s.concept_id] = counts.get(s.concept_id, 0) + 1
        return counts


def _validate_spans(doc_index: Mapping[str, Document], spans: Sequence[GoldSpan]) -> None:
    per_doc: dict[str, list[GoldSpan]] = {}
    for s in spans:
        doc = doc_index.get(s.doc_id)
        if doc is None:
            raise MalformedRecord(f"annotation references unknown doc_id {s.doc_id!r}")
        if not (0 <= s.start < s.end <= len(doc.text)):
            raise MalformedRecord(
                f"bad span [{s.start},{s.end}) in doc {s.doc_id!r} (text length {len(doc.text)})"
            )
        per_doc.setdefault(s.doc_id, []).append(s)
    for doc_id, doc_spans in per_doc.items():
        doc_spans.sort(key=lambda s: s.start)
        for prev, cur in zip(doc_spans, doc_spans[1:]):
            if prev.end > cur.start:
                raise OverlappingSpans(
                    f"spans [{prev.start},{prev.end}) and [{cur.start},{cur.end}) "
                    f"overlap in doc {doc_id!r}"
                )


# --- ingest -----------------------------------------------------------------

@dataclass(frozen=True)
class IngestResult:
    dataset: DatasetVersion
    rejected: tuple[tuple[dict, str], ...] = ()


def _parse_exchange(source) -> dict:
    if isinstance(source, Mapping):
        return dict(source)
    if isinstance(source, (str, Path)) and "\n" not in str(source) and Path(source).exists():
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedRecord(f"annotation-exchange file does not parse: {e}") from None
    if obj.get("format") != EXCHANGE_FORMAT:
        raise MalformedRecord(f"not a {EXCHANGE_FORMAT} file")
    return obj


def ingest(source, db: ConceptDb, on_error: str = "raise") -> IngestResult:
    """Build a version-1 dataset from an annotation-exchange file.

    ``on_error="raise"`` fails on the first bad record; ``"skip"`` collects
    (record, reason) pairs in the result and ingests the rest.
    """
    if on_error not in ("raise", "skip"):
        raise ValueError("on_error must be 'raise' or 'skip'")
    obj = _parse_exchange(source)
    documents = []
    for rec in obj.get("documents", ()):
        if not isinstance(rec.get("doc_id"), str) or not isinstance(rec.get("text"), str):
            raise MalformedRecord(f"document record needs string doc_id and text: {rec}")
        documents.append(Document(rec["doc_id"], rec["text"], rec.get("source_tag", "")))
    doc_index = {d.doc_id: d for d in documents}
    if len(doc_index) != len(documents):
        raise MalformedRecord("duplicate doc_id in documents")

    spans: list[GoldSpan] = []
    rejected: list[tuple[dict, str]] = []

    def bad(rec: dict, err: Exception):
        if on_error == "raise":
            raise err
        rejected.append((rec, str(err)))

    for rec in obj.get("annotations", ()):
        doc_id = rec.get("doc_id")
        start, end, concept = rec.get("start"), rec.get("end"), rec.get("concept_id")
        doc = doc_index.get(doc_id)
        if doc is None:
            bad(rec, MalformedRecord(f"annotation references unknown doc_id {doc_id!r}"))
            continue
        if not isinstance(start, int) or not isinstance(end, int) \
                or not (0 <= start < end <= len(doc.text)):
            bad(rec, MalformedRecord(
                f"bad span [{start},{end}) in doc {doc_id!r} (text length {len(doc.text)})"))
            continue
        if not db.is_active_leaf(concept):
            bad(rec, UnknownConcept(
                f"annotation [{start},{end}) in doc {doc_id!r} uses {concept!r}, "
                f"which is not an active leaf concept"))
            continue
        span = GoldSpan(doc_id, start, end, concept)
        clash = next((s for s in spans if s.overlaps(span)), None)
        if clash is not None:
            bad(rec, OverlappingSpans(
                f"spans [{clash.start},{clash.end}) and [{start},{end}) overlap "
                f"in doc {doc_id!r}"))
            continue
        spans.append(span)

    dataset = DatasetVersion(
        version_id=1,
        parent_version=None,
        documents=tuple(documents),
        gold_spans=tuple(spans),
        active_concepts=tuple(c.id for c in db.active_leaves()),
    )
    return IngestResult(dataset=dataset, rejected=tuple(rejected))


def dataset_to_exchange_json(ds: DatasetVersion) -> str:
    obj = {
        "format": EXCHANGE_FORMAT,
        "version": 1,
        "documents": [
            {"doc_id": d.doc_id, "text": d.text, "source_tag": d.source_tag}
            for d in ds.documents
        ],
        "annotations": [
            {"doc_id": s.doc_id, "start": s.start, "end": s.end, "concept_id": s.concept_id}
            for s in ds.gold_spans
        ],
    }
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# --- preprocessing ----------------------------------------------------------

@dataclass(frozen=True)
class PreprocessResult:
    dataset: DatasetVersion
    merged_counts: dict[str, int]
    dropped_span_counts: dict[str, int]
    deactivated: tuple[str, ...]


def preprocess(ds: DatasetVersion, cfg: PreprocessConfig, db: ConceptDb) -> PreprocessResult:
    """Merge labels, then deactivate concepts below the occurrence threshold.

    Thresholding happens after merging because merging changes counts.
    Documents keep their text; only labels are rewritten or removed.
    """
    merge_map = dict(cfg.merge_map)
    for target in merge_map.values():
        if not db.is_active_leaf(target):
            raise UnknownConcept(f"merge target {target!r} is not an active leaf")

    changelog: list[ChangeEntry] = []
    merged_counts: dict[str, int] = {}
    spans: list[GoldSpan] = []
    for s in ds.gold_spans:
        target = merge_map.get(s.concept_id)
        if target is not None and target != s.concept_id:
            changelog.append(ChangeEntry(
                "relabel", s.doc_id, s.start, s.end, s.concept_id, to_concept=target))
            merged_counts[s.concept_id] = merged_counts.get(s.concept_id, 0) + 1
            s = replace(s, concept_id=target)
        spans.append(s)

    counts: dict[str, int] = {c: 0 for c in ds.active_concepts}
    for s in spans:
        counts[s.concept_id] = counts.get(s.concept_id, 0) + 1

    deactivated = tuple(sorted(c for c in ds.active_concepts if counts.get(c, 0) < cfg.min_occurrences))
    dropped_span_counts = {c: counts.get(c, 0) for c in deactivated}
    kept: list[GoldSpan] = []
    for s in spans:
        if s.concept_id in dropped_span_counts:
            changelog.append(ChangeEntry("remove", s.doc_id, s.start, s.end, s.concept_id))
        else:
            kept.append(s)
    for c in deactivated:
        changelog.append(ChangeEntry("deactivate", concept_id=c))

    child = DatasetVersion(
        version_id=ds.version_id + 1,
        parent_version=ds.version_id,
        documents=ds.documents,
        gold_spans=tuple(kept),
        active_concepts=tuple(c for c in ds.active_concepts if c not in dropped_span_counts),
        changelog=tuple(changelog),
    )
    return PreprocessResult(
        dataset=child,
        merged_counts=merged_counts,
        dropped_span_counts=dropped_span_counts,
        deactivated=deactivated,
    )


# --- changelog replay -------------------------------------------------------

def apply_changelog(parent: DatasetVersion, changelog: Sequence[ChangeEntry],
                    version_id: int | None = None) -> DatasetVersion:
    """Replay span edits onto ``parent``, producing the child version."""
    spans = list(parent.gold_spans)
    active = list(parent.active_concepts)
    for entry in changelog:
        if entry.op == "relabel":
            for i, s in enumerate(spans):
                if (s.doc_id, s.start, s.end, s.concept_id) == \
                        (entry.doc_id, entry.start, entry.end, entry.concept_id):
                    spans[i] = replace(s, concept_id=entry.to_concept)
                    break
            else:
                raise MalformedRecord(f"relabel target not found: {entry}")
        elif entry.op == "remove":
            key = (entry.doc_id, entry.start, entry.end, entry.concept_id)
            for i, s in enumerate(spans):
                if (s.doc_id, s.start, s.end, s.concept_id) == key:
                    del spans[i]
                    break
            else:
                raise MalformedRecord(f"remove target not found: {entry}")
        elif entry.op == "add":
            spans.append(GoldSpan(entry.doc_id, entry.start, entry.end, entry.concept_id))
        elif entry.op == "deactivate":
            if entry.concept_id in active:
                active.remove(entry.concept_id)
        else:
            raise MalformedRecord(f"unknown changelog op: {entry.op}")
    return DatasetVersion(
        version_id=parent.version_id + 1 if version_id is None else version_id,
        parent_version=parent.version_id,
        documents=parent.documents,
        gold_spans=tuple(spans),
        active_concepts=tuple(active),
        changelog=tuple(changelog),
    )


# --- splits -----------------------------------------------------------------

def split(ds: DatasetVersion, train_fraction: float, seed: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Document-level train/test partition, deterministic given the seed.

    ``|train| = round(train_fraction * N)`` with halves rounding up.
    """
    if not (0 < train_fraction < 1):
        raise ValueError("train_fraction must be strictly between 0 and 1")
    ids = sorted(ds.doc_ids())
    if not ids:
        raise EmptyCorpus("dataset has no documents")
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_train = int(train_fraction * len(ids) + 0.5)
    train = tuple(sorted(ids[:n_train]))
    test = tuple(sorted(ids[n_train:]))
    return train, test
