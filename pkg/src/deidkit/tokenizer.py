"""Offset-exact tokenization and span/label alignment.

Tokens are maximal alphanumeric runs plus individual punctuation marks;
whitespace separates tokens and is never part of one. Offsets are unicode
code point indices, end-exclusive, so the original text is always
reconstructible from tokens plus the gaps between them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import SpanOutOfBounds

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

SHAPE_WORD = "word"
SHAPE_DIGIT = "digit"
SHAPE_MIXED = "mixed"
SHAPE_PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    start: int
    end: int
    surface: str
    shape_class: str


@dataclass(frozen=True)
class TokenLabeling:
    """Per-token class indices for one document. Class 0 is non-PHI."""

    doc_id: str
    labels: tuple[int, ...]


def _shape(surface: str) -> str:
    if all(ch.isdigit() for ch in surface):
        return SHAPE_DIGIT
    if all(ch.isalpha() for ch in surface):
        return SHAPE_WORD
    if any(ch.isalnum() for ch in surface):
        return SHAPE_MIXED
    return SHAPE_PUNCT


def tokenize(text: str) -> tuple[Token, ...]:
    """Deterministic rule-based segmentation of ``text``."""
    out = []
    for m in _TOKEN_RE.finditer(text):
        surface = m.group(0)
        out.append(Token(m.start(), m.end(), surface, _shape(surface)))
    return tuple(out)


def project_spans(
    tokens: Sequence[Token],
    spans: Sequence,
    class_index: Mapping[str, int],
    doc_id: str = "",
    text_length: int | None = None,
) -> TokenLabeling:
    """Project character spans onto tokens.

    A token receives a span's class whenever their character ranges overlap,
    so partially covered tokens are labeled whole: over-marking is safer than
    leaking part of an identifier. Spans must be non-overlapping; each span
    needs ``start``, ``end`` and ``concept_id`` attributes.
    """
    labels = [0] * len(tokens)
    if text_length is None:
        text_length = tokens[-1].end if tokens else 0
    for span in spans:
        if span.start < 0 or span.end > text_length or span.start >= span.end:
            raise SpanOutOfBounds(
                f"span [{span.start},{span.end}) out of bounds in doc {doc_id!r} "
                f"(text length {text_length})"
            )
        cls = class_index[span.concept_id]
        for i, tok in enumerate(tokens):
            if tok.start < span.end and span.start < tok.end:
                labels[i] = cls
            elif tok.start >= span.end:
                break
    return TokenLabeling(doc_id=doc_id, labels=tuple(labels))


@dataclass(frozen=True)
class PredictedSpan:
    start: int
    end: int
    class_id: int


def lift_labels(tokens: Sequence[Token], labeling: TokenLabeling) -> tuple[PredictedSpan, ...]:
    """Collapse maximal runs of one nonzero label into predicted spans.

    The span covers from the first token's start to the last token's end;
    a class change (or a zero label) breaks the run.
    """
    if len(tokens) != len(labeling.labels):
        raise ValueError(
            f"labeling length {len(labeling.labels)} != token count {len(tokens)}"
        )
    spans = []
    run_start = None
    run_class = 0
    for i, label in enumerate(labeling.labels):
        if label != run_class:
            if run_class != 0:
                spans.append(PredictedSpan(tokens[run_start].start, tokens[i - 1].end, run_class))
            run_start = i if label != 0 else None
            run_class = label
    if run_class != 0:
        spans.append(PredictedSpan(tokens[run_start].start, tokens[-1].end, run_class))
    return tuple(spans)
