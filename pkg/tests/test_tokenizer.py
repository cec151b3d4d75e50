import random

import pytest

from deidkit.corpus import GoldSpan
from deidkit.errors import SpanOutOfBounds
from deidkit.tokenizer import (
    PredictedSpan,
    TokenLabeling,
    lift_labels,
    project_spans,
    tokenize,
)

CLASS_INDEX = {"name": 1, "address_line": 2}


def test_empty_input():
    assert tokenize("") == ()


def test_nhs_number_display_form():
    tokens = tokenize("NHS 943 476 5919")
    assert [t.surface for t in tokens] == ["NHS", "943", "476", "5919"]
    assert [(t.start, t.end) for t in tokens] == [(0, 3), (4, 7), (8, 11), (12, 16)]
    assert [t.shape_class for t in tokens] == ["word", "digit", "digit", "digit"]


def test_shapes():
    tokens = tokenize("SE5 9RS, j@x")
    assert [(t.surface, t.shape_class) for t in tokens] == [
        ("SE5", "mixed"), ("9RS", "mixed"), (",", "punct"),
        ("j", "word"), ("@", "punct"), ("x", "word"),
    ]


def _reconstruct(text, tokens):
    out = []
    cursor = 0
    for t in tokens:
        out.append(text[cursor:t.start])
        out.append(t.surface)
        cursor = t.end
    out.append(text[cursor:])
    return "".join(out)


def test_round_trip_reconstruction_random():
    rng = random.Random(99)
    alphabet = "ab C1. ,@-\n\tzé漢 '()"
    for _ in range(300):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        tokens = tokenize(text)
        assert _reconstruct(text, tokens) == text
        for a, b in zip(tokens, tokens[1:]):
            assert a.end <= b.start
        assert all(t.start < t.end for t in tokens)
        assert all(text[t.start:t.end] == t.surface for t in tokens)


def test_determinism():
    text = "Dr John Smith, SE5 9RS; NHS 943 476 5919."
    assert tokenize(text) == tokenize(text)


def _char_oracle(tokens, spans, class_index):
    """Character-level reference: a token gets a span's class iff any of
    its characters falls inside the span."""
    labels = []
    for tok in tokens:
        label = 0
        for span in spans:
            if any(span.start <= pos < span.end for pos in range(tok.start, tok.end)):
                label = class_index[span.concept_id]
        labels.append(label)
    return labels


def test_project_exact_token_cover():
    text = "one two three"
    tokens = tokenize(text)
    spans = [GoldSpan("d", 4, 7, "name")]
    got = project_spans(tokens, spans, CLASS_INDEX, "d", len(text))
    assert got.labels == (0, 1, 0)


def test_project_partial_overlap_all_positions():
    # every (start, end) pair over a 3-token string vs the character oracle
    text = "abc def ghi"
    tokens = tokenize(text)
    for start in range(len(text)):
        for end in range(start + 1, len(text) + 1):
            spans = [GoldSpan("d", start, end, "name")]
            got = project_spans(tokens, spans, CLASS_INDEX, "d", len(text))
            assert list(got.labels) == _char_oracle(tokens, spans, CLASS_INDEX), (start, end)


def test_project_no_spans_all_zero():
    tokens = tokenize("a b c")
    got = project_spans(tokens, [], CLASS_INDEX, "d", 5)
    assert got.labels == (0, 0, 0)


def test_project_out_of_bounds():
    tokens = tokenize("a b")
    with pytest.raises(SpanOutOfBounds):
        project_spans(tokens, [GoldSpan("d", 0, 99, "name")], CLASS_INDEX, "d", 3)


def test_lift_single_run():
    tokens = tokenize("w John Smith w")
    spans = lift_labels(tokens, TokenLabeling("d", (0, 1, 1, 0)))
    assert spans == (PredictedSpan(2, 12, 1),)


def test_lift_class_change_breaks_run():
    tokens = tokenize("John Cedar")
    spans = lift_labels(tokens, TokenLabeling("d", (1, 2)))
    assert spans == (PredictedSpan(0, 4, 1), PredictedSpan(5, 10, 2))


def test_lift_all_zero():
    tokens = tokenize("a b c")
    assert lift_labels(tokens, TokenLabeling("d", (0, 0, 0))) == ()


def test_lift_length_mismatch():
    with pytest.raises(ValueError):
        lift_labels(tokenize("a b"), TokenLabeling("d", (0,)))


def _random_token_aligned_spans(rng, tokens):
    """Non-overlapping token-aligned spans with a zero-gap between
    same-class neighbours, so lifting is exactly invertible."""
    spans = []
    i = 0
    last_class = 0
    while i < len(tokens):
        if rng.random() < 0.4:
            j = min(len(tokens), i + rng.randint(1, 3))
            cls = rng.choice(["name", "address_line"])
            if CLASS_INDEX[cls] == last_class:
                i += 1  # leave an unlabeled token between same-class spans
                last_class = 0
                continue
            spans.append(GoldSpan("d", tokens[i].start, tokens[j - 1].end, cls))
            last_class = CLASS_INDEX[cls]
            i = j
        else:
            last_class = 0
            i += 1
    return spans


def test_lift_project_round_trip_random():
    rng = random.Random(7)
    text = "alpha beta gamma delta epsilon zeta eta theta iota kappa"
    tokens = tokenize(text)
    for _ in range(200):
        spans = _random_token_aligned_spans(rng, tokens)
        labeling = project_spans(tokens, spans, CLASS_INDEX, "d", len(text))
        lifted = lift_labels(tokens, labeling)
        assert [(s.start, s.end, s.class_id) for s in lifted] == [
            (s.start, s.end, CLASS_INDEX[s.concept_id]) for s in spans
        ]


def test_gold_characters_always_covered_random():
    # copying labels from gold must leak no gold PHI character
    rng = random.Random(13)
    text = "alpha beta gamma delta epsilon zeta eta theta"
    tokens = tokenize(text)
    for _ in range(200):
        spans = _random_token_aligned_spans(rng, tokens)
        labeling = project_spans(tokens, spans, CLASS_INDEX, "d", len(text))
        lifted = lift_labels(tokens, labeling)
        for s in spans:
            for pos in range(s.start, s.end):
                if text[pos].isspace():
                    continue
                assert any(p.start <= pos < p.end for p in lifted), pos
