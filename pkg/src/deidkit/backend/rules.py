"""Rule/regex baseline scorer: the Philter-class comparison point.

Deterministic token-sequence patterns for UK postcodes, NHS-number shapes
(3-3-4 digit groups), emails, phone numbers, date-of-birth shapes, bare
identifier digit runs, initials, and capitalized-name heuristics. Each
match emits probability 1 for its class. Recall-first by construction;
precision is expected to be poor (eponyms like capitalized disease names
will false-positive), which is exactly the behaviour the comparison
harness records.
"""

from __future__ import annotations

import re
from typing import Sequence

import numpy as np

from ..ontology import ConceptDb, build_default_db
from ..tokenizer import Token

BACKEND_RULES = "rule-baseline"

_OUTWARD = re.compile(r"^[A-Z]{1,2}\d[A-Z\d]?$")
_INWARD = re.compile(r"^\d[A-Z]{2}$")
_CAP_WORD = re.compile(r"^[A-Z][a-z]+$")
_PREFIXED_ID = re.compile(r"^[A-Z]{1,3}\d{5,8}$")
_ALLCAP_SHORT = re.compile(r"^[A-Z]{2,3}$")

_TITLES = {"dr", "mr", "mrs", "ms", "miss", "prof", "professor", "sister", "nurse", "dear"}
_MONTHS = {
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
}
# common clinical abbreviations that must not be flagged as initials
_ABBREV_WHITELIST = {"NHS", "GP", "ED", "BP", "HR", "ID", "UK", "AE", "ITU", "DOB", "CT", "MRI"}

_EMAIL_PUNCT = {".", "_", "-", "+"}


def _gap(tokens: Sequence[Token], i: int) -> int:
    """Characters between token i and token i+1."""
    return tokens[i + 1].start - tokens[i].end


class RuleBaselineScorer:
    """Pattern matcher dressed in the scorer interface: one-hot outputs."""

    backend_kind = BACKEND_RULES

    def __init__(self, db: ConceptDb | None = None):
        self.db = db or build_default_db()
        self.class_order = self.db.class_order
        self._index = {cid: i for i, cid in enumerate(self.class_order)}
        self.provenance = {"patterns": "uk-default"}

    @property
    def model_id(self) -> str:
        return "rule-baseline-uk"

    def _cls(self, concept_id: str) -> int | None:
        return self._index.get(concept_id)

    def score_tokens(self, tokens: Sequence[Token]) -> np.ndarray:
        labels = self.match(tokens)
        probs = np.zeros((len(tokens), len(self.class_order)))
        for i, cls in enumerate(labels):
            probs[i, cls] = 1.0
        return probs

    def score_text(self, text: str):
        from ..tokenizer import tokenize

        tokens = tokenize(text)
        return tokens, self.score_tokens(tokens)

    def match(self, tokens: Sequence[Token]) -> list[int]:
        """Class index per token; 0 where no pattern fires. First match wins."""
        labels = [0] * len(tokens)

        def claim(rng: range, concept_id: str):
            cls = self._cls(concept_id)
            if cls is None:
                return
            for i in rng:
                if labels[i] == 0:
                    labels[i] = cls

        self._match_emails(tokens, labels, claim)
        self._match_nhs(tokens, labels, claim)
        self._match_phones(tokens, labels, claim)
        self._match_dates(tokens, labels, claim)
        self._match_postcodes(tokens, labels, claim)
        self._match_identifiers(tokens, labels, claim)
        self._match_initials(tokens, labels, claim)
        self._match_names(tokens, labels, claim)
        return labels

    def _match_emails(self, tokens, labels, claim):
        for i, tok in enumerate(tokens):
            if "@" not in tok.surface:
                continue
            lo = hi = i
            while lo > 0 and _gap(tokens, lo - 1) == 0 and (
                tokens[lo - 1].shape_class != "punct" or tokens[lo - 1].surface in _EMAIL_PUNCT
            ):
                lo -= 1
            while hi + 1 < len(tokens) and _gap(tokens, hi) == 0 and (
                tokens[hi + 1].shape_class != "punct" or tokens[hi + 1].surface in _EMAIL_PUNCT
            ):
                hi += 1
            claim(range(lo, hi + 1), "email")

    def _match_nhs(self, tokens, labels, claim):
        for i in range(len(tokens) - 2):
            a, b, c = tokens[i], tokens[i + 1], tokens[i + 2]
            if (
                a.shape_class == "digit" and len(a.surface) == 3
                and b.shape_class == "digit" and len(b.surface) == 3
                and c.shape_class == "digit" and len(c.surface) == 4
                and _gap(tokens, i) <= 1 and _gap(tokens, i + 1) <= 1
            ):
                claim(range(i, i + 3), "nhs_number")

    def _match_phones(self, tokens, labels, claim):
        i = 0
        while i < len(tokens):
            tok = tokens[i]
            if tok.shape_class == "digit" and tok.surface.startswith("0"):
                digits = len(tok.surface)
                j = i
                while (
                    j + 1 < len(tokens)
                    and tokens[j + 1].shape_class == "digit"
                    and _gap(tokens, j) <= 1
                    and digits + len(tokens[j + 1].surface) <= 11
                ):
                    j += 1
                    digits += len(tokens[j].surface)
                if 10 <= digits <= 11:
                    claim(range(i, j + 1), "telephone_number")
                    i = j + 1
                    continue
            i += 1

    def _match_dates(self, tokens, labels, claim):
        n = len(tokens)
        for i in range(n):
            # 12/03/1985, 12-03-85, 12.03.1985
            if (
                i + 4 < n
                and tokens[i].shape_class == "digit" and len(tokens[i].surface) <= 2
                and tokens[i + 1].surface in "/-." and _gap(tokens, i) == 0
                and tokens[i + 2].shape_class == "digit" and len(tokens[i + 2].surface) <= 2
                and tokens[i + 3].surface == tokens[i + 1].surface
                and _gap(tokens, i + 1) == 0 and _gap(tokens, i + 2) == 0 and _gap(tokens, i + 3) == 0
                and tokens[i + 4].shape_class == "digit" and len(tokens[i + 4].surface) in (2, 4)
            ):
                claim(range(i, i + 5), "date_of_birth")
            # 12 March 1985
            if (
                i + 2 < n
                and tokens[i].shape_class == "digit" and len(tokens[i].surface) <= 2
                and tokens[i + 1].surface.lower() in _MONTHS
                and tokens[i + 2].shape_class == "digit" and len(tokens[i + 2].surface) == 4
            ):
                claim(range(i, i + 3), "date_of_birth")

    def _match_postcodes(self, tokens, labels, claim):
        for i in range(len(tokens) - 1):
            if (
                _OUTWARD.match(tokens[i].surface)
                and _INWARD.match(tokens[i + 1].surface)
                and _gap(tokens, i) <= 1
            ):
                claim(range(i, i + 2), "postcode")

    def _match_identifiers(self, tokens, labels, claim):
        for i, tok in enumerate(tokens):
            if labels[i] != 0:
                continue
            if _PREFIXED_ID.match(tok.surface):
                claim(range(i, i + 1), "hospital_number")
            elif tok.shape_class == "digit" and 6 <= len(tok.surface) <= 8:
                claim(range(i, i + 1), "hospital_number")

    def _match_initials(self, tokens, labels, claim):
        n = len(tokens)
        for i, tok in enumerate(tokens):
            if labels[i] != 0:
                continue
            s = tok.surface
            if len(s) == 1 and s.isupper() and s.isalpha():
                if i + 1 < n and tokens[i + 1].surface == "." and _gap(tokens, i) == 0:
                    claim(range(i, i + 2), "initials")
            elif _ALLCAP_SHORT.match(s) and s not in _ABBREV_WHITELIST:
                claim(range(i, i + 1), "initials")

    def _match_names(self, tokens, labels, claim):
        n = len(tokens)
        for i, tok in enumerate(tokens):
            if tok.surface.lower().rstrip(".") in _TITLES:
                j = i + 1
                taken = 0
                while j < n and taken < 3 and _CAP_WORD.match(tokens[j].surface):
                    claim(range(j, j + 1), "name")
                    j += 1
                    taken += 1
        for i in range(n - 1):
            if (
                _CAP_WORD.match(tokens[i].surface)
                and _CAP_WORD.match(tokens[i + 1].surface)
                and _gap(tokens, i) <= 1
                and labels[i] == 0 and labels[i + 1] == 0
            ):
                claim(range(i, i + 2), "name")


def rule_baseline_db(db: ConceptDb | None = None) -> RuleBaselineScorer:
    """The shipped UK rule baseline bound to the given (or default) ontology."""
    return RuleBaselineScorer(db)
