"""Render de-identified text: removal or deterministic pseudonymization.

Removal substitutes ``[CONCEPT-NAME]`` placeholders. Pseudonymization draws
surrogates from a keyed HMAC-SHA256 digest of (concept, case-folded
surface), so the same mention gets the same surrogate corpus-wide under one
key, and different keys decorrelate surrogates. Identifier-shaped values
keep their shape (digit grouping, letter cases); names and addresses come
from the shipped word pools. A surrogate never equals the original surface.

The offset map records where every non-redacted segment of the original
landed in the output, so downstream offsets can be migrated exactly.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass, field

from .corpus import Document
from .errors import MissingKey, SpanOutOfBounds
from .ontology import ConceptDb
from .pools import EMAIL_DOMAINS, FORENAMES, MONTH_NAMES, STREETS, SURNAMES

MODE_REMOVE = "remove"
MODE_PSEUDONYMIZE = "pseudonymize"

#: Pinned keyed-digest algorithm; recorded in output metadata.
DIGEST_ALGORITHM = "hmac-sha256"

_POOL_CONCEPTS = {"name", "forename", "surname", "address_line", "email"}
_UPPER = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
_LOWER = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class PlanSpan:
    start: int
    end: int
    concept_id: str


@dataclass(frozen=True)
class RedactionPlan:
    doc_id: str
    spans: tuple[PlanSpan, ...]
    mode: str = MODE_REMOVE
    key: bytes | None = None

    def __post_init__(self):
        if self.mode not in (MODE_REMOVE, MODE_PSEUDONYMIZE):
            raise ValueError(f"unknown redaction mode: {self.mode}")
        ordered = tuple(sorted(self.spans, key=lambda s: s.start))
        for prev, cur in zip(ordered, ordered[1:]):
            if prev.end > cur.start:
                raise SpanOutOfBounds(
                    f"plan spans overlap in doc {self.doc_id!r}: "
                    f"[{prev.start},{prev.end}) and [{cur.start},{cur.end})")
        object.__setattr__(self, "spans", ordered)


@dataclass(frozen=True)
class AuditEntry:
    concept_id: str
    replacement: str
    original_range: tuple[int, int]
    output_range: tuple[int, int]


@dataclass(frozen=True)
class RedactedOutput:
    doc_id: str
    text: str
    offset_map: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    audit: tuple[AuditEntry, ...]
    metadata: dict = field(default_factory=dict)


def redact(doc: Document, plan: RedactionPlan, db: ConceptDb | None = None) -> RedactedOutput:
    """Apply a redaction plan to one document."""
    text = doc.text
    for s in plan.spans:
        if not (0 <= s.start < s.end <= len(text)):
            raise SpanOutOfBounds(
                f"plan span [{s.start},{s.end}) out of bounds in doc "
                f"{plan.doc_id!r} (text length {len(text)})")
    if plan.mode == MODE_PSEUDONYMIZE and not plan.key:
        raise MissingKey("pseudonymize mode requires a nonempty key")

    pieces: list[str] = []
    offset_map: list[tuple[tuple[int, int], tuple[int, int]]] = []
    audit: list[AuditEntry] = []
    cursor = 0
    out_len = 0

    def keep(upto: int):
        nonlocal cursor, out_len
        if upto > cursor:
            seg = text[cursor:upto]
            offset_map.append(((cursor, upto), (out_len, out_len + len(seg))))
            pieces.append(seg)
            out_len += len(seg)
            cursor = upto

    for s in plan.spans:
        keep(s.start)
        surface = text[s.start:s.end]
        if plan.mode == MODE_REMOVE:
            replacement = placeholder(s.concept_id, db)
        else:
            replacement = surrogate(s.concept_id, surface, plan.key)
        pieces.append(replacement)
        audit.append(AuditEntry(
            concept_id=s.concept_id,
            replacement=replacement,
            original_range=(s.start, s.end),
            output_range=(out_len, out_len + len(replacement)),
        ))
        out_len += len(replacement)
        cursor = s.end
    keep(len(text))

    return RedactedOutput(
        doc_id=plan.doc_id,
        text="".join(pieces),
        offset_map=tuple(offset_map),
        audit=tuple(audit),
        metadata={"mode": plan.mode, "digest": DIGEST_ALGORITHM},
    )


def placeholder(concept_id: str, db: ConceptDb | None = None) -> str:
    name = db.display_name(concept_id) if db is not None and db.has(concept_id) else concept_id
    return "[" + name.upper().replace(" ", "-").replace("_", "-") + "]"


def apply_offset_map(offset_map, start: int, end: int) -> tuple[int, int] | None:
    """Map an original non-redacted range into the output, or None if redacted."""
    for (os_, oe), (ns, ne) in offset_map:
        if os_ <= start and end <= oe:
            return (ns + (start - os_), ns + (end - os_))
    return None


# --- surrogate generation ---------------------------------------------------

def surrogate(concept_id: str, surface: str, key: bytes | None) -> str:
    """Deterministic keyed surrogate for one (concept, surface) pair."""
    if not key:
        raise MissingKey("surrogate generation requires a nonempty key")
    for attempt in range(64):
        seed_material = f"{concept_id}\x00{surface.casefold()}\x00{attempt}".encode("utf-8")
        digest = hmac.new(key, seed_material, hashlib.sha256).digest()
        rng = random.Random(int.from_bytes(digest[:16], "big"))
        if concept_id in _POOL_CONCEPTS:
            out = _pool_surrogate(concept_id, rng)
        else:
            out = _shape_surrogate(surface, rng)
        if out != surface:
            return out
    # all-punctuation surfaces survive shape transforms unchanged
    return "x" * max(1, len(surface))


def _pool_surrogate(concept_id: str, rng: random.Random) -> str:
    if concept_id == "forename":
        return rng.choice(FORENAMES)
    if concept_id == "surname":
        return rng.choice(SURNAMES)
    if concept_id == "name":
        return f"{rng.choice(FORENAMES)} {rng.choice(SURNAMES)}"
    if concept_id == "address_line":
        return f"{rng.randint(1, 199)} {rng.choice(STREETS)}"
    if concept_id == "email":
        local = f"{rng.choice(FORENAMES)[0].lower()}{rng.choice(SURNAMES).lower()}{rng.randint(1, 99)}"
        return f"{local}@{rng.choice(EMAIL_DOMAINS)}"
    raise AssertionError(f"no pool for {concept_id}")


def _shape_surrogate(surface: str, rng: random.Random) -> str:
    """Character-class-preserving rewrite; month names swap for month names."""
    out: list[str] = []
    i = 0
    while i < len(surface):
        ch = surface[i]
        if ch.isalpha():
            j = i
            while j < len(surface) and surface[j].isalpha():
                j += 1
            run = surface[i:j]
            if run.capitalize() in MONTH_NAMES:
                month = rng.choice(MONTH_NAMES)
                out.append(_match_case(month, run))
            else:
                out.append("".join(
                    rng.choice(_UPPER) if c.isupper() else rng.choice(_LOWER) for c in run))
            i = j
        elif ch.isdigit():
            out.append(str(rng.randint(0, 9)))
            i += 1
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _match_case(word: str, pattern: str) -> str:
    if pattern.isupper():
        return word.upper()
    if pattern.islower():
        return word.lower()
    return word.capitalize()
