"""Synthetic annotated clinical letters with exact gold spans.

Desk-scale stand-ins for private hospital corpora. Two style profiles
emulate cross-site drift: style A and style B differ in name composition
order, identifier formats and the field labels that anchor them, including
a novel identifier convention (style B's unit record) that surface and
window features cannot trivially generalize to. All names, streets and
domains come from public-domain word pools; no real personal data.

Per-concept frequency weights default to a large-teaching-hospital shape
where name dominates. Only the frequency shape is modeled, never actual
hospital data.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .corpus import DatasetVersion, Document, GoldSpan
from .ontology import build_default_db
from .pools import CLINICS, EMAIL_DOMAINS, FORENAMES, STREETS, SURNAMES

#: Default per-concept weights: the frequency shape of a large teaching
#: hospital corpus (name dominates, identifiers mid, NHS numbers rare).
DEFAULT_WEIGHTS: dict[str, float] = {
    "name": 16407,
    "emergency_department_number": 2176,
    "address_line": 2075,
    "postcode": 2065,
    "hospital_number": 1882,
    "email": 1740,
    "initials": 1399,
    "telephone_number": 1177,
    "date_of_birth": 896,
    "nhs_number": 778,
}

FILLER = (
    "The wound is healing well and no infection was seen.",
    "Blood tests were within normal limits.",
    "Blood pressure measured 120 over 80 at rest.",
    "Please continue the current medication regime.",
    "A follow up appointment will be arranged in 6 weeks.",
    "There were no new neurological symptoms reported.",
    "The chest was clear on auscultation.",
    "An ultrasound of the abdomen has been requested.",
    "No further action is required at this stage.",
    "Renal function remains stable on repeat testing.",
    "The rash has resolved since the last visit.",
    "Physiotherapy exercises were demonstrated and tolerated well.",
    "Dietary advice was provided during the consultation.",
    "Mobility has improved considerably since discharge.",
    "The dressing should be changed every other day.",
    "Appetite is reported to be good.",
    "Sleep remains disturbed but improving.",
    "Pain is well controlled with the current analgesia.",
    "Repeat bloods are booked for next month.",
    "The family were present and updated on progress.",
    "The day unit operates 9-5 on weekdays.",
    "Theatre list 08-12 ran without incident.",
)


@dataclass(frozen=True)
class SynthConfig:
    doc_count: int
    style: str = "A"
    seed: int = 0
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    insertions_per_doc: tuple[int, int] = (9, 14)

    def __post_init__(self):
        if self.doc_count < 1:
            raise ValueError("doc_count must be >= 1")
        if self.style not in ("A", "B"):
            raise ValueError("style must be 'A' or 'B'")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be >= 0")


class _DocBuilder:
    """Accumulates text fragments while tracking exact PHI offsets."""

    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        self.parts: list[str] = []
        self.length = 0
        self.spans: list[GoldSpan] = []
        self._surfaces: list[str] = []

    def emit(self, text: str) -> None:
        self.parts.append(text)
        self.length += len(text)

    def emit_phi(self, concept_id: str, surface: str) -> None:
        start = self.length
        self.emit(surface)
        self.spans.append(GoldSpan(self.doc_id, start, start + len(surface), concept_id))
        self._surfaces.append(surface)

    def build(self) -> tuple[Document, list[GoldSpan]]:
        text = "".join(self.parts)
        for s, surface in zip(self.spans, self._surfaces):
            if text[s.start:s.end] != surface:
                raise AssertionError(
                    f"gold span mismatch in {self.doc_id}: "
                    f"{text[s.start:s.end]!r} != {surface!r}")
        return Document(self.doc_id, text), self.spans


class _Maker:
    """Draws PHI surfaces; formats depend on the style profile."""

    def __init__(self, rng: random.Random, style: str):
        self.rng = rng
        self.style = style

    def person(self) -> tuple[str, str]:
        return self.rng.choice(FORENAMES), self.rng.choice(SURNAMES)

    def full_name(self, forename: str, surname: str) -> str:
        return f"{forename} {surname}"

    def postcode(self) -> str:
        rng = self.rng
        letters = "ABCDEFGHJKLMNPRSTUWXY"
        out = rng.choice(letters) + rng.choice(letters) + str(rng.randint(1, 9))
        inward = str(rng.randint(0, 9)) + rng.choice(letters) + rng.choice(letters)
        return f"{out} {inward}"

    def nhs_number(self) -> str:
        r = self.rng
        return f"{r.randint(100, 999)} {r.randint(100, 999)} {r.randint(1000, 9999)}"

    def phone(self) -> str:
        tail = f"{self.rng.randint(0, 999):03d}"
        if self.style == "A":
            return f"020 7946 0{tail}"
        return f"+44 20 7946 0{tail}"

    def dob(self) -> str:
        r = self.rng
        d, m, y = r.randint(1, 28), r.randint(1, 12), r.randint(1931, 2004)
        return f"{d:02d}/{m:02d}/{y}" if self.style == "A" else f"{d:02d}.{m:02d}.{y}"

    def hospital_number(self) -> str:
        r = self.rng
        if self.style == "A":
            return f"HN{r.randint(100000, 999999)}"
        return f"{r.randint(10, 99)}-{r.randint(1000, 9999)}-{r.choice('ABCDEFGHJKLMNPRSTUWXYZ')}"

    def ed_number(self) -> str:
        r = self.rng
        if self.style == "A":
            return f"ED{r.randint(100000, 999999)}"
        return f"Q{r.randint(10000, 99999)}X"

    def email(self, forename: str, surname: str) -> str:
        local = f"{forename[0].lower()}{surname.lower()}{self.rng.randint(1, 99)}"
        return f"{local}@{self.rng.choice(EMAIL_DOMAINS)}"

    def address(self) -> str:
        return f"{self.rng.randint(1, 199)} {self.rng.choice(STREETS)}"

    def initials(self, forename: str, surname: str) -> str:
        if self.style == "A":
            return f"{forename[0]}.{surname[0]}."
        return f"{forename[0]}{surname[0]}"


def _weighted_concepts(rng: random.Random, weights: dict[str, float], n: int) -> list[str]:
    concepts = sorted(c for c, w in weights.items() if w > 0)
    if not concepts:
        return []
    w = [weights[c] for c in concepts]
    return rng.choices(concepts, weights=w, k=n)


def generate(cfg: SynthConfig) -> DatasetVersion:
    """Generate a style-profiled corpus with exact gold spans."""
    rng = random.Random(cfg.seed)
    mk = _Maker(rng, cfg.style)
    documents: list[Document] = []
    all_spans: list[GoldSpan] = []

    for d in range(cfg.doc_count):
        doc_id = f"{cfg.style.lower()}{cfg.seed:04d}-{d:05d}"
        b = _DocBuilder(doc_id)
        n_ins = rng.randint(*cfg.insertions_per_doc)
        drawn = _weighted_concepts(rng, cfg.weights, n_ins)
        forename, surname = mk.person()

        b.emit(rng.choice(CLINICS) + "\n")
        if cfg.style == "A":
            _header_a(b, mk, drawn, forename, surname)
        else:
            _header_b(b, mk, drawn, forename, surname)
        with_names = cfg.weights.get("name", 0) > 0
        _body(b, mk, rng, drawn, forename, surname, cfg.style, with_names)

        doc, spans = b.build()
        documents.append(doc)
        all_spans.extend(spans)

    db = build_default_db()
    return DatasetVersion(
        version_id=1,
        parent_version=None,
        documents=tuple(documents),
        gold_spans=tuple(all_spans),
        active_concepts=tuple(c.id for c in db.active_leaves()),
    )


def _take(drawn: list[str], concept: str) -> bool:
    if concept in drawn:
        drawn.remove(concept)
        return True
    return False


def _header_a(b: _DocBuilder, mk: _Maker, drawn: list[str], forename: str, surname: str):
    if _take(drawn, "name"):
        b.emit("Patient: ")
        b.emit_phi("name", mk.full_name(forename, surname))
        b.emit("\n")
    if _take(drawn, "date_of_birth"):
        b.emit("DOB: ")
        b.emit_phi("date_of_birth", mk.dob())
        b.emit("\n")
    if _take(drawn, "nhs_number"):
        b.emit("NHS No: ")
        b.emit_phi("nhs_number", mk.nhs_number())
        b.emit("\n")
    if _take(drawn, "hospital_number"):
        b.emit("Hospital Number: ")
        b.emit_phi("hospital_number", mk.hospital_number())
        b.emit("\n")
    if _take(drawn, "emergency_department_number"):
        b.emit("ED Ref: ")
        b.emit_phi("emergency_department_number", mk.ed_number())
        b.emit("\n")
    if _take(drawn, "address_line"):
        b.emit("Address: ")
        b.emit_phi("address_line", mk.address())
        if _take(drawn, "postcode"):
            b.emit(", ")
            b.emit_phi("postcode", mk.postcode())
        b.emit("\n")
    elif _take(drawn, "postcode"):
        b.emit("Postcode: ")
        b.emit_phi("postcode", mk.postcode())
        b.emit("\n")
    if _take(drawn, "telephone_number"):
        b.emit("Tel: ")
        b.emit_phi("telephone_number", mk.phone())
        b.emit("\n")
    if _take(drawn, "email"):
        b.emit("Email: ")
        b.emit_phi("email", mk.email(forename, surname))
        b.emit("\n")
    b.emit("\n")


def _header_b(b: _DocBuilder, mk: _Maker, drawn: list[str], forename: str, surname: str):
    if _take(drawn, "hospital_number"):
        b.emit("UNIT RECORD ")
        b.emit_phi("hospital_number", mk.hospital_number())
        b.emit("\n")
    if _take(drawn, "name"):
        b.emit("Re: ")
        b.emit_phi("name", surname)
        b.emit(", ")
        b.emit_phi("name", forename)
        if _take(drawn, "date_of_birth"):
            b.emit(" (born ")
            b.emit_phi("date_of_birth", mk.dob())
            b.emit(")")
        b.emit("\n")
    elif _take(drawn, "date_of_birth"):
        b.emit("Born ")
        b.emit_phi("date_of_birth", mk.dob())
        b.emit("\n")
    if _take(drawn, "nhs_number"):
        b.emit("National Identifier ")
        b.emit_phi("nhs_number", mk.nhs_number())
        b.emit("\n")
    if _take(drawn, "emergency_department_number"):
        b.emit("Attendance Code ")
        b.emit_phi("emergency_department_number", mk.ed_number())
        b.emit("\n")
    if _take(drawn, "telephone_number"):
        b.emit("Contact ")
        b.emit_phi("telephone_number", mk.phone())
        if _take(drawn, "email"):
            b.emit(" or ")
            b.emit_phi("email", mk.email(forename, surname))
        b.emit("\n")
    elif _take(drawn, "email"):
        b.emit("Messages to ")
        b.emit_phi("email", mk.email(forename, surname))
        b.emit("\n")
    if _take(drawn, "address_line"):
        b.emit("Residing at ")
        b.emit_phi("address_line", mk.address())
        if _take(drawn, "postcode"):
            b.emit(", ")
            b.emit_phi("postcode", mk.postcode())
        b.emit("\n")
    elif _take(drawn, "postcode"):
        b.emit("Area ")
        b.emit_phi("postcode", mk.postcode())
        b.emit("\n")
    b.emit("\n")


def _body(b: _DocBuilder, mk: _Maker, rng: random.Random, drawn: list[str],
          forename: str, surname: str, style: str, with_names: bool):
    if with_names:
        b.emit("Dear Dr ")
        b.emit_phi("name", rng.choice(SURNAMES))
        b.emit(",\n\n")
    else:
        b.emit("Dear colleague,\n\n")

    while drawn:
        concept = drawn.pop()
        if rng.random() < 0.45:
            b.emit(rng.choice(FILLER) + " ")
        if concept == "name":
            phrase = rng.choice((
                "I reviewed ", "Thank you for referring ", "I saw ",
                "We discussed the results with ",
            ))
            b.emit(phrase)
            b.emit_phi("name", mk.full_name(*mk.person()))
            b.emit(" in clinic. ")
        elif concept == "address_line":
            b.emit("Correspondence should go to " if style == "A" else "Post reaches the family at ")
            b.emit_phi("address_line", mk.address())
            b.emit(". ")
        elif concept == "postcode":
            b.emit("The visit covers the " if style == "A" else "Their district is ")
            b.emit_phi("postcode", mk.postcode())
            b.emit(" area. " if style == "A" else ". ")
        elif concept == "email":
            b.emit("Results were copied to " if style == "A" else "Scans go to ")
            b.emit_phi("email", mk.email(*mk.person()))
            b.emit(". ")
        elif concept == "telephone_number":
            b.emit("We can be reached on " if style == "A" else "Ring the ward via ")
            b.emit_phi("telephone_number", mk.phone())
            b.emit(". ")
        elif concept == "date_of_birth":
            b.emit("Date of birth was confirmed as " if style == "A" else "Birth date on file reads ")
            b.emit_phi("date_of_birth", mk.dob())
            b.emit(". ")
        elif concept == "nhs_number":
            b.emit("The NHS number on file is " if style == "A" else "The national identifier reads ")
            b.emit_phi("nhs_number", mk.nhs_number())
            b.emit(". ")
        elif concept == "hospital_number":
            b.emit("Hospital number " if style == "A" else "Unit record ")
            b.emit_phi("hospital_number", mk.hospital_number())
            b.emit(" refers. ")
        elif concept == "emergency_department_number":
            b.emit("ED reference " if style == "A" else "Attendance code ")
            b.emit_phi("emergency_department_number", mk.ed_number())
            b.emit(" applies. ")
        elif concept == "initials":
            f2, s2 = mk.person()
            if style == "A":
                b.emit("Dictated by ")
                b.emit_phi("initials", mk.initials(f2, s2))
                b.emit(" ")
            else:
                b.emit("Completed (")
                b.emit_phi("initials", mk.initials(f2, s2))
                b.emit(") ")

    b.emit("\nYours sincerely,\n")
    if with_names:
        b.emit_phi("name", mk.full_name(forename, surname))
        b.emit("\n")
