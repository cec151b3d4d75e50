"""Hierarchical PHI concept database and output-granularity remapping.

The concept database is a small forest: at most five top-level nodes, with
the annotatable concepts as leaves. Index 0 of the class order is always the
synthetic non-PHI class and never corresponds to a concept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import AmbiguousTarget, UncoveredLeaf, UnknownConcept

#: Synthetic label for tokens that are not PHI. Always class index 0.
NON_PHI = "non-PHI"

DB_FORMAT = "deidkit-concept-db"

MAX_ROOTS = 5


@dataclass(frozen=True)
class Concept:
    """One node of the PHI ontology.

    Only leaf concepts may label text; internal nodes exist to control
    output granularity. Inactive concepts are kept in the database so they
    can be enabled by later fine-tunes, but they never enter the class order.
    """

    id: str
    name: str
    parent: str | None = None
    aliases: tuple[str, ...] = ()
    is_leaf: bool = True
    active: bool = True


@dataclass(frozen=True)
class ConceptDb:
    """Immutable concept forest plus the deterministic class ordering."""

    concepts: tuple[Concept, ...]
    class_order: tuple[str, ...]
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        by_id: dict[str, Concept] = {}
        for c in self.concepts:
            if c.id == NON_PHI:
                raise ValueError(f"concept id {NON_PHI!r} is reserved for the non-PHI class")
            if c.id in by_id:
                raise ValueError(f"duplicate concept id: {c.id}")
            by_id[c.id] = c
        roots = 0
        for c in self.concepts:
            if c.parent is None:
                roots += 1
            elif c.parent not in by_id:
                raise ValueError(f"concept {c.id} has unknown parent {c.parent}")
        if roots > MAX_ROOTS:
            raise ValueError(f"ontology has {roots} roots; at most {MAX_ROOTS} allowed")
        # reject cycles: every concept must reach a root
        for c in self.concepts:
            seen = set()
            node = c
            while node.parent is not None:
                if node.id in seen:
                    raise ValueError(f"cycle in ontology involving {c.id}")
                seen.add(node.id)
                node = by_id[node.parent]
        children = {c.parent for c in self.concepts if c.parent is not None}
        for c in self.concepts:
            if c.is_leaf and c.id in children:
                raise ValueError(f"leaf concept {c.id} has children")
        if not self.class_order or self.class_order[0] != NON_PHI:
            raise ValueError(f"class_order[0] must be {NON_PHI!r}")
        active_leaves = {c.id for c in self.concepts if c.is_leaf and c.active}
        rest = self.class_order[1:]
        if len(set(rest)) != len(rest) or set(rest) != active_leaves:
            raise ValueError("class_order must list every active leaf exactly once")
        object.__setattr__(self, "_by_id", by_id)

    def concept(self, concept_id: str) -> Concept:
        try:
            return self._by_id[concept_id]
        except KeyError:
            raise UnknownConcept(f"unknown concept: {concept_id}") from None

    def has(self, concept_id: str) -> bool:
        return concept_id in self._by_id

    def active_leaves(self) -> tuple[Concept, ...]:
        return tuple(c for c in self.concepts if c.is_leaf and c.active)

    def is_active_leaf(self, concept_id: str) -> bool:
        c = self._by_id.get(concept_id)
        return c is not None and c.is_leaf and c.active

    def class_index(self) -> dict[str, int]:
        """Concept id (or non-PHI) to class index."""
        return {cid: i for i, cid in enumerate(self.class_order)}

    def ancestors(self, concept_id: str) -> tuple[str, ...]:
        """Ancestor chain from the concept itself up to its root."""
        chain = [concept_id]
        node = self.concept(concept_id)
        while node.parent is not None:
            chain.append(node.parent)
            node = self._by_id[node.parent]
        return tuple(chain)

    def display_name(self, label: str) -> str:
        if label == NON_PHI:
            return NON_PHI
        return self.concept(label).name


def _ordered_class_order(concepts: Iterable[Concept]) -> tuple[str, ...]:
    leaves = sorted(c.id for c in concepts if c.is_leaf and c.active)
    return (NON_PHI, *leaves)


def build_default_db() -> ConceptDb:
    """The UK-localised default ontology.

    Five top-level nodes; ten annotatable identifier concepts plus the
    forename/surname pair that default preprocessing merges into name.
    Non-healthcare identifiers ship inactive: not prevalent enough in
    clinical text to evaluate against.
    """
    concepts = (
        Concept("personal_names", "personal names", None, (), is_leaf=False),
        Concept("contact_location", "contact and location", None, (), is_leaf=False),
        Concept("dates", "dates", None, (), is_leaf=False),
        Concept("healthcare_identifiers", "healthcare identifiers", None, (), is_leaf=False),
        Concept("non_healthcare_identifiers", "non-healthcare identifiers", None, (), is_leaf=False),
        Concept("name", "name", "personal_names", ("patient name",)),
        Concept("forename", "forename", "personal_names", ("first name",)),
        Concept("surname", "surname", "personal_names", ("last name", "family name")),
        Concept("initials", "initials", "personal_names"),
        Concept("address_line", "address line", "contact_location", ("street address",)),
        Concept("postcode", "postcode", "contact_location", ("zip code",)),
        Concept("email", "email", "contact_location", ("email address",)),
        Concept("telephone_number", "telephone number", "contact_location", ("phone number",)),
        Concept("date_of_birth", "date of birth", "dates", ("DOB",)),
        Concept(
            "emergency_department_number",
            "emergency department number",
            "healthcare_identifiers",
            ("ED number",),
        ),
        Concept("hospital_number", "hospital number", "healthcare_identifiers", ("hosp num",)),
        Concept("nhs_number", "NHS number", "healthcare_identifiers"),
        Concept(
            "non_healthcare_identifier",
            "non-healthcare identifier",
            "non_healthcare_identifiers",
            (),
            active=False,
        ),
    )
    return ConceptDb(concepts=concepts, class_order=_ordered_class_order(concepts))


#: Concepts listed in the default evaluation set (the ten identifier rows).
DEFAULT_EVAL_CONCEPTS = (
    "address_line",
    "email",
    "name",
    "postcode",
    "emergency_department_number",
    "date_of_birth",
    "hospital_number",
    "nhs_number",
    "initials",
    "telephone_number",
)


def remap_granularity(db: ConceptDb, target_level: Iterable[str]) -> dict[str, str]:
    """Map every active leaf to its unique ancestor (or itself) in the target set.

    The returned table is total over active leaves and idempotent under
    composition (targets map to themselves when re-applied).
    """
    targets = set(target_level)
    for t in targets:
        if not db.has(t):
            raise UnknownConcept(f"granularity target does not exist: {t}")
    mapping: dict[str, str] = {}
    for leaf in db.active_leaves():
        hits = [node for node in db.ancestors(leaf.id) if node in targets]
        if not hits:
            raise UncoveredLeaf(f"leaf {leaf.id} has no ancestor in the target set")
        if len(hits) > 1:
            raise AmbiguousTarget(f"leaf {leaf.id} has multiple target ancestors: {hits}")
        mapping[leaf.id] = hits[0]
    return mapping


def apply_remap(mapping: dict[str, str], label: str) -> str:
    """Apply a granularity remap, treating unmapped labels as fixed points."""
    return mapping.get(label, label)


# --- serialization ----------------------------------------------------------

def db_to_json(db: ConceptDb) -> str:
    obj = {
        "format": DB_FORMAT,
        "version": 1,
        "class_order": list(db.class_order),
        "concepts": [
            {
                "id": c.id,
                "name": c.name,
                "parent": c.parent,
                "aliases": list(c.aliases),
                "is_leaf": c.is_leaf,
                "active": c.active,
            }
            for c in db.concepts
        ],
    }
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def db_from_json(text: str) -> ConceptDb:
    obj = json.loads(text)
    if obj.get("format") != DB_FORMAT:
        raise ValueError(f"not a {DB_FORMAT} file")
    if "version" not in obj:
        raise ValueError("concept db file is missing the mandatory version field")
    concepts = tuple(
        Concept(
            id=c["id"],
            name=c["name"],
            parent=c.get("parent"),
            aliases=tuple(c.get("aliases", ())),
            is_leaf=c.get("is_leaf", True),
            active=c.get("active", True),
        )
        for c in obj["concepts"]
    )
    return ConceptDb(concepts=concepts, class_order=tuple(obj["class_order"]))


def save_db(db: ConceptDb, path: str | Path) -> None:
    Path(path).write_text(db_to_json(db), encoding="utf-8")


def load_db(path: str | Path) -> ConceptDb:
    return db_from_json(Path(path).read_text(encoding="utf-8"))
