import pytest

from deidkit.errors import AmbiguousTarget, UncoveredLeaf, UnknownConcept
from deidkit.ontology import (
    DEFAULT_EVAL_CONCEPTS,
    NON_PHI,
    Concept,
    ConceptDb,
    apply_remap,
    build_default_db,
    db_from_json,
    db_to_json,
    load_db,
    remap_granularity,
    save_db,
)


def test_default_db_localised_aliases(db):
    assert "zip code" in db.concept("postcode").aliases


def test_default_db_has_ten_eval_leaves(db):
    active = {c.id for c in db.active_leaves()}
    assert set(DEFAULT_EVAL_CONCEPTS) <= active
    assert len(DEFAULT_EVAL_CONCEPTS) == 10


def test_class_order_reserves_index_zero(db):
    assert db.class_order[0] == NON_PHI
    assert not db.has(NON_PHI)


def test_forest_at_most_five_roots(db):
    roots = [c for c in db.concepts if c.parent is None]
    assert len(roots) <= 5
    for c in db.concepts:
        chain = db.ancestors(c.id)
        assert chain[-1] in {r.id for r in roots}
        assert len(chain) <= len(db.concepts)


def test_inactive_concepts_retained_not_deleted(db):
    inactive = [c for c in db.concepts if c.is_leaf and not c.active]
    assert inactive, "non-healthcare identifiers ship inactive"
    assert all(c.id not in db.class_order for c in inactive)


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        ConceptDb(
            concepts=(Concept("a", "a"), Concept("a", "b")),
            class_order=(NON_PHI, "a"),
        )


def test_cycle_rejected():
    with pytest.raises(ValueError):
        ConceptDb(
            concepts=(
                Concept("a", "a", parent="b", is_leaf=False),
                Concept("b", "b", parent="a", is_leaf=False),
            ),
            class_order=(NON_PHI,),
        )


def test_remap_identity_on_all_leaves(db):
    leaves = [c.id for c in db.active_leaves()]
    mapping = remap_granularity(db, leaves)
    assert mapping == {leaf: leaf for leaf in leaves}


def test_remap_to_ring1_parents(db):
    targets = ["personal_names", "contact_location", "dates",
               "healthcare_identifiers", "non_healthcare_identifiers"]
    mapping = remap_granularity(db, targets)
    assert mapping["date_of_birth"] == "dates"
    assert mapping["email"] == "contact_location"
    assert mapping["name"] == "personal_names"
    assert mapping["nhs_number"] == "healthcare_identifiers"


def test_remap_uncovered_leaf(db):
    targets = [c.id for c in db.active_leaves() if c.id != "email"]
    with pytest.raises(UncoveredLeaf, match="email"):
        remap_granularity(db, targets)


def test_remap_ambiguous_target(db):
    with pytest.raises(AmbiguousTarget):
        remap_granularity(
            db, [c.id for c in db.active_leaves()] + ["dates"])


def test_remap_unknown_target(db):
    with pytest.raises(UnknownConcept):
        remap_granularity(db, ["nope"])


def test_remap_composition_idempotent(db):
    targets = ["personal_names", "contact_location", "dates",
               "healthcare_identifiers", "non_healthcare_identifiers"]
    mapping = remap_granularity(db, targets)
    for leaf, target in mapping.items():
        assert apply_remap(mapping, apply_remap(mapping, leaf)) == apply_remap(mapping, leaf)
        assert apply_remap(mapping, target) == target


def test_serialization_round_trip_byte_identical(db, tmp_path):
    path = tmp_path / "db.json"
    save_db(db, path)
    first = path.read_text(encoding="utf-8")
    loaded = load_db(path)
    assert loaded == db
    assert db_to_json(loaded) == first


def test_version_field_mandatory(db):
    import json

    obj = json.loads(db_to_json(db))
    del obj["version"]
    with pytest.raises(ValueError, match="version"):
        db_from_json(json.dumps(obj))
