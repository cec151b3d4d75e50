import pytest

from deidkit import build_default_db

# Forename/surname and site-absent classes legitimately lack examples in most
# test corpora, so DroppedClassWarning is filtered in pyproject; the warning
# itself is covered by a dedicated test.


@pytest.fixture(scope="session")
def db():
    return build_default_db()


@pytest.fixture(scope="session")
def class_index(db):
    return {cid: i for i, cid in enumerate(db.class_order)}


def make_exchange(documents, annotations):
    return {
        "format": "deidkit-annotations",
        "version": 1,
        "documents": documents,
        "annotations": annotations,
    }


@pytest.fixture
def tiny_exchange():
    docs = [
        {"doc_id": "d1", "text": "Patient John Smith lives at 14 Cedar Grove."},
        {"doc_id": "d2", "text": "Contact 020 7946 0000 for results."},
    ]
    anns = [
        {"doc_id": "d1", "start": 8, "end": 18, "concept_id": "name"},
        {"doc_id": "d1", "start": 28, "end": 42, "concept_id": "address_line"},
        {"doc_id": "d2", "start": 8, "end": 21, "concept_id": "telephone_number"},
        {"doc_id": "d1", "start": 0, "end": 7, "concept_id": "initials"},
        {"doc_id": "d2", "start": 26, "end": 33, "concept_id": "name"},
    ]
    return make_exchange(docs, anns)
