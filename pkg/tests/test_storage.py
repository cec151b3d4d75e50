import pytest

from deidkit.corpus import ingest, preprocess, PreprocessConfig
from deidkit.errors import MalformedRecord
from deidkit.storage import VersionStore, dataset_from_store_json, dataset_to_store_json


def test_round_trip(db, tiny_exchange, tmp_path):
    ds = ingest(tiny_exchange, db).dataset
    store = VersionStore(tmp_path)
    store.save(ds)
    loaded = store.load(1)
    assert loaded.gold_spans == ds.gold_spans
    assert loaded.documents == ds.documents
    assert loaded.active_concepts == ds.active_concepts


def test_retrieval_byte_identical(db, tiny_exchange, tmp_path):
    ds = ingest(tiny_exchange, db).dataset
    store = VersionStore(tmp_path)
    path = store.save(ds)
    first = path.read_bytes()
    again = store.save(ds)  # idempotent re-save
    assert again.read_bytes() == first
    assert dataset_to_store_json(store.load(1)) == first.decode("utf-8")


def test_conflicting_rewrite_rejected(db, tiny_exchange, tmp_path):
    ds = ingest(tiny_exchange, db).dataset
    store = VersionStore(tmp_path)
    store.save(ds)
    import dataclasses

    mutated = dataclasses.replace(ds, gold_spans=ds.gold_spans[:-1])
    with pytest.raises(MalformedRecord, match="different content"):
        store.save(mutated)


def test_latest_and_version_ids(db, tiny_exchange, tmp_path):
    ds = ingest(tiny_exchange, db).dataset
    child = preprocess(ds, PreprocessConfig(min_occurrences=0), db).dataset
    store = VersionStore(tmp_path)
    store.save(ds)
    store.save(child)
    assert store.version_ids() == [1, 2]
    assert store.latest().version_id == 2
    # changelog survives the round trip
    assert store.load(2).changelog == child.changelog


def test_missing_version(tmp_path):
    store = VersionStore(tmp_path)
    with pytest.raises(MalformedRecord):
        store.load(4)
    with pytest.raises(MalformedRecord):
        store.latest()


def test_store_format_guard():
    with pytest.raises(MalformedRecord):
        dataset_from_store_json('{"format": "something-else"}')
