"""On-disk stores for dataset versions and trained models.

Writes are serialized through a single lock; version files are written
once and never rewritten, so reads are immutable snapshots and repeated
retrievals are byte-identical.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .corpus import ChangeEntry, DatasetVersion, Document, GoldSpan
from .errors import MalformedRecord

DATASET_FORMAT = "deidkit-dataset-version"


def dataset_to_store_json(ds: DatasetVersion) -> str:
    obj = {
        "format": DATASET_FORMAT,
        "version_id": ds.version_id,
        "parent_version": ds.parent_version,
        "active_concepts": list(ds.active_concepts),
        "changelog": [e.to_dict() for e in ds.changelog],
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


def dataset_from_store_json(text: str) -> DatasetVersion:
    obj = json.loads(text)
    if obj.get("format") != DATASET_FORMAT:
        raise MalformedRecord(f"not a {DATASET_FORMAT} file")
    return DatasetVersion(
        version_id=obj["version_id"],
        parent_version=obj.get("parent_version"),
        documents=tuple(
            Document(d["doc_id"], d["text"], d.get("source_tag", ""))
            for d in obj["documents"]
        ),
        gold_spans=tuple(
            GoldSpan(a["doc_id"], a["start"], a["end"], a["concept_id"])
            for a in obj["annotations"]
        ),
        active_concepts=tuple(obj["active_concepts"]),
        changelog=tuple(ChangeEntry.from_dict(e) for e in obj.get("changelog", ())),
    )


class VersionStore:
    """Directory of immutable dataset versions, one JSON file each."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, version_id: int) -> Path:
        return self.root / "datasets" / f"v{version_id}.json"

    def save(self, ds: DatasetVersion) -> Path:
        with self._lock:
            path = self._path(ds.version_id)
            if path.exists():
                existing = path.read_text(encoding="utf-8")
                if existing != dataset_to_store_json(ds):
                    raise MalformedRecord(
                        f"version {ds.version_id} already exists with different content")
                return path
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(dataset_to_store_json(ds), encoding="utf-8")
            tmp.replace(path)
            return path

    def load(self, version_id: int) -> DatasetVersion:
        path = self._path(version_id)
        if not path.exists():
            raise MalformedRecord(f"no stored dataset version {version_id}")
        return dataset_from_store_json(path.read_text(encoding="utf-8"))

    def version_ids(self) -> list[int]:
        out = []
        for p in (self.root / "datasets").glob("v*.json"):
            try:
                out.append(int(p.stem[1:]))
            except ValueError:
                continue
        return sorted(out)

    def latest(self) -> DatasetVersion:
        ids = self.version_ids()
        if not ids:
            raise MalformedRecord(f"no dataset versions stored under {self.root}")
        return self.load(ids[-1])
