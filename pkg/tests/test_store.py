from __future__ import annotations

import random
import threading

import pytest

from espindata.errors import (
    ConcurrentCut,
    ConcurrentRelease,
    DuplicateAccession,
    IntegrityViolation,
    IoFailure,
    NotFound,
)
from espindata import fixtures
from espindata.platform import Platform
from espindata.records import canonical_json, record_from_doc, record_to_doc
from espindata.store import FileStore, MemoryStore, blob_ref


def _accession(store, golden_doc, **overrides):
    doc = dict(golden_doc)
    doc.update(overrides)
    return store.accession_and_put(record_from_doc(doc))


@pytest.fixture(params=["memory", "file"])
def store(request, tmp_path):
    if request.param == "memory":
        return MemoryStore()
    return FileStore(tmp_path / "data")


def test_put_and_get_round_trip(store, golden_doc):
    record = _accession(store, golden_doc)
    assert record.record_id == "ESD-000001"
    loaded = store.get_record("ESD-000001")
    assert canonical_json(record_to_doc(loaded)) == canonical_json(record_to_doc(record))


def test_get_unknown_raises(store):
    with pytest.raises(NotFound):
        store.get_record("ESD-999999")


def test_put_requires_valid_accession(store, golden_record):
    with pytest.raises(IntegrityViolation):
        store.put_accepted(golden_record)  # no accession id assigned


def test_put_is_idempotent(store, golden_doc):
    record = _accession(store, golden_doc)
    assert store.put_accepted(record) == record.record_id
    assert store.count() == 1


def test_duplicate_accession_with_different_content(store, golden_doc):
    record = _accession(store, golden_doc)
    golden_doc["solution"]["concentration"] = {"value": 12.0, "unit": "wt%"}
    clash = record_from_doc({**golden_doc, "record_id": record.record_id})
    with pytest.raises(DuplicateAccession):
        store.put_accepted(clash)


def test_dangling_unit_is_integrity_violation(store, golden_doc):
    golden_doc["solution"]["viscosity"] = {"value": 1.0, "unit": "poise"}
    golden_doc["record_id"] = "ESD-000001"
    with pytest.raises(IntegrityViolation):
        store.put_accepted(record_from_doc(golden_doc))


def test_dangling_image_ref_is_integrity_violation(store, golden_doc):
    golden_doc["images"] = [
        {
            "image_type": "sem",
            "image_definition": {},
            "payload_ref": "sha256:" + "0" * 64,
        }
    ]
    golden_doc["record_id"] = "ESD-000001"
    with pytest.raises(IntegrityViolation):
        store.put_accepted(record_from_doc(golden_doc))


def test_rule_violating_record_cannot_be_stored(store, golden_doc):
    golden_doc["ambient"]["humidity"] = {"value": 150.0, "unit": "%RH"}
    golden_doc["record_id"] = "ESD-000001"
    with pytest.raises(IntegrityViolation):
        store.put_accepted(record_from_doc(golden_doc))


def test_blobs_are_content_addressed(store):
    payload = b"fake image bytes"
    ref1 = store.blobs.put(payload)
    ref2 = store.blobs.put(payload)
    assert ref1 == ref2 == blob_ref(payload)
    assert store.blobs.get(ref1) == payload
    assert store.blobs.exists(ref1)
    assert not store.blobs.exists("sha256:" + "f" * 64)


def test_record_with_image_round_trip(store, golden_doc):
    ref = store.blobs.put(b"sem image")
    golden_doc["images"] = [
        {
            "image_type": "sem",
            "image_definition": {"magnification": 5000.0, "file_extension": "png"},
            "payload_ref": ref,
        }
    ]
    record = _accession(store, golden_doc)
    assert store.get_record(record.record_id).images[0].payload_ref == ref


def test_snapshot_restore_identity(tmp_path, golden_doc):
    platform = Platform(data_dir=tmp_path / "a")
    docs = fixtures.generate_corpus(20, seed=3, blob_put=platform.store.blobs.put)
    summary = platform.import_batch(docs)
    assert summary.failed_count == 0

    archive = tmp_path / "snap.zip"
    manifest = platform.store.snapshot(archive)
    assert manifest.record_count == 20

    restored = FileStore(tmp_path / "b")
    restored_manifest = restored.restore(archive)
    assert restored_manifest.record_count == 20
    assert restored.count() == 20
    assert restored.content_digest() == platform.store.content_digest()
    assert restored.record_ids() == platform.store.record_ids()
    # accession counter restored: next accession continues the sequence
    record = record_from_doc(golden_doc)
    assert restored.accession_and_put(record).record_id == "ESD-000021"


def test_snapshot_digest_stable_for_unchanged_store(tmp_path, golden_doc):
    store = FileStore(tmp_path / "data")
    _accession(store, golden_doc)
    first = store.snapshot(tmp_path / "one.zip")
    second = store.snapshot(tmp_path / "two.zip")
    assert first.digest == second.digest
    assert (tmp_path / "one.zip").read_bytes() == (tmp_path / "two.zip").read_bytes()


def test_snapshot_during_cut_is_rejected(tmp_path, golden_doc):
    store = FileStore(tmp_path / "data")
    _accession(store, golden_doc)
    with store.cut_guard():
        with pytest.raises(ConcurrentRelease):
            store.snapshot(tmp_path / "snap.zip")
        with pytest.raises(ConcurrentCut):
            store.cut_guard().__enter__()


def test_restore_requires_empty_store(tmp_path, golden_doc):
    store = FileStore(tmp_path / "data")
    _accession(store, golden_doc)
    archive = tmp_path / "snap.zip"
    store.snapshot(archive)
    with pytest.raises(IntegrityViolation):
        store.restore(archive)


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    from espindata import store as store_module

    target = tmp_path / "out" / "record.json"

    def failing_replace(self, other):
        raise OSError("simulated crash")

    monkeypatch.setattr("pathlib.Path.replace", failing_replace)
    with pytest.raises(IoFailure):
        store_module._write_atomic(target, b"{}")
    monkeypatch.undo()
    assert not target.exists()
    assert not target.with_name(target.name + ".tmp").exists()


def test_referential_integrity_random_operations(tmp_path):
    """Randomized operation sequences preserve referential integrity."""
    platform = Platform(data_dir=tmp_path / "data")
    rng = random.Random(11)
    docs = fixtures.generate_corpus(30, seed=5, blob_put=platform.store.blobs.put)
    for doc in docs:
        roll = rng.random()
        if roll < 0.7:
            platform.import_batch([doc])
        elif roll < 0.9:
            from espindata.moderation import Attribution

            platform.submit_doc(doc, Attribution("r", "r@example.org"))
        # else: drop the doc (no operation)
    store = platform.store
    for record in store.iter_records():
        for _path, quantity in __import__(
            "espindata.records", fromlist=["iter_quantities"]
        ).iter_quantities(record):
            assert store.registry.knows(quantity.unit)
        for image in record.images:
            assert store.blobs.exists(image.payload_ref)


def test_provenance_index(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    platform_mem.moderation.decide(envelope.envelope_id, "accept", "mod")
    index = platform_mem.store.provenance_index()
    assert index.by_doi["10.5555/esd.golden"] == ["ESD-000001"]
    assert envelope.envelope_id in index.by_contributor["G. Olden"]


def test_concurrent_accessions_are_unique(tmp_path, golden_doc):
    store = FileStore(tmp_path / "data")
    results = []

    def insert():
        record = record_from_doc(golden_doc)
        results.append(store.accession_and_put(record).record_id)

    threads = [threading.Thread(target=insert) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 8
    assert sorted(results) == store.record_ids()
