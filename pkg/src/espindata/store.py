"""Durable persistence for records, envelopes, image blobs and snapshots.

The backend is abstracted: the embedded file-backed store is the shipped
default (one canonical JSON document per record, committed atomically via
rename), and an in-memory store backs tests and ephemeral tooling.  Image
payloads are content-addressed by SHA-256, so identical bytes always yield
the identical reference.  Logical grouping into the relational table
layout happens at export time; the canonical record document is the
storage format.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import threading
import zipfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from . import emcv
from .errors import (
    ConcurrentRelease,
    DuplicateAccession,
    IntegrityViolation,
    IoFailure,
    NotFound,
)
from .records import (
    ACCESSION_DIGITS,
    ACCESSION_PREFIX,
    CANONICAL_FIELD_UNITS,
    SCHEMA_VERSION,
    ExperimentRecord,
    canonical_json,
    iter_quantities,
    record_from_doc,
    record_to_doc,
)
from .units import UnitRegistry, default_registry

ACCESSION_RE = re.compile(rf"^{ACCESSION_PREFIX}\d{{{ACCESSION_DIGITS}}}$")

# Fixed timestamp for deterministic archive entries.
_EPOCH = (1980, 1, 1, 0, 0, 0)


def format_accession(number: int) -> str:
    return f"{ACCESSION_PREFIX}{number:0{ACCESSION_DIGITS}d}"


def blob_ref(payload: bytes) -> str:
    return "sha256:" + hashlib.sha256(payload).hexdigest()


class BlobStore:
    """Content-addressed blob storage."""

    def put(self, payload: bytes) -> str:
        raise NotImplementedError

    def get(self, ref: str) -> bytes:
        raise NotImplementedError

    def exists(self, ref: str) -> bool:
        raise NotImplementedError

    def refs(self) -> list[str]:
        raise NotImplementedError


class MemoryBlobStore(BlobStore):
    def __init__(self):
        self._blobs: dict[str, bytes] = {}

    def put(self, payload: bytes) -> str:
        ref = blob_ref(payload)
        self._blobs[ref] = payload
        return ref

    def get(self, ref: str) -> bytes:
        try:
            return self._blobs[ref]
        except KeyError:
            raise NotFound(f"blob {ref!r} not found") from None

    def exists(self, ref: str) -> bool:
        return ref in self._blobs

    def refs(self) -> list[str]:
        return sorted(self._blobs)


class FileBlobStore(BlobStore):
    def __init__(self, root: Path):
        self._root = Path(root)
        self._root.mkdir(parents=True, exist_ok=True)

    def _path(self, ref: str) -> Path:
        if not ref.startswith("sha256:"):
            raise NotFound(f"malformed blob ref {ref!r}")
        return self._root / ref.split(":", 1)[1]

    def put(self, payload: bytes) -> str:
        ref = blob_ref(payload)
        path = self._path(ref)
        if not path.exists():
            _write_atomic(path, payload)
        return ref

    def get(self, ref: str) -> bytes:
        path = self._path(ref)
        if not path.exists():
            raise NotFound(f"blob {ref!r} not found")
        return path.read_bytes()

    def exists(self, ref: str) -> bool:
        return self._path(ref).exists()

    def refs(self) -> list[str]:
        return sorted("sha256:" + p.name for p in self._root.iterdir() if p.is_file())


def _write_atomic(path: Path, payload: bytes) -> None:
    """Commit via rename so interrupted writes never surface partial files."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(payload)
        tmp.replace(path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoFailure(f"failed to write {path}: {exc}") from exc


@dataclass(frozen=True)
class SnapshotManifest:
    schema_version: str
    record_count: int
    digest: str

    def to_doc(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "record_count": self.record_count,
            "digest": self.digest,
        }


@dataclass(frozen=True)
class ProvenanceIndex:
    by_doi: dict[str, list[str]] = field(default_factory=dict)
    by_contributor: dict[str, list[str]] = field(default_factory=dict)


class BaseStore:
    """Shared behaviour: integrity checks, accession, digests, snapshots."""

    def __init__(self, registry: UnitRegistry | None = None):
        self.registry = registry or default_registry()
        self._lock = threading.RLock()
        self._revision = 0
        self._cut_active = False

    # -- abstract primitives ---------------------------------------------

    blobs: BlobStore

    def _read_record_doc(self, record_id: str) -> dict | None:
        raise NotImplementedError

    def _write_record_doc(self, record_id: str, doc: dict) -> None:
        raise NotImplementedError

    def record_ids(self) -> list[str]:
        raise NotImplementedError

    def _read_envelope_doc(self, envelope_id: str) -> dict | None:
        raise NotImplementedError

    def _write_envelope_doc(self, envelope_id: str, doc: dict) -> None:
        raise NotImplementedError

    def envelope_ids(self) -> list[str]:
        raise NotImplementedError

    def _peek_accession(self) -> int:
        raise NotImplementedError

    def _commit_accession(self, next_number: int) -> None:
        raise NotImplementedError

    # -- revision ----------------------------------------------------------

    @property
    def revision(self) -> int:
        return self._revision

    def _bump(self) -> None:
        self._revision += 1

    # -- records -----------------------------------------------------------

    def _check_integrity(self, record: ExperimentRecord) -> None:
        if record.record_id is None or not ACCESSION_RE.match(record.record_id):
            raise IntegrityViolation(
                f"record_id {record.record_id!r} is not a valid accession id"
            )
        problems: list[str] = []
        for path, quantity in iter_quantities(record):
            if not self.registry.knows(quantity.unit):
                problems.append(f"{path}: unit {quantity.unit!r} unresolvable")
                continue
            target = CANONICAL_FIELD_UNITS.get(path)
            if target is not None and not self.registry.convertible(quantity.unit, target):
                problems.append(
                    f"{path}: unit {quantity.unit!r} not convertible to {target!r}"
                )
        emcv.vocabulary(record.vocabulary_version)
        for i, image in enumerate(record.images):
            if not self.blobs.exists(image.payload_ref):
                problems.append(f"images[{i}]: dangling payload_ref {image.payload_ref!r}")
        if problems:
            raise IntegrityViolation("; ".join(problems))
        # No stored record may violate the rule catalog.
        from .evvr import validate_record

        report = validate_record(record, self.registry)
        if not report.passed:
            raise IntegrityViolation(
                "record violates the rule catalog: "
                + ", ".join(v.rule_id for v in report.violations)
            )

    def put_accepted(self, record: ExperimentRecord) -> str:
        """Durably store an accepted, accessioned record (idempotent)."""
        with self._lock:
            self._check_integrity(record)
            doc = record_to_doc(record)
            existing = self._read_record_doc(record.record_id)
            if existing is not None:
                if canonical_json(existing) == canonical_json(doc):
                    return record.record_id
                raise DuplicateAccession(
                    f"accession {record.record_id!r} already holds different content"
                )
            self._write_record_doc(record.record_id, doc)
            self._bump()
            return record.record_id

    def accession_and_put(self, record: ExperimentRecord) -> ExperimentRecord:
        """Assign the next accession id and store; ids stay dense on failure."""
        from dataclasses import replace

        with self._lock:
            number = self._peek_accession()
            accessioned = replace(record, record_id=format_accession(number))
            self._check_integrity(accessioned)
            self._write_record_doc(accessioned.record_id, record_to_doc(accessioned))
            self._commit_accession(number + 1)
            self._bump()
            return accessioned

    def get_record(self, record_id: str) -> ExperimentRecord:
        doc = self._read_record_doc(record_id)
        if doc is None:
            raise NotFound(f"record {record_id!r} not found")
        return record_from_doc(doc)

    def get_record_doc(self, record_id: str) -> dict:
        doc = self._read_record_doc(record_id)
        if doc is None:
            raise NotFound(f"record {record_id!r} not found")
        return doc

    def has_record(self, record_id: str) -> bool:
        return self._read_record_doc(record_id) is not None

    def iter_records(self) -> Iterator[ExperimentRecord]:
        for record_id in self.record_ids():
            yield self.get_record(record_id)

    def count(self) -> int:
        return len(self.record_ids())

    # -- envelopes -----------------------------------------------------------

    def put_envelope_doc(self, envelope_id: str, doc: dict) -> None:
        with self._lock:
            self._write_envelope_doc(envelope_id, doc)
            self._bump()

    def get_envelope_doc(self, envelope_id: str) -> dict:
        doc = self._read_envelope_doc(envelope_id)
        if doc is None:
            raise NotFound(f"envelope {envelope_id!r} not found")
        return doc

    def iter_envelope_docs(self) -> Iterator[dict]:
        for envelope_id in self.envelope_ids():
            yield self.get_envelope_doc(envelope_id)

    # -- provenance ------------------------------------------------------------

    def provenance_index(self) -> ProvenanceIndex:
        index = ProvenanceIndex()
        for record_id in self.record_ids():
            doc = self._read_record_doc(record_id)
            doi = (doc.get("provenance") or {}).get("doi")
            if doi:
                index.by_doi.setdefault(doi, []).append(record_id)
        for envelope_id in self.envelope_ids():
            doc = self._read_envelope_doc(envelope_id)
            contributor = ((doc.get("record") or {}).get("provenance") or {}).get(
                "contributor_name"
            )
            if contributor:
                index.by_contributor.setdefault(contributor, []).append(envelope_id)
        return index

    # -- digests and snapshots ---------------------------------------------------

    def _content_entries(self) -> list[tuple[str, bytes]]:
        entries: list[tuple[str, bytes]] = []
        for record_id in self.record_ids():
            payload = canonical_json(self._read_record_doc(record_id)).encode("utf-8")
            entries.append((f"records/{record_id}.json", payload))
        for envelope_id in self.envelope_ids():
            payload = canonical_json(self._read_envelope_doc(envelope_id)).encode("utf-8")
            entries.append((f"envelopes/{envelope_id}.json", payload))
        for ref in self.blobs.refs():
            entries.append((f"blobs/{ref.split(':', 1)[1]}", self.blobs.get(ref)))
        entries.sort(key=lambda item: item[0])
        return entries

    def content_digest(self) -> str:
        hasher = hashlib.sha256()
        for name, payload in self._content_entries():
            hasher.update(name.encode("utf-8"))
            hasher.update(b"\x00")
            hasher.update(hashlib.sha256(payload).digest())
            hasher.update(b"\x00")
        return "sha256:" + hasher.hexdigest()

    def snapshot(self, path: str | Path) -> SnapshotManifest:
        """Write a complete self-contained archive of the store."""
        if self._cut_active:
            raise ConcurrentRelease("cannot snapshot while a release cut is in progress")
        with self._lock:
            if self._cut_active:
                raise ConcurrentRelease("cannot snapshot while a release cut is in progress")
            entries = self._content_entries()
            manifest = SnapshotManifest(
                schema_version=SCHEMA_VERSION,
                record_count=self.count(),
                digest=self.content_digest(),
            )
            registries = {
                "vocabulary": emcv.vocabulary_manifest(),
                "unit_symbols": list(self.registry.symbols()),
            }
            archive_entries = (
                [("manifest.json", canonical_json(manifest.to_doc()).encode("utf-8"))]
                + [("registries.json", canonical_json(registries).encode("utf-8"))]
                + [
                    (
                        "meta/counters.json",
                        canonical_json({"next_accession": self._peek_accession()}).encode("utf-8"),
                    )
                ]
                + entries
            )
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            buffer = io.BytesIO()
            write_deterministic_zip(buffer, archive_entries)
            _write_atomic(path, buffer.getvalue())
            return manifest

    def restore(self, path: str | Path) -> SnapshotManifest:
        """Load a snapshot into this (empty) store."""
        if self.count() or self.envelope_ids():
            raise IntegrityViolation("restore requires an empty store")
        path = Path(path)
        if not path.exists():
            raise NotFound(f"snapshot {path} not found")
        with zipfile.ZipFile(path) as archive:
            manifest_doc = json.loads(archive.read("manifest.json"))
            names = set(archive.namelist())
            for name in sorted(names):
                if name.startswith("blobs/"):
                    self.blobs.put(archive.read(name))
            counters = json.loads(archive.read("meta/counters.json"))
            self._commit_accession(int(counters["next_accession"]))
            for name in sorted(names):
                if name.startswith("records/"):
                    doc = json.loads(archive.read(name))
                    self.put_accepted(record_from_doc(doc))
                elif name.startswith("envelopes/"):
                    doc = json.loads(archive.read(name))
                    self.put_envelope_doc(doc["envelope_id"], doc)
        manifest = SnapshotManifest(
            schema_version=manifest_doc["schema_version"],
            record_count=manifest_doc["record_count"],
            digest=manifest_doc["digest"],
        )
        if self.content_digest() != manifest.digest:
            raise IntegrityViolation("restored content does not match snapshot digest")
        return manifest

    # -- release-cut exclusion ------------------------------------------------

    @contextmanager
    def cut_guard(self):
        """Exclusive guard held while a release cut reads a consistent view.

        Holds the store lock for the duration, excluding writers; the lock
        is reentrant so the cutting thread can still read.
        """
        from .errors import ConcurrentCut

        if self._cut_active:
            raise ConcurrentCut("another release cut is in progress")
        self._lock.acquire()
        if self._cut_active:
            self._lock.release()
            raise ConcurrentCut("another release cut is in progress")
        self._cut_active = True
        try:
            yield
        finally:
            self._cut_active = False
            self._lock.release()


class MemoryStore(BaseStore):
    """Ephemeral store for tests and ad-hoc tooling."""

    def __init__(self, registry: UnitRegistry | None = None):
        super().__init__(registry)
        self.blobs = MemoryBlobStore()
        self._records: dict[str, dict] = {}
        self._envelopes: dict[str, dict] = {}
        self._next_accession = 1

    def _read_record_doc(self, record_id: str) -> dict | None:
        doc = self._records.get(record_id)
        return json.loads(canonical_json(doc)) if doc is not None else None

    def _write_record_doc(self, record_id: str, doc: dict) -> None:
        self._records[record_id] = json.loads(canonical_json(doc))

    def record_ids(self) -> list[str]:
        return sorted(self._records)

    def _read_envelope_doc(self, envelope_id: str) -> dict | None:
        doc = self._envelopes.get(envelope_id)
        return json.loads(canonical_json(doc)) if doc is not None else None

    def _write_envelope_doc(self, envelope_id: str, doc: dict) -> None:
        self._envelopes[envelope_id] = json.loads(canonical_json(doc))

    def envelope_ids(self) -> list[str]:
        return sorted(self._envelopes)

    def _peek_accession(self) -> int:
        return self._next_accession

    def _commit_accession(self, next_number: int) -> None:
        self._next_accession = next_number


class FileStore(BaseStore):
    """Embedded file-backed store: one canonical JSON document per entity."""

    def __init__(self, root: str | Path, registry: UnitRegistry | None = None):
        super().__init__(registry)
        self.root = Path(root)
        self._records_dir = self.root / "records"
        self._envelopes_dir = self.root / "envelopes"
        self._meta_dir = self.root / "meta"
        for directory in (self._records_dir, self._envelopes_dir, self._meta_dir):
            directory.mkdir(parents=True, exist_ok=True)
        self.blobs = FileBlobStore(self.root / "blobs")

    @property
    def releases_dir(self) -> Path:
        return self.root / "releases"

    def _read_record_doc(self, record_id: str) -> dict | None:
        path = self._records_dir / f"{record_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def _write_record_doc(self, record_id: str, doc: dict) -> None:
        _write_atomic(
            self._records_dir / f"{record_id}.json",
            canonical_json(doc).encode("utf-8"),
        )

    def record_ids(self) -> list[str]:
        return sorted(p.stem for p in self._records_dir.glob("*.json"))

    def _read_envelope_doc(self, envelope_id: str) -> dict | None:
        path = self._envelopes_dir / f"{envelope_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def _write_envelope_doc(self, envelope_id: str, doc: dict) -> None:
        _write_atomic(
            self._envelopes_dir / f"{envelope_id}.json",
            canonical_json(doc).encode("utf-8"),
        )

    def envelope_ids(self) -> list[str]:
        return sorted(p.stem for p in self._envelopes_dir.glob("*.json"))

    def _counters_path(self) -> Path:
        return self._meta_dir / "counters.json"

    def _peek_accession(self) -> int:
        path = self._counters_path()
        if not path.exists():
            return 1
        return int(json.loads(path.read_text("utf-8"))["next_accession"])

    def _commit_accession(self, next_number: int) -> None:
        _write_atomic(
            self._counters_path(),
            canonical_json({"next_accession": next_number}).encode("utf-8"),
        )


def write_deterministic_zip(
    target: io.BytesIO | str | Path, entries: list[tuple[str, bytes]]
) -> None:
    """Write a zip whose bytes depend only on entry names and contents."""
    ordered = sorted(entries, key=lambda item: item[0])
    names = [name for name, _ in ordered]
    if len(set(names)) != len(names):
        raise IoFailure("duplicate entry names in archive")
    with zipfile.ZipFile(target, "w", compression=zipfile.ZIP_DEFLATED) as archive:
        for name, payload in ordered:
            info = zipfile.ZipInfo(filename=name, date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            archive.writestr(info, payload)


def store_record_payload(record: ExperimentRecord) -> bytes:
    return canonical_json(record_to_doc(record)).encode("utf-8")


AnyDoc = dict[str, Any]
