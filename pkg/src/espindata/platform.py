"""Composition root wiring store, moderation, query and release together.

Both the HTTP service and the CLI are thin clients of this facade, so the
two surfaces cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable

from .errors import EsdError
from .evvr import ValidationReport, validate_record
from .moderation import (
    Attribution,
    Decision,
    ModerationService,
    ModerationState,
    SubmissionEnvelope,
)
from .query import QueryEngine
from .records import ExperimentRecord, record_from_doc
from .release import ReleaseManager
from .store import BaseStore, FileStore, MemoryStore
from .units import UnitRegistry, default_registry

BATCH_IDENTITY = "batch-import"


@dataclass
class ImportSummary:
    accepted: list[str] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def accepted_count(self) -> int:
        return len(self.accepted)

    @property
    def failed_count(self) -> int:
        return len(self.failures)


class Platform:
    """A running instance of the curation platform over one data directory."""

    def __init__(
        self,
        data_dir: str | Path | None = None,
        store: BaseStore | None = None,
        registry: UnitRegistry | None = None,
        clock: Callable[[], datetime] | None = None,
    ):
        if store is None:
            store = FileStore(data_dir) if data_dir is not None else MemoryStore()
        self.store = store
        self.registry = registry or default_registry()
        self.moderation = ModerationService(store, self.registry, clock)
        self.query = QueryEngine(store, self.registry)
        self.releases = ReleaseManager(store, self.registry)

    # -- document-level conveniences ------------------------------------

    def parse_record(self, doc: dict) -> ExperimentRecord:
        return record_from_doc(doc)

    def validate_doc(self, doc: dict) -> ValidationReport:
        return validate_record(self.parse_record(doc), self.registry)

    def submit_doc(
        self, doc: dict, attribution: Attribution, identity: str | None = None
    ) -> SubmissionEnvelope:
        """Submit and immediately run automated validation."""
        record = self.parse_record(doc)
        envelope = self.moderation.submit(record, attribution, identity)
        return self.moderation.auto_validate(envelope.envelope_id)

    def revise_doc(
        self, envelope_id: str, doc: dict, identity: str = "contributor"
    ) -> SubmissionEnvelope:
        record = self.parse_record(doc)
        self.moderation.revise_and_resubmit(envelope_id, record, identity)
        return self.moderation.auto_validate(envelope_id)

    def import_batch(
        self,
        docs: Iterable[dict],
        attribution: Attribution | None = None,
    ) -> ImportSummary:
        """Trusted batch import: automated validation always runs, expert
        review is performed by the system actor.  Records that fail the rule
        catalog stay flagged and are reported as failures."""
        fallback = attribution or Attribution(BATCH_IDENTITY, "batch@localhost")
        summary = ImportSummary()
        for index, doc in enumerate(docs):
            try:
                record = self.parse_record(doc)
                envelope = self.moderation.submit(record, fallback, BATCH_IDENTITY)
                envelope = self.moderation.auto_validate(envelope.envelope_id)
                if envelope.state is not ModerationState.AUTO_VALIDATED:
                    report = envelope.validation
                    rules = (
                        ",".join(sorted({v.rule_id for v in report.violations}))
                        if report
                        else "unknown"
                    )
                    summary.failures.append((index, f"validation failed: {rules}"))
                    continue
                self.moderation.start_review(envelope.envelope_id, BATCH_IDENTITY)
                envelope = self.moderation.decide(
                    envelope.envelope_id,
                    Decision.ACCEPT,
                    BATCH_IDENTITY,
                    reason="trusted batch import",
                )
                summary.accepted.append(envelope.record.record_id)
            except EsdError as exc:
                summary.failures.append((index, f"{exc.code}: {exc.message}"))
        return summary
