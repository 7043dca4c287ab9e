"""Two-stage submission lifecycle: automated validation then expert review.

The lifecycle is an explicit state machine with an append-only audit
trail.  Every transition goes through one table, so the reachable graph
can be model-checked exhaustively.  Envelope mutation is serialized
through a single lock, which makes the review claim an atomic
compare-and-set: two moderators can never claim the same envelope.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable

from .errors import IllegalTransition, MalformedRecord, MissingAttribution, MissingReason
from .evvr import ValidationReport, validate_record
from .records import ExperimentRecord, normalize_record, record_from_doc, record_to_doc
from .store import BaseStore
from .units import UnitRegistry, default_registry


class ModerationState(str, Enum):
    DRAFT = "draft"
    SUBMITTED = "submitted"
    AUTO_VALIDATED = "auto_validated"
    FLAGGED = "flagged"
    UNDER_REVIEW = "under_review"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class ActorRole(str, Enum):
    SYSTEM = "system"
    CONTRIBUTOR = "contributor"
    MODERATOR = "moderator"


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


# action -> {from_state: (allowed_to_states, ...)}.  accepted is terminal.
TRANSITIONS: dict[str, dict[ModerationState, tuple[ModerationState, ...]]] = {
    "submit": {ModerationState.DRAFT: (ModerationState.SUBMITTED,)},
    "auto_validate": {
        ModerationState.SUBMITTED: (
            ModerationState.AUTO_VALIDATED,
            ModerationState.FLAGGED,
        )
    },
    "resubmit": {
        ModerationState.FLAGGED: (ModerationState.SUBMITTED,),
        ModerationState.REJECTED: (ModerationState.SUBMITTED,),
    },
    "start_review": {ModerationState.AUTO_VALIDATED: (ModerationState.UNDER_REVIEW,)},
    "accept": {ModerationState.UNDER_REVIEW: (ModerationState.ACCEPTED,)},
    "reject": {ModerationState.UNDER_REVIEW: (ModerationState.REJECTED,)},
}

ACTIONS = tuple(TRANSITIONS)


@dataclass(frozen=True)
class AuditEvent:
    actor: ActorRole
    identity: str
    action: str
    reason: str | None
    at: str

    def to_doc(self) -> dict:
        return {
            "actor": self.actor.value,
            "identity": self.identity,
            "action": self.action,
            "reason": self.reason,
            "at": self.at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "AuditEvent":
        return cls(
            actor=ActorRole(doc["actor"]),
            identity=doc["identity"],
            action=doc["action"],
            reason=doc.get("reason"),
            at=doc["at"],
        )


@dataclass(frozen=True)
class Attribution:
    name: str
    contact: str

    def __post_init__(self):
        if not self.name or not self.name.strip() or not self.contact or not self.contact.strip():
            raise MissingAttribution("attribution requires a contributor name and contact")
        object.__setattr__(self, "name", self.name.strip())
        object.__setattr__(self, "contact", self.contact.strip())


@dataclass(frozen=True)
class SubmissionEnvelope:
    envelope_id: str
    record: ExperimentRecord
    state: ModerationState
    validation: ValidationReport | None = None
    validation_history: tuple[ValidationReport, ...] = ()
    decisions: tuple[AuditEvent, ...] = ()
    created_at: str = ""
    updated_at: str = ""

    def to_doc(self) -> dict:
        return {
            "envelope_id": self.envelope_id,
            "state": self.state.value,
            "record": record_to_doc(self.record),
            "validation": self.validation.to_doc() if self.validation else None,
            "validation_history": [r.to_doc() for r in self.validation_history],
            "decisions": [e.to_doc() for e in self.decisions],
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SubmissionEnvelope":
        return cls(
            envelope_id=doc["envelope_id"],
            record=record_from_doc(doc["record"]),
            state=ModerationState(doc["state"]),
            validation=ValidationReport.from_doc(doc["validation"]) if doc.get("validation") else None,
            validation_history=tuple(
                ValidationReport.from_doc(r) for r in doc.get("validation_history", ())
            ),
            decisions=tuple(AuditEvent.from_doc(e) for e in doc.get("decisions", ())),
            created_at=doc.get("created_at", ""),
            updated_at=doc.get("updated_at", ""),
        )


class ModerationService:
    """Drives envelopes through the lifecycle and persists every step."""

    def __init__(
        self,
        store: BaseStore,
        registry: UnitRegistry | None = None,
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.registry = registry or default_registry()
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._lock = threading.RLock()

    # -- helpers --------------------------------------------------------

    def _now(self) -> str:
        return self._clock().isoformat()

    def _load(self, envelope_id: str) -> SubmissionEnvelope:
        return SubmissionEnvelope.from_doc(self.store.get_envelope_doc(envelope_id))

    def _persist(self, envelope: SubmissionEnvelope) -> SubmissionEnvelope:
        self.store.put_envelope_doc(envelope.envelope_id, envelope.to_doc())
        return envelope

    def _transition(
        self,
        envelope: SubmissionEnvelope,
        action: str,
        to_state: ModerationState,
        actor: ActorRole,
        identity: str,
        reason: str | None = None,
    ) -> SubmissionEnvelope:
        allowed = TRANSITIONS.get(action, {}).get(envelope.state)
        if allowed is None or to_state not in allowed:
            raise IllegalTransition(
                f"action {action!r} is not allowed from state {envelope.state.value!r}"
            )
        at = self._now()
        event = AuditEvent(actor=actor, identity=identity, action=action, reason=reason, at=at)
        return replace(
            envelope,
            state=to_state,
            decisions=envelope.decisions + (event,),
            updated_at=at,
        )

    # -- lifecycle operations -------------------------------------------

    def submit(
        self,
        record: ExperimentRecord,
        attribution: Attribution,
        identity: str | None = None,
    ) -> SubmissionEnvelope:
        """Create an envelope for a new submission; state becomes ``submitted``."""
        if not isinstance(record, ExperimentRecord):
            raise MalformedRecord("submit expects a structurally well-formed record")
        if not isinstance(attribution, Attribution):
            raise MissingAttribution("attribution is required at submission")
        record = _with_attribution(record, attribution)
        now = self._now()
        envelope = SubmissionEnvelope(
            envelope_id="env-" + uuid.uuid4().hex,
            record=record,
            state=ModerationState.DRAFT,
            created_at=now,
            updated_at=now,
        )
        envelope = self._transition(
            envelope,
            "submit",
            ModerationState.SUBMITTED,
            ActorRole.CONTRIBUTOR,
            identity or attribution.name,
        )
        with self._lock:
            return self._persist(envelope)

    def auto_validate(self, envelope_id: str) -> SubmissionEnvelope:
        """Run the rule catalog; passes go to ``auto_validated``, else ``flagged``."""
        with self._lock:
            envelope = self._load(envelope_id)
            if envelope.state is not ModerationState.SUBMITTED:
                raise IllegalTransition(
                    f"auto_validate requires state 'submitted', found {envelope.state.value!r}"
                )
            report = validate_record(
                envelope.record, self.registry, record_ref=envelope.envelope_id
            )
            to_state = (
                ModerationState.AUTO_VALIDATED if report.passed else ModerationState.FLAGGED
            )
            envelope = self._transition(
                envelope,
                "auto_validate",
                to_state,
                ActorRole.SYSTEM,
                "evvr",
                reason=None if report.passed else f"{len(report.violations)} violation(s)",
            )
            envelope = replace(envelope, validation=report)
            return self._persist(envelope)

    def revise_and_resubmit(
        self,
        envelope_id: str,
        new_record: ExperimentRecord,
        identity: str = "contributor",
    ) -> SubmissionEnvelope:
        """Replace the record of a flagged/rejected envelope and resubmit it."""
        if not isinstance(new_record, ExperimentRecord):
            raise MalformedRecord("revision expects a structurally well-formed record")
        with self._lock:
            envelope = self._load(envelope_id)
            envelope = self._transition(
                envelope, "resubmit", ModerationState.SUBMITTED, ActorRole.CONTRIBUTOR, identity
            )
            history = envelope.validation_history
            if envelope.validation is not None:
                history = history + (envelope.validation,)
            envelope = replace(
                envelope, record=new_record, validation=None, validation_history=history
            )
            return self._persist(envelope)

    def start_review(self, envelope_id: str, moderator: str) -> SubmissionEnvelope:
        """Atomically claim an auto-validated envelope for review."""
        with self._lock:
            envelope = self._load(envelope_id)
            envelope = self._transition(
                envelope, "start_review", ModerationState.UNDER_REVIEW, ActorRole.MODERATOR, moderator
            )
            return self._persist(envelope)

    def decide(
        self,
        envelope_id: str,
        decision: Decision | str,
        moderator: str,
        reason: str | None = None,
    ) -> SubmissionEnvelope:
        """Accept (accession + durable storage) or reject with mandatory reason."""
        decision = Decision(decision)
        with self._lock:
            envelope = self._load(envelope_id)
            if decision is Decision.REJECT:
                if not reason or not reason.strip():
                    raise MissingReason("rejection requires an explicit reason")
                envelope = self._transition(
                    envelope, "reject", ModerationState.REJECTED, ActorRole.MODERATOR,
                    moderator, reason=reason.strip(),
                )
                return self._persist(envelope)

            envelope = self._transition(
                envelope, "accept", ModerationState.ACCEPTED, ActorRole.MODERATOR,
                moderator, reason=reason,
            )
            stored = self.store.accession_and_put(
                normalize_record(envelope.record, self.registry)
            )
            envelope = replace(envelope, record=stored)
            return self._persist(envelope)

    # -- queue ----------------------------------------------------------

    def get(self, envelope_id: str) -> SubmissionEnvelope:
        return self._load(envelope_id)

    def queue(
        self, states: Iterable[ModerationState | str] | None = None
    ) -> list[SubmissionEnvelope]:
        """Envelopes ordered by submission time; defaults to the review queue."""
        if states is None:
            wanted = {ModerationState.AUTO_VALIDATED, ModerationState.UNDER_REVIEW}
        else:
            wanted = {ModerationState(s) for s in states}
        envelopes = [
            SubmissionEnvelope.from_doc(doc)
            for doc in self.store.iter_envelope_docs()
        ]
        selected = [e for e in envelopes if e.state in wanted]
        selected.sort(key=lambda e: (e.created_at, e.envelope_id))
        return selected


def _with_attribution(record: ExperimentRecord, attribution: Attribution) -> ExperimentRecord:
    provenance = record.provenance
    if provenance.has_attribution:
        return record
    return replace(
        record,
        provenance=replace(
            provenance,
            contributor_name=provenance.contributor_name or attribution.name,
            contributor_contact=provenance.contributor_contact or attribution.contact,
        ),
    )
