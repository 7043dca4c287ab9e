from __future__ import annotations

import threading

import pytest

from espindata.errors import (
    IllegalTransition,
    MissingAttribution,
    MissingReason,
)
from espindata.moderation import (
    ACTIONS,
    TRANSITIONS,
    Attribution,
    Decision,
    ModerationState,
    SubmissionEnvelope,
)
from espindata.records import record_from_doc


def _submit(platform, golden_doc, attribution):
    record = record_from_doc(golden_doc)
    return platform.moderation.submit(record, attribution)


def test_submit_creates_submitted_envelope(platform_mem, golden_doc, attribution):
    envelope = _submit(platform_mem, golden_doc, attribution)
    assert envelope.state is ModerationState.SUBMITTED
    assert envelope.decisions[-1].action == "submit"
    assert envelope.created_at <= envelope.updated_at


def test_submit_without_attribution_fails(platform_mem, golden_record):
    with pytest.raises(MissingAttribution):
        platform_mem.moderation.submit(golden_record, None)
    with pytest.raises(MissingAttribution):
        Attribution("", "")


def test_duplicate_submissions_get_distinct_envelopes(platform_mem, golden_doc, attribution):
    first = _submit(platform_mem, golden_doc, attribution)
    second = _submit(platform_mem, golden_doc, attribution)
    assert first.envelope_id != second.envelope_id


def test_auto_validate_pass(platform_mem, golden_doc, attribution):
    envelope = _submit(platform_mem, golden_doc, attribution)
    envelope = platform_mem.moderation.auto_validate(envelope.envelope_id)
    assert envelope.state is ModerationState.AUTO_VALIDATED
    assert envelope.validation.passed


def test_auto_validate_flags_violations(platform_mem, golden_doc, attribution):
    golden_doc["ambient"]["humidity"] = {"value": 150.0, "unit": "%RH"}
    envelope = _submit(platform_mem, golden_doc, attribution)
    envelope = platform_mem.moderation.auto_validate(envelope.envelope_id)
    assert envelope.state is ModerationState.FLAGGED
    assert [v.rule_id for v in envelope.validation.violations] == ["P-HUM"]


def test_auto_validate_wrong_state(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    with pytest.raises(IllegalTransition):
        platform_mem.moderation.auto_validate(envelope.envelope_id)


def test_flagged_revision_cycle(platform_mem, golden_doc, attribution):
    golden_doc["ambient"]["humidity"] = {"value": 150.0, "unit": "%RH"}
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    assert envelope.state is ModerationState.FLAGGED

    golden_doc["ambient"]["humidity"] = {"value": 45.0, "unit": "%RH"}
    envelope = platform_mem.revise_doc(envelope.envelope_id, golden_doc)
    assert envelope.state is ModerationState.AUTO_VALIDATED
    # the prior report is retained in history
    assert len(envelope.validation_history) == 1
    assert not envelope.validation_history[0].passed


def test_resubmit_requires_flagged_or_rejected(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)  # auto_validated
    platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    with pytest.raises(IllegalTransition):
        platform_mem.revise_doc(envelope.envelope_id, golden_doc)


def test_accept_assigns_dense_accessions(platform_mem, golden_doc, attribution):
    ids = []
    for _ in range(3):
        envelope = platform_mem.submit_doc(golden_doc, attribution)
        platform_mem.moderation.start_review(envelope.envelope_id, "mod")
        envelope = platform_mem.moderation.decide(envelope.envelope_id, "accept", "mod")
        assert envelope.state is ModerationState.ACCEPTED
        ids.append(envelope.record.record_id)
    assert ids == ["ESD-000001", "ESD-000002", "ESD-000003"]
    assert platform_mem.store.record_ids() == ids


def test_reject_requires_reason(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    with pytest.raises(MissingReason):
        platform_mem.moderation.decide(envelope.envelope_id, Decision.REJECT, "mod")
    with pytest.raises(MissingReason):
        platform_mem.moderation.decide(envelope.envelope_id, "reject", "mod", reason="  ")
    envelope = platform_mem.moderation.decide(
        envelope.envelope_id, "reject", "mod", reason="implausible parameters"
    )
    assert envelope.state is ModerationState.REJECTED
    assert envelope.decisions[-1].reason == "implausible parameters"


def test_rejected_envelope_can_resubmit(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    platform_mem.moderation.decide(envelope.envelope_id, "reject", "mod", reason="needs data")
    envelope = platform_mem.revise_doc(envelope.envelope_id, golden_doc)
    assert envelope.state is ModerationState.AUTO_VALIDATED


def test_accept_on_flagged_is_illegal(platform_mem, golden_doc, attribution):
    golden_doc["process"]["voltage"] = {"value": 0.0, "unit": "kV"}
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    assert envelope.state is ModerationState.FLAGGED
    with pytest.raises(IllegalTransition):
        platform_mem.moderation.decide(envelope.envelope_id, "accept", "mod")
    with pytest.raises(IllegalTransition):
        platform_mem.moderation.start_review(envelope.envelope_id, "mod")


def test_accepted_envelope_is_terminal(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    envelope = platform_mem.moderation.decide(envelope.envelope_id, "accept", "mod")
    for action in (
        lambda: platform_mem.moderation.auto_validate(envelope.envelope_id),
        lambda: platform_mem.moderation.revise_and_resubmit(
            envelope.envelope_id, envelope.record
        ),
        lambda: platform_mem.moderation.start_review(envelope.envelope_id, "mod"),
        lambda: platform_mem.moderation.decide(envelope.envelope_id, "accept", "mod"),
        lambda: platform_mem.moderation.decide(envelope.envelope_id, "reject", "mod", reason="x"),
    ):
        with pytest.raises(IllegalTransition):
            action()


def test_concurrent_claims_exactly_one_wins(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    outcomes = []

    def claim(name):
        try:
            platform_mem.moderation.start_review(envelope.envelope_id, name)
            outcomes.append("ok")
        except IllegalTransition:
            outcomes.append("conflict")

    threads = [threading.Thread(target=claim, args=(f"mod{i}",)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(outcomes) == ["conflict", "ok"]


def test_audit_trail_monotonic(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    counts = [len(envelope.decisions)]
    envelope = platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    counts.append(len(envelope.decisions))
    envelope = platform_mem.moderation.decide(envelope.envelope_id, "accept", "mod")
    counts.append(len(envelope.decisions))
    assert counts == sorted(counts)
    stamps = [e.at for e in envelope.decisions]
    assert stamps == sorted(stamps)


def test_rejected_envelopes_carry_reasoned_event(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    platform_mem.moderation.start_review(envelope.envelope_id, "mod")
    envelope = platform_mem.moderation.decide(
        envelope.envelope_id, "reject", "mod", reason="insufficient documentation"
    )
    reasons = [e.reason for e in envelope.decisions if e.action == "reject"]
    assert reasons and all(reasons)


def test_envelope_doc_round_trip(platform_mem, golden_doc, attribution):
    envelope = platform_mem.submit_doc(golden_doc, attribution)
    loaded = SubmissionEnvelope.from_doc(envelope.to_doc())
    assert loaded == envelope


def test_transition_table_matches_specified_lifecycle():
    expected = {
        ("submit", ModerationState.DRAFT): {ModerationState.SUBMITTED},
        ("auto_validate", ModerationState.SUBMITTED): {
            ModerationState.AUTO_VALIDATED,
            ModerationState.FLAGGED,
        },
        ("resubmit", ModerationState.FLAGGED): {ModerationState.SUBMITTED},
        ("resubmit", ModerationState.REJECTED): {ModerationState.SUBMITTED},
        ("start_review", ModerationState.AUTO_VALIDATED): {ModerationState.UNDER_REVIEW},
        ("accept", ModerationState.UNDER_REVIEW): {ModerationState.ACCEPTED},
        ("reject", ModerationState.UNDER_REVIEW): {ModerationState.REJECTED},
    }
    actual = {
        (action, state): set(targets)
        for action, by_state in TRANSITIONS.items()
        for state, targets in by_state.items()
    }
    assert actual == expected
    assert set(ACTIONS) == {a for a, _ in expected}


def test_every_path_to_accepted_passes_both_stages():
    """Exhaustive simple-path enumeration over the transition graph."""
    edges: dict[ModerationState, set[ModerationState]] = {}
    for by_state in TRANSITIONS.values():
        for source, targets in by_state.items():
            edges.setdefault(source, set()).update(targets)

    paths = []

    def walk(state, path):
        if state is ModerationState.ACCEPTED:
            paths.append(path)
            return
        for target in edges.get(state, ()):
            if target not in path:
                walk(target, path + [target])

    walk(ModerationState.DRAFT, [ModerationState.DRAFT])
    assert paths, "accepted must be reachable"
    for path in paths:
        assert ModerationState.AUTO_VALIDATED in path
        assert ModerationState.UNDER_REVIEW in path
