"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Criterion 9 is conditional on the published dataset being present
(``ESD_PUBLISHED_DATASET`` environment variable) and is skipped otherwise.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import re
import time

import pytest
from fastapi.testclient import TestClient

from espindata import emcv, fixtures
from espindata.errors import (
    DuplicateDefect,
    EmptySelection,
    InvalidNumber,
    MalformedDescriptor,
    UnknownTerm,
)
from espindata.evvr import check_p_rules, check_s_rules
from espindata.moderation import (
    ACTIONS,
    TRANSITIONS,
    ModerationState,
)
from espindata.platform import Platform
from espindata.query import FilterSpec
from espindata.records import normalize_record, record_from_doc
from espindata.service import create_app
from espindata.store import MemoryStore

from conftest import make_golden_doc
from oracle import field_value, naive_filter, numpy_summary, random_filter_spec
from test_evvr import REQUIRED_ELEMENT_DELETERS


def _report(number: int, name: str) -> None:
    print(f"ACCEPTANCE {number} ({name}): PASS")


# -- criterion 1: EMCV round-trip ------------------------------------------------

TABLE4 = {
    "shape": ("Cylinder", "Ribbon", "Hollow", "Double Hollow", "Helical"),
    "topography": ("Random", "Aligned", "Networked"),
    "composition": (
        "Single Material",
        "Core-Sheath",
        "Side-by-Side",
        "Pie-Wedge",
        "Island-in-Sea",
        "Nanoparticles",
        "Nanorods",
    ),
    "texture": ("Smooth", "Rough", "Porous", "Granular"),
    "defects": ("Bead", "Bead-on-String", "Fusion", "Breakage", "Wrinkle"),
}


def _random_descriptor(rng: random.Random) -> emcv.MorphologyDescriptor:
    def maybe(axis):
        return rng.choice(TABLE4[axis]) if rng.random() < 0.7 else None

    size = None
    if rng.random() < 0.7:
        size = rng.uniform(1e-6, 5000.0)
        if rng.random() < 0.4:
            size = float(int(size) + 1)
    variation = None
    if rng.random() < 0.6:
        variation = rng.uniform(0.0, 200.0)
        if rng.random() < 0.4:
            variation = float(int(variation))
    defects = frozenset(
        rng.sample(TABLE4["defects"], k=rng.choice((0, 0, 0, 1, 1, 2, 3)))
    )
    return emcv.MorphologyDescriptor(
        shape=maybe("shape"),
        topography=maybe("topography"),
        size_nm=size,
        size_variation_pct=variation,
        composition=maybe("composition"),
        texture=maybe("texture"),
        defects=defects,
    )


def test_criterion_1_emcv_round_trip():
    rng = random.Random(20260811)
    descriptors = [_random_descriptor(rng) for _ in range(10_000)]
    start = time.perf_counter()
    for descriptor in descriptors:
        assert emcv.parse_descriptor(emcv.serialize_descriptor(descriptor)) == descriptor
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"round-trip of 10,000 descriptors took {elapsed:.2f}s"
    _report(1, "EMCV round-trip")


# -- criterion 2: EMCV grammar conformance ------------------------------------------

_PLAIN_NUMBER = re.compile(r"^-?\d+(\.\d+)?$")


def reference_classify(text: str) -> str:
    """Independent grammar classifier mirroring the normative grammar."""
    fields = [f.strip() for f in text.split("|")]
    if len(fields) != 7:
        return "malformed"
    for index, axis in ((0, "shape"), (1, "topography")):
        if fields[index] != "-" and fields[index] not in TABLE4[axis]:
            return "unknown_term"
        if index == 1:
            for size_index, exclusive in ((2, True), (3, False)):
                token = fields[size_index]
                if token == "-":
                    continue
                if not _PLAIN_NUMBER.match(token):
                    return "invalid_number"
                value = float(token)
                if (exclusive and value <= 0) or (not exclusive and value < 0):
                    return "invalid_number"
    for index, axis in ((4, "composition"), (5, "texture")):
        if fields[index] != "-" and fields[index] not in TABLE4[axis]:
            return "unknown_term"
    if fields[6] != "-":
        seen = set()
        for token in (t.strip() for t in fields[6].split(",")):
            if token not in TABLE4["defects"]:
                return "unknown_term"
            if token in seen:
                return "duplicate_defect"
            seen.add(token)
    return "ok"


def parser_classify(text: str) -> str:
    try:
        emcv.parse_descriptor(text)
        return "ok"
    except MalformedDescriptor:
        return "malformed"
    except UnknownTerm:
        return "unknown_term"
    except InvalidNumber:
        return "invalid_number"
    except DuplicateDefect:
        return "duplicate_defect"


_BAD_TOKENS = ("Sphere", "cylinder", "SMOOTH", "Twisted", "Zigzag", "Beadz", "core-sheath", "")
_BAD_NUMBERS = ("abc", "1e3", "-5", "12.", ".5", "NaN", "--", "1_000")


def _fuzz_corpus(rng: random.Random, count: int) -> list[tuple[str, str | None]]:
    """(text, forced_expected) pairs; forced_expected pins unambiguous mutations."""
    cases: list[tuple[str, str | None]] = []
    while len(cases) < count:
        base = emcv.serialize_descriptor(_random_descriptor(rng)).split("|")
        roll = rng.random()
        if roll < 0.3:
            text = "|".join(base)
            if rng.random() < 0.3:
                text = " " + text.replace("|", " | ") + " "
            cases.append((text, "ok"))
        elif roll < 0.5:
            # field-count mutation: always malformed
            mutated = list(base)
            if rng.random() < 0.5:
                mutated.pop(rng.randrange(len(mutated)))
            else:
                mutated.insert(rng.randrange(len(mutated) + 1), rng.choice(("-", "Bead")))
            cases.append(("|".join(mutated), "malformed"))
        elif roll < 0.75:
            # non-Table-4 token in a categorical field: always unknown_term
            mutated = list(base)
            mutated[rng.choice((0, 1, 4, 5))] = rng.choice(_BAD_TOKENS[:-1])
            cases.append(("|".join(mutated), "unknown_term"))
        elif roll < 0.9:
            mutated = list(base)
            mutated[rng.choice((2, 3))] = rng.choice(_BAD_NUMBERS)
            cases.append(("|".join(mutated), None))  # class depends on token
        else:
            mutated = list(base)
            defect = rng.choice(TABLE4["defects"])
            mutated[6] = f"{defect},{defect}"
            cases.append(("|".join(mutated), "duplicate_defect"))
    return cases


def test_criterion_2_emcv_grammar_conformance():
    literal_ok = (
        "-|-|-|-|-|-|-",
        "Cylinder|Random|250|12|Single Material|Smooth|Bead,Wrinkle",
    )
    for text in literal_ok:
        assert parser_classify(text) == "ok"

    rng = random.Random(31416)
    corpus = _fuzz_corpus(rng, 1000)
    mismatches = []
    for text, forced in corpus:
        expected = reference_classify(text)
        if forced is not None:
            assert expected == forced, f"generator and reference disagree on {text!r}"
        actual = parser_classify(text)
        if actual != expected:
            mismatches.append((text, expected, actual))
    assert not mismatches, f"{len(mismatches)} misclassified, first: {mismatches[:3]}"
    _report(2, "EMCV grammar conformance")


# -- criterion 3: P-rule boundary suite ---------------------------------------------

EPS = 1e-9


def _p_fires(doc, rule_id: str) -> bool:
    return rule_id in {v.rule_id for v in check_p_rules(record_from_doc(doc))}


def test_criterion_3_p_rule_boundaries():
    cases = [
        ("ambient", "temperature", "°C", -50.0 - EPS, "P-TEMP", True),
        ("ambient", "temperature", "°C", -50.0, "P-TEMP", False),
        ("ambient", "temperature", "°C", 200.0, "P-TEMP", False),
        ("ambient", "temperature", "°C", 200.0 + EPS, "P-TEMP", True),
        ("ambient", "humidity", "%RH", -EPS, "P-HUM", True),
        ("ambient", "humidity", "%RH", 0.0, "P-HUM", False),
        ("ambient", "humidity", "%RH", 100.0, "P-HUM", False),
        ("ambient", "humidity", "%RH", 100.0 + EPS, "P-HUM", True),
        ("process", "voltage", "kV", 0.0, "P-VOLT", True),
        ("process", "voltage", "kV", EPS, "P-VOLT", False),
        ("process", "voltage", "kV", -EPS, "P-VOLT", False),
        ("process", "flow_rate", "mL/h", 0.0, "P-FLOW", True),
        ("process", "flow_rate", "mL/h", EPS, "P-FLOW", False),
        ("fiber", "fiber_diameter", "nm", 0.0, "P-DIAM", True),
    ]
    for group, field_name, unit, value, rule_id, fires in cases:
        doc = make_golden_doc()
        doc[group][field_name] = {"value": value, "unit": unit}
        assert _p_fires(doc, rule_id) is fires, (
            f"{rule_id} with {field_name}={value!r}: expected fires={fires}"
        )
    _report(3, "P-rule boundary suite")


# -- criterion 4: S-rule completeness -----------------------------------------------

def test_criterion_4_s_rule_completeness():
    golden = make_golden_doc()
    assert check_s_rules(record_from_doc(golden)) == []

    for element, deleter in REQUIRED_ELEMENT_DELETERS.items():
        doc = make_golden_doc()
        deleter(doc)
        s01 = [
            v.field_path
            for v in check_s_rules(record_from_doc(doc))
            if v.rule_id == "S-01"
        ]
        assert s01 == [element], f"deleting {element}: S-01 fired {s01}"
    assert len(REQUIRED_ELEMENT_DELETERS) == 10

    doc = make_golden_doc()
    doc["provenance"]["contributor_name"] = None
    doc["provenance"]["contributor_contact"] = None
    violations = check_s_rules(record_from_doc(doc))
    assert [v.rule_id for v in violations] == ["S-02"]
    _report(4, "S-rule completeness")


# -- criterion 5: moderation state machine -------------------------------------------

def test_criterion_5_moderation_state_machine():
    # (a) the transition table is exactly the specified lifecycle
    expected_allowed = {
        ("submit", "draft"),
        ("auto_validate", "submitted"),
        ("resubmit", "flagged"),
        ("resubmit", "rejected"),
        ("start_review", "auto_validated"),
        ("accept", "under_review"),
        ("reject", "under_review"),
    }
    for action in ACTIONS:
        for state in ModerationState:
            allowed = (action, state.value) in expected_allowed
            assert (state in TRANSITIONS.get(action, {})) is allowed

    # (b) every path draft -> accepted passes both validation stages
    edges: dict[ModerationState, set[ModerationState]] = {}
    for by_state in TRANSITIONS.values():
        for source, targets in by_state.items():
            edges.setdefault(source, set()).update(targets)
    paths: list[list[ModerationState]] = []

    def walk(state, path):
        if state is ModerationState.ACCEPTED:
            paths.append(path)
            return
        for target in sorted(edges.get(state, ()), key=lambda s: s.value):
            if target not in path:
                walk(target, path + [target])

    walk(ModerationState.DRAFT, [ModerationState.DRAFT])
    assert paths
    for path in paths:
        assert ModerationState.AUTO_VALIDATED in path
        assert ModerationState.UNDER_REVIEW in path
    assert ModerationState.ACCEPTED not in edges  # terminal

    # (c) operational check: every (state, service action) pair behaves per table
    from espindata.errors import IllegalTransition, MissingReason
    from espindata.moderation import Attribution

    platform = Platform(store=MemoryStore())
    golden = record_from_doc(make_golden_doc())

    def envelope_in(state: ModerationState) -> str:
        envelope = platform.moderation.submit(
            golden, Attribution("checker", "c@example.org")
        )
        doc = envelope.to_doc()
        doc["state"] = state.value
        platform.store.put_envelope_doc(envelope.envelope_id, doc)
        return envelope.envelope_id

    service_actions = {
        "auto_validate": lambda eid: platform.moderation.auto_validate(eid),
        "resubmit": lambda eid: platform.moderation.revise_and_resubmit(eid, golden),
        "start_review": lambda eid: platform.moderation.start_review(eid, "mod"),
        "accept": lambda eid: platform.moderation.decide(eid, "accept", "mod"),
        "reject": lambda eid: platform.moderation.decide(eid, "reject", "mod", reason="r"),
    }
    for action, runner in service_actions.items():
        for state in ModerationState:
            envelope_id = envelope_in(state)
            allowed = state in TRANSITIONS.get(action, {})
            if allowed:
                runner(envelope_id)
            else:
                with pytest.raises(IllegalTransition):
                    runner(envelope_id)

    # rejecting without a reason always fails, even from under_review
    envelope_id = envelope_in(ModerationState.UNDER_REVIEW)
    with pytest.raises(MissingReason):
        platform.moderation.decide(envelope_id, "reject", "mod")
    _report(5, "moderation state machine")


# -- criterion 6: query oracle equivalence --------------------------------------------

def test_criterion_6_query_oracle_equivalence():
    start = time.perf_counter()
    platform = Platform(store=MemoryStore())
    docs = fixtures.generate_corpus(10_000, seed=616, blob_put=platform.store.blobs.put)
    for doc in docs:
        platform.store.accession_and_put(
            normalize_record(record_from_doc(doc), platform.registry)
        )
    records = list(platform.store.iter_records())
    assert len(records) == 10_000

    rng = random.Random(606)
    summary_fields = ["voltage", "flow_rate", "concentration", "tip_collector_distance"]
    nonempty = 0
    for _ in range(200):
        spec = random_filter_spec(rng)
        engine_ids = platform.query.execute_filter(spec)
        oracle_ids = naive_filter(records, spec, platform.registry)
        assert engine_ids == oracle_ids
        if not engine_ids:
            continue
        nonempty += 1
        try:
            stats = platform.query.summarize(engine_ids, summary_fields)
        except EmptySelection:
            continue
        by_id = {r.record_id: r for r in records}
        for key in summary_fields:
            values = [
                v
                for rid in oracle_ids
                if (v := field_value(by_id[rid], key, platform.registry)) is not None
            ]
            summary = stats.fields[key]
            assert summary.n == len(values)
            if not values:
                continue
            expected = numpy_summary(values)
            for stat_name in ("median", "q1", "q3"):
                assert math.isclose(
                    getattr(summary, stat_name), expected[stat_name], rel_tol=1e-12
                )
    elapsed = time.perf_counter() - start
    assert nonempty >= 50, "spec generator produced too few non-empty results"
    assert elapsed < 60.0, f"criterion took {elapsed:.1f}s"
    _report(6, "query oracle equivalence")


# -- criterion 7: release determinism ---------------------------------------------------

def test_criterion_7_release_determinism(tmp_path):
    def build(root):
        platform = Platform(data_dir=root)
        docs = fixtures.generate_corpus(200, seed=77, blob_put=platform.store.blobs.put)
        summary = platform.import_batch(docs)
        assert summary.failed_count == 0
        return platform

    # two independent runs over an identical record set
    a = build(tmp_path / "run-a")
    b = build(tmp_path / "run-b")
    manifest_a = a.releases.cut_release()
    manifest_b = b.releases.cut_release()
    dataset_a = a.releases.fetch_release("v1", "dataset")
    dataset_b = b.releases.fetch_release("v1", "dataset")
    assert dataset_a == dataset_b
    assert manifest_a.dataset_digest == manifest_b.dataset_digest
    assert manifest_a.images_digest == manifest_b.images_digest

    # a forced second cut in the same store is also byte-identical
    manifest_a2 = a.releases.cut_release(force=True)
    assert manifest_a2.dataset_digest == manifest_a.dataset_digest
    assert a.releases.fetch_release("v2", "dataset") == dataset_a

    rows = dataset_a.decode("utf-8").splitlines()
    assert manifest_a.record_count == len(rows) - 1 == 200
    _report(7, "release determinism")


# -- criterion 8: end-to-end pipeline ----------------------------------------------------

def test_criterion_8_end_to_end_pipeline(tmp_path, monkeypatch):
    platform = Platform(data_dir=tmp_path / "data")
    docs = fixtures.generate_corpus(1000, seed=88, blob_put=platform.store.blobs.put)
    summary = platform.import_batch(docs)
    assert summary.failed_count == 0, f"failures: {summary.failures[:5]}"
    assert summary.accepted_count == 1000

    manifest = platform.releases.cut_release()
    assert manifest.label == "v1"
    assert manifest.record_count == 1000

    client = TestClient(create_app(platform))

    # detach the store from disk reads: artifacts must come from the cache
    (tmp_path / "data" / "records").rename(tmp_path / "data" / "records.detached")

    def forbidden(*args, **kwargs):
        raise AssertionError("store read while serving a release artifact")

    monkeypatch.setattr(platform.store, "_read_record_doc", forbidden)
    monkeypatch.setattr(platform.store, "_read_envelope_doc", forbidden)
    monkeypatch.setattr(platform.store.blobs, "get", forbidden)

    response = client.get("/api/v1/releases/v1/dataset")
    assert response.status_code == 200
    digest = "sha256:" + hashlib.sha256(response.content).hexdigest()
    assert digest == manifest.dataset_digest

    listed = client.get("/api/v1/releases").json()
    assert listed[0]["record_count"] == 1000
    _report(8, "end-to-end pipeline")


# -- criterion 9 (conditional): published-dataset reproduction ------------------------------

def test_criterion_9_published_dataset_reproduction(tmp_path):
    dataset_path = os.environ.get("ESD_PUBLISHED_DATASET")
    if not dataset_path or not os.path.exists(dataset_path):
        pytest.skip("published v1 dataset not available (set ESD_PUBLISHED_DATASET)")

    platform = Platform(data_dir=tmp_path / "data")
    docs = json.loads(open(dataset_path, encoding="utf-8").read())
    summary = platform.import_batch(docs)
    assert summary.accepted_count == 809

    base = dict(
        solvent_ids=frozenset({"water"}),
        needle_class="single_needle",
        collector_class="flat_plate",
        ranges={"fiber_diameter": (180.0, 380.0)},
    )
    results = {}
    for exclusive in (False, True):
        spec = FilterSpec(
            polymer_ids=frozenset({"PVA"}), exclusive_polymers=exclusive, **base
        )
        ids = platform.query.execute_filter(spec)
        results["exclusive" if exclusive else "inclusive"] = ids
    matching = [mode for mode, ids in results.items() if len(ids) == 108]
    assert matching, f"neither mode returned 108 records: { {m: len(i) for m, i in results.items()} }"
    mode = matching[0]
    print(f"criterion 9: polymer matching mode reproducing n=108: {mode}")

    stats = platform.query.summarize(
        results[mode],
        ["voltage", "flow_rate", "concentration", "tip_collector_distance"],
    )
    expected = {
        "voltage": 20.0,
        "flow_rate": 0.30,
        "concentration": 10.0,
        "tip_collector_distance": 15.0,
    }
    for key, value in expected.items():
        assert abs(stats.fields[key].median - value) <= math.ulp(value)
    _report(9, "published-dataset reproduction")
