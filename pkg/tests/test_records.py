from __future__ import annotations

import json

import pytest

from espindata import emcv
from espindata.errors import MalformedRecord
from espindata.records import (
    CompletenessProfile,
    EquipmentConfig,
    EquipmentRole,
    ExperimentRecord,
    FieldStatus,
    PolymerComponent,
    Provenance,
    SolutionProperties,
    SolventComponent,
    canonical_json,
    completeness_profile,
    record_from_doc,
    record_to_doc,
)
from espindata.units import Quantity

# Every key field named in the paper's input/outcome tables must be
# reachable from the canonical record document.
TABLE_FIELDS = [
    ("polymers", 0, "polymer_id"),
    ("polymers", 0, "polymer_weight"),
    ("polymers", 0, "weight_ratio"),
    ("solvents", 0, "solvent_id"),
    ("solvents", 0, "volume_ratio"),
    ("solvents", 0, "weight"),
    ("solution", "concentration"),
    ("solution", "viscosity"),
    ("solution", "surface_tension"),
    ("solution", "conductivity"),
    ("solution", "evaporation_rate"),
    ("solution", "ph"),
    ("process", "voltage"),
    ("process", "flow_rate"),
    ("process", "tip_collector_distance"),
    ("process", "spinning_duration"),
    ("ambient", "temperature"),
    ("ambient", "humidity"),
    ("needle", "needle_type"),
    ("needle", "needle_definition"),
    ("collector", "collector_type"),
    ("collector", "collector_definition"),
    ("fiber", "fiber_diameter"),
    ("fiber", "diameter_variation"),
    ("fiber", "is_formation_stable"),
    ("fiber", "fiber_weight"),
    ("morphology",),
    ("instabilities",),
    ("images",),
    ("derived", "mechanical"),
    ("derived", "functional"),
    ("derived", "application_type"),
    ("provenance", "doi"),
    ("provenance", "contributor_name"),
]


def _lookup(doc, path):
    value = doc
    for step in path:
        value = value[step]
    return value


def test_structural_completeness(golden_doc):
    doc = record_to_doc(record_from_doc(golden_doc))
    for path in TABLE_FIELDS:
        _lookup(doc, path)  # raises KeyError if unreachable
    mechanical_keys = ("tensile_strength", "modulus", "elongation_at_break", "fracture_behavior")
    functional_keys = (
        "surface_area",
        "porosity",
        "thermal_conductivity",
        "permeability",
        "electrical_conductivity",
        "wettability",
    )
    golden_doc["derived"]["mechanical"] = {k: None for k in mechanical_keys}
    golden_doc["derived"]["functional"] = {k: None for k in functional_keys}
    doc = record_to_doc(record_from_doc(golden_doc))
    assert set(doc["derived"]["mechanical"]) == set(mechanical_keys)
    assert set(doc["derived"]["functional"]) == set(functional_keys)


def test_doc_round_trip_is_byte_stable(golden_doc):
    record = record_from_doc(golden_doc)
    doc = record_to_doc(record)
    again = record_to_doc(record_from_doc(json.loads(canonical_json(doc))))
    assert canonical_json(doc) == canonical_json(again)
    assert record_from_doc(doc) == record


def test_component_validation():
    with pytest.raises(MalformedRecord):
        PolymerComponent(polymer_id="")
    with pytest.raises(MalformedRecord):
        PolymerComponent(polymer_id="PVA", weight_ratio=0.0)
    with pytest.raises(MalformedRecord):
        PolymerComponent(polymer_id="PVA", weight_ratio=1.2)
    with pytest.raises(MalformedRecord):
        SolventComponent(solvent_id="  ")


def test_weight_ratio_sum_enforced_for_multiple_components():
    components = (
        PolymerComponent("PVA", weight_ratio=0.5),
        PolymerComponent("PEO", weight_ratio=0.2),
    )
    with pytest.raises(MalformedRecord):
        ExperimentRecord(polymers=components)
    # single component with a partial ratio is allowed
    ExperimentRecord(polymers=(PolymerComponent("PVA", weight_ratio=0.5),))
    # exact sum passes
    ExperimentRecord(
        polymers=(
            PolymerComponent("PVA", weight_ratio=0.7),
            PolymerComponent("PEO", weight_ratio=0.3),
        )
    )


def test_volume_ratio_sum_when_all_set():
    with pytest.raises(MalformedRecord):
        ExperimentRecord(
            solvents=(
                SolventComponent("water", volume_ratio=0.5),
                SolventComponent("ethanol", volume_ratio=0.3),
            )
        )
    # partially set ratios are not summed
    ExperimentRecord(
        solvents=(
            SolventComponent("water", volume_ratio=0.5),
            SolventComponent("ethanol"),
        )
    )


def test_ph_bounds_rejected_at_construction():
    with pytest.raises(MalformedRecord):
        SolutionProperties(ph=14.5)
    with pytest.raises(MalformedRecord):
        SolutionProperties(ph=-0.1)
    SolutionProperties(ph=0.0)
    SolutionProperties(ph=14.0)


def test_concentration_must_be_positive():
    with pytest.raises(MalformedRecord):
        SolutionProperties(concentration=Quantity(0.0, "wt%"))


def test_out_of_range_ambient_is_constructible(golden_doc):
    # bounds are enforced by validation, not construction
    golden_doc["ambient"]["humidity"] = {"value": 150.0, "unit": "%RH"}
    record = record_from_doc(golden_doc)
    assert record.ambient.humidity.value == 150.0


def test_unknown_equipment_class_rejected():
    config = EquipmentConfig(config_class="teleporter")
    with pytest.raises(MalformedRecord):
        config.validate_role(EquipmentRole.NEEDLE)
    with pytest.raises(MalformedRecord):
        ExperimentRecord(needle=config)


def test_empty_morphology_cannot_attach(golden_doc):
    golden_doc["morphology"] = "-|-|-|-|-|-|-"
    with pytest.raises(MalformedRecord):
        record_from_doc(golden_doc)


def test_morphology_string_round_trip(golden_doc):
    golden_doc["morphology"] = "Cylinder|Random|250|12|Single Material|Smooth|Bead,Wrinkle"
    record = record_from_doc(golden_doc)
    assert record.morphology.defects == frozenset({"Bead", "Wrinkle"})
    assert record_to_doc(record)["morphology"] == golden_doc["morphology"]


def test_provenance_source_inference():
    assert Provenance(doi="10.1/x").source_kind.value == "literature"
    assert (
        Provenance(contributor_name="a", contributor_contact="b").source_kind.value
        == "direct_contribution"
    )


def test_unknown_top_level_key_rejected(golden_doc):
    golden_doc["extra"] = 1
    with pytest.raises(MalformedRecord):
        record_from_doc(golden_doc)


def test_malformed_quantity_rejected(golden_doc):
    golden_doc["process"]["voltage"] = {"value": "high", "unit": "kV"}
    with pytest.raises(MalformedRecord):
        record_from_doc(golden_doc)


def test_completeness_fully_populated(golden_record):
    profile = completeness_profile(golden_record)
    assert isinstance(profile, CompletenessProfile)
    assert profile.is_valid_minimal
    assert profile.entries["provenance.source"] is FieldStatus.REQUIRED_PRESENT
    assert profile.entries["ambient"] is FieldStatus.OPTIONAL_PRESENT


def test_completeness_missing_ambient_still_valid_minimal(golden_doc):
    golden_doc["ambient"] = {"temperature": None, "humidity": None}
    profile = completeness_profile(record_from_doc(golden_doc))
    assert profile.entries["ambient"] is FieldStatus.OPTIONAL_ABSENT
    assert profile.is_valid_minimal


def test_completeness_missing_concentration(golden_doc):
    golden_doc["solution"]["concentration"] = None
    profile = completeness_profile(record_from_doc(golden_doc))
    assert profile.entries["solution.concentration"] is FieldStatus.REQUIRED_MISSING
    assert not profile.is_valid_minimal
    assert profile.missing_required() == ("solution.concentration",)


def test_outcome_descriptor_interpretation(golden_doc):
    golden_doc["fiber"]["fiber_diameter"] = None
    record = record_from_doc(golden_doc)
    assert not record.has_outcome  # images/derived alone do not count

    golden_doc["instabilities"] = ["dripping"]
    assert record_from_doc(golden_doc).has_outcome

    golden_doc["instabilities"] = []
    golden_doc["morphology"] = "Cylinder|-|-|-|-|-|-"
    assert record_from_doc(golden_doc).has_outcome


def test_morphology_descriptor_reachable_via_record(golden_doc):
    golden_doc["morphology"] = "Cylinder|Random|250|12|Single Material|Smooth|-"
    record = record_from_doc(golden_doc)
    assert isinstance(record.morphology, emcv.MorphologyDescriptor)
