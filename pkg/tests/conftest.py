from __future__ import annotations

import pytest

from espindata.moderation import Attribution
from espindata.platform import Platform
from espindata.records import record_from_doc


def make_golden_doc() -> dict:
    """A complete, rule-clean submission mirroring a typical PVA/water run."""
    return {
        "record_id": None,
        "polymers": [{"polymer_id": "PVA", "polymer_weight": None, "weight_ratio": None}],
        "solvents": [{"solvent_id": "water", "volume_ratio": None, "weight": None}],
        "solution": {
            "concentration": {"value": 10.0, "unit": "wt%"},
            "viscosity": {"value": 850.0, "unit": "mPa·s"},
            "surface_tension": None,
            "conductivity": None,
            "evaporation_rate": None,
            "ph": 6.5,
        },
        "process": {
            "voltage": {"value": 20.0, "unit": "kV"},
            "flow_rate": {"value": 0.3, "unit": "mL/h"},
            "tip_collector_distance": {"value": 15.0, "unit": "cm"},
            "spinning_duration": {"value": 60.0, "unit": "min"},
        },
        "ambient": {
            "temperature": {"value": 23.0, "unit": "°C"},
            "humidity": {"value": 45.0, "unit": "%RH"},
        },
        "needle": {"needle_type": "single_needle", "needle_definition": {"gauge": 21}},
        "collector": {"collector_type": "flat_plate", "collector_definition": {}},
        "fiber": {
            "fiber_diameter": {"value": 250.0, "unit": "nm"},
            "diameter_variation": {"value": 12.0, "unit": "%"},
            "is_formation_stable": True,
            "fiber_weight": None,
        },
        "morphology": None,
        "instabilities": [],
        "images": [],
        "derived": {"mechanical": None, "functional": None, "application_type": []},
        "provenance": {
            "doi": "10.5555/esd.golden",
            "title": "Golden fixture record",
            "bibliographic": None,
            "contributor_name": "G. Olden",
            "contributor_contact": "g.olden@example.edu",
            "source_kind": "literature",
        },
        "vocabulary_version": "1.0",
    }


@pytest.fixture
def golden_doc() -> dict:
    return make_golden_doc()


@pytest.fixture
def golden_record():
    return record_from_doc(make_golden_doc())


@pytest.fixture
def platform_mem() -> Platform:
    return Platform()


@pytest.fixture
def platform_tmp(tmp_path) -> Platform:
    return Platform(data_dir=tmp_path / "data")


@pytest.fixture
def attribution() -> Attribution:
    return Attribution("G. Olden", "g.olden@example.edu")
