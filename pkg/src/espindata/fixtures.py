"""Deterministic synthetic record corpora for seeding, demos and tests.

The generator produces submission documents (no accession id) that always
pass the rule catalog, with realistic sparsity: ambient conditions are the
most sparsely populated group, a slice of records report process failures
as instability tags instead of fiber measurements, and a minority arrive
in non-canonical units to exercise normalization.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Callable

from . import emcv

_POLYMERS = (
    ("PVA", 0.24),
    ("PVDF", 0.16),
    ("PVP", 0.12),
    ("PAN", 0.12),
    ("PCL", 0.08),
    ("PEO", 0.07),
    ("PS", 0.05),
    ("PLA", 0.05),
    ("PLGA", 0.04),
    ("PU", 0.03),
    ("chitosan", 0.02),
    ("gelatin", 0.02),
)

_SOLVENT_FOR = {
    "PVA": ("water", "water", "water", "acetic acid"),
    "PVDF": ("DMF", "DMF", "acetone", "DMSO"),
    "PVP": ("ethanol", "water", "DMF"),
    "PAN": ("DMF", "DMF", "DMSO"),
    "PCL": ("chloroform", "DMF", "acetic acid"),
    "PEO": ("water", "water", "ethanol"),
    "PS": ("DMF", "THF"),
    "PLA": ("chloroform", "DMF"),
    "PLGA": ("chloroform", "DMF"),
    "PU": ("DMF", "THF"),
    "chitosan": ("acetic acid", "water"),
    "gelatin": ("acetic acid", "water"),
}

_NEEDLES = ("single_needle", "single_needle", "single_needle", "multi_needle", "coaxial", "needleless")
_COLLECTORS = ("flat_plate", "flat_plate", "flat_plate", "rotating_drum", "rotating_disk", "patterned")

_CONTRIBUTORS = (
    ("A. Kask", "a.kask@example.edu"),
    ("B. Molnar", "b.molnar@example.edu"),
    ("C. Ferreira", "c.ferreira@example.org"),
    ("D. Okafor", "d.okafor@example.org"),
    ("E. Lindgren", "e.lindgren@example.edu"),
)

_APPLICATIONS = (
    "filtration",
    "tissue_engineering",
    "drug_delivery",
    "energy_storage",
    "protective_textiles",
    "sensors",
)

_INSTABILITIES = (
    "jet_breakup",
    "dripping",
    "electrospraying",
    "bead_dominated",
    "clogging",
    "no_jet",
)


def _weighted_choice(rng: random.Random, weighted: tuple[tuple[str, float], ...]) -> str:
    roll = rng.random()
    cumulative = 0.0
    for value, weight in weighted:
        cumulative += weight
        if roll < cumulative:
            return value
    return weighted[-1][0]


def _quantity(value: float, unit: str) -> dict:
    return {"value": value, "unit": unit}


def generate_record_doc(
    rng: random.Random,
    index: int,
    blob_put: Callable[[bytes], str] | None = None,
) -> dict:
    """One synthetic submission document."""
    polymer = _weighted_choice(rng, _POLYMERS)
    solvent = rng.choice(_SOLVENT_FOR[polymer])

    polymers = [{"polymer_id": polymer, "polymer_weight": None, "weight_ratio": None}]
    if rng.random() < 0.15:
        blend = rng.choice([p for p, _ in _POLYMERS if p != polymer])
        ratio = round(rng.uniform(0.2, 0.8), 2)
        polymers = [
            {"polymer_id": polymer, "polymer_weight": None, "weight_ratio": ratio},
            {"polymer_id": blend, "polymer_weight": None, "weight_ratio": round(1 - ratio, 2)},
        ]
    if rng.random() < 0.3:
        polymers[0]["polymer_weight"] = _quantity(float(rng.randrange(20, 200) * 1000), "g/mol")

    solvents = [{"solvent_id": solvent, "volume_ratio": None, "weight": None}]
    if rng.random() < 0.2:
        second = rng.choice(("ethanol", "water", "DMF", "acetone"))
        if second != solvent:
            ratio = round(rng.uniform(0.5, 0.9), 2)
            solvents = [
                {"solvent_id": solvent, "volume_ratio": ratio, "weight": None},
                {"solvent_id": second, "volume_ratio": round(1 - ratio, 2), "weight": None},
            ]

    # ~8% of records arrive in non-canonical but convertible units.
    off_canonical = rng.random() < 0.08
    voltage_kv = round(rng.uniform(5.0, 30.0), 1)
    if rng.random() < 0.02:
        voltage_kv = -voltage_kv  # reversed polarity
    flow_ml_h = round(rng.uniform(0.1, 5.0), 2)
    distance_cm = round(rng.uniform(5.0, 25.0), 1)
    process = {
        "voltage": _quantity(voltage_kv * 1000, "V") if off_canonical else _quantity(voltage_kv, "kV"),
        "flow_rate": _quantity(flow_ml_h, "mL/h"),
        "tip_collector_distance": _quantity(distance_cm * 10, "mm")
        if off_canonical
        else _quantity(distance_cm, "cm"),
        "spinning_duration": _quantity(float(rng.randrange(10, 240)), "min")
        if rng.random() < 0.3
        else None,
    }

    solution = {
        "concentration": _quantity(round(rng.uniform(2.0, 30.0), 1), "wt%"),
        "viscosity": _quantity(float(rng.randrange(50, 5000)), "mPa·s") if rng.random() < 0.4 else None,
        "surface_tension": _quantity(round(rng.uniform(20.0, 75.0), 1), "mN/m")
        if rng.random() < 0.3
        else None,
        "conductivity": _quantity(round(rng.uniform(0.05, 15.0), 2), "mS/cm")
        if rng.random() < 0.25
        else None,
        "evaporation_rate": _quantity(round(rng.uniform(0.1, 3.0), 2), "g/h")
        if rng.random() < 0.1
        else None,
        "ph": round(rng.uniform(3.0, 9.0), 1) if rng.random() < 0.3 else None,
    }

    # Ambient is the most sparsely reported group.
    ambient = {"temperature": None, "humidity": None}
    if rng.random() < 0.45:
        ambient["temperature"] = _quantity(round(rng.uniform(18.0, 32.0), 1), "°C")
        if rng.random() < 0.8:
            ambient["humidity"] = _quantity(round(rng.uniform(25.0, 70.0), 1), "%RH")

    needle_class = rng.choice(_NEEDLES)
    collector_class = rng.choice(_COLLECTORS)
    needle = {
        "needle_type": needle_class,
        "needle_definition": {"gauge": rng.choice((18, 20, 21, 23, 25))},
    }
    collector = {
        "collector_type": collector_class,
        "collector_definition": {"rotation_speed_rpm": rng.randrange(200, 3000)}
        if collector_class in ("rotating_drum", "rotating_disk")
        else {},
    }

    failed = rng.random() < 0.15
    fiber: dict = {
        "fiber_diameter": None,
        "diameter_variation": None,
        "is_formation_stable": None,
        "fiber_weight": None,
    }
    morphology = None
    instabilities: list[str] = []
    if failed:
        instabilities = rng.sample(_INSTABILITIES, k=rng.choice((1, 1, 2)))
        fiber["is_formation_stable"] = False
        if rng.random() < 0.3:
            fiber["fiber_diameter"] = _quantity(float(rng.randrange(100, 3000)), "nm")
    else:
        diameter = float(rng.randrange(50, 2000))
        fiber["fiber_diameter"] = _quantity(diameter, "nm")
        fiber["is_formation_stable"] = rng.random() < 0.9
        if rng.random() < 0.6:
            fiber["diameter_variation"] = _quantity(float(rng.randrange(3, 45)), "%")
        if rng.random() < 0.6:
            defects = []
            if rng.random() < 0.25:
                defects = rng.sample(("Bead", "Bead-on-String", "Wrinkle", "Fusion"), k=1)
            descriptor = emcv.MorphologyDescriptor(
                shape=rng.choice(("Cylinder", "Cylinder", "Cylinder", "Ribbon", "Helical")),
                topography=rng.choice(("Random", "Random", "Aligned", "Networked")),
                size_nm=diameter,
                size_variation_pct=float(rng.randrange(3, 45)) if rng.random() < 0.7 else None,
                composition=rng.choice(("Single Material", "Single Material", "Core-Sheath")),
                texture=rng.choice(("Smooth", "Smooth", "Rough", "Porous")),
                defects=frozenset(defects),
            )
            morphology = emcv.serialize_descriptor(descriptor)

    images = []
    if blob_put is not None and rng.random() < 0.2:
        for j in range(rng.choice((1, 1, 2))):
            payload = f"fixture-image-{index}-{j}".encode("utf-8")
            images.append(
                {
                    "image_type": "sem",
                    "image_definition": {
                        "magnification": float(rng.choice((1000, 5000, 10000, 20000))),
                        "scale_bar": {"value": 1.0, "unit": "µm"},
                        "file_extension": "png",
                    },
                    "payload_ref": blob_put(payload),
                }
            )

    derived: dict = {"mechanical": None, "functional": None, "application_type": []}
    if not failed and rng.random() < 0.15:
        derived["mechanical"] = {
            "tensile_strength": _quantity(round(rng.uniform(1.0, 25.0), 2), "MPa"),
            "modulus": _quantity(round(rng.uniform(10.0, 800.0), 1), "MPa"),
            "elongation_at_break": _quantity(round(rng.uniform(5.0, 300.0), 1), "%"),
            "fracture_behavior": rng.choice(("brittle", "ductile", None)),
        }
    if not failed and rng.random() < 0.12:
        derived["functional"] = {
            "surface_area": _quantity(round(rng.uniform(1.0, 60.0), 2), "m²/g"),
            "porosity": _quantity(round(rng.uniform(30.0, 95.0), 1), "%"),
            "thermal_conductivity": None,
            "permeability": None,
            "electrical_conductivity": None,
            "wettability": _quantity(float(rng.randrange(10, 150)), "deg"),
        }
    if rng.random() < 0.15:
        derived["application_type"] = rng.sample(_APPLICATIONS, k=rng.choice((1, 1, 2)))

    name, contact = rng.choice(_CONTRIBUTORS)
    has_doi = rng.random() < 0.7
    provenance = {
        "doi": f"10.5555/esd.{index:05d}" if has_doi else None,
        "title": f"Synthetic electrospinning study #{index}" if has_doi else None,
        "bibliographic": None,
        "contributor_name": name,
        "contributor_contact": contact,
        "source_kind": "literature" if has_doi else "direct_contribution",
    }

    return {
        "record_id": None,
        "polymers": polymers,
        "solvents": solvents,
        "solution": solution,
        "process": process,
        "ambient": ambient,
        "needle": needle,
        "collector": collector,
        "fiber": fiber,
        "morphology": morphology,
        "instabilities": instabilities,
        "images": images,
        "derived": derived,
        "provenance": provenance,
        "vocabulary_version": emcv.DEFAULT_VOCABULARY_VERSION,
    }


def generate_corpus(
    count: int,
    seed: int = 20260811,
    blob_put: Callable[[bytes], str] | None = None,
) -> list[dict]:
    rng = random.Random(seed)
    return [generate_record_doc(rng, index, blob_put) for index in range(count)]


def write_corpus(path: str | Path, count: int, seed: int = 20260811) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    corpus = generate_corpus(count, seed)
    path.write_text(json.dumps(corpus, ensure_ascii=False, indent=1), "utf-8")
    return path
