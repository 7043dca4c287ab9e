"""Typed process-structure-property records and their canonical JSON form.

Construction enforces local value validity (finite numbers, ratio ranges,
registered equipment classes, known vocabulary versions).  Presence of the
schema-required fields is deliberately *not* enforced here: incomplete
submissions must remain representable so the validation rules can report
them and the moderation pipeline can hold them in a flagged state.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterator, Mapping

from . import emcv
from .errors import IncompatibleUnits, MalformedRecord
from .units import Quantity, UnitRegistry, default_registry

SCHEMA_VERSION = "1"

ACCESSION_PREFIX = "ESD-"
ACCESSION_DIGITS = 6

RATIO_SUM_TOLERANCE = 1e-6


class SourceKind(str, Enum):
    LITERATURE = "literature"
    DIRECT_CONTRIBUTION = "direct_contribution"


class EquipmentRole(str, Enum):
    NEEDLE = "needle"
    COLLECTOR = "collector"


class ImageType(str, Enum):
    SEM = "sem"
    OPTICAL = "optical"
    OTHER = "other"


# Extensible equipment class registries, seeded with the classes the query
# surface filters on.
_EQUIPMENT_CLASSES: dict[EquipmentRole, set[str]] = {
    EquipmentRole.NEEDLE: {"single_needle", "multi_needle", "coaxial", "needleless", "other"},
    EquipmentRole.COLLECTOR: {
        "flat_plate",
        "rotating_drum",
        "rotating_disk",
        "patterned",
        "liquid_bath",
        "other",
    },
}

# Seed instability codes; the registry is advisory and free-form extensible.
INSTABILITY_SEED = (
    "jet_breakup",
    "dripping",
    "electrospraying",
    "bead_dominated",
    "jet_instability_whipping_excess",
    "clogging",
    "film_formation",
    "no_jet",
)


def equipment_classes(role: EquipmentRole) -> frozenset[str]:
    return frozenset(_EQUIPMENT_CLASSES[role])


def register_equipment_class(role: EquipmentRole, name: str) -> None:
    if not name or not name.strip():
        raise MalformedRecord("equipment class name must be non-empty")
    _EQUIPMENT_CLASSES[role].add(name.strip())


def _require_finite(value: float | None, path: str) -> None:
    if value is not None and not math.isfinite(value):
        raise MalformedRecord(f"{path}: value must be finite")


@dataclass(frozen=True)
class PolymerComponent:
    polymer_id: str
    polymer_weight: Quantity | None = None
    weight_ratio: float | None = None

    def __post_init__(self):
        if not self.polymer_id or not self.polymer_id.strip():
            raise MalformedRecord("polymer_id must be non-empty")
        object.__setattr__(self, "polymer_id", self.polymer_id.strip())
        if self.weight_ratio is not None:
            _require_finite(self.weight_ratio, "weight_ratio")
            if not 0 < self.weight_ratio <= 1:
                raise MalformedRecord(
                    f"weight_ratio must lie in (0, 1], got {self.weight_ratio}"
                )


@dataclass(frozen=True)
class SolventComponent:
    solvent_id: str
    volume_ratio: float | None = None
    weight: Quantity | None = None

    def __post_init__(self):
        if not self.solvent_id or not self.solvent_id.strip():
            raise MalformedRecord("solvent_id must be non-empty")
        object.__setattr__(self, "solvent_id", self.solvent_id.strip())
        if self.volume_ratio is not None:
            _require_finite(self.volume_ratio, "volume_ratio")
            if not 0 < self.volume_ratio <= 1:
                raise MalformedRecord(
                    f"volume_ratio must lie in (0, 1], got {self.volume_ratio}"
                )


@dataclass(frozen=True)
class SolutionProperties:
    concentration: Quantity | None = None
    viscosity: Quantity | None = None
    surface_tension: Quantity | None = None
    conductivity: Quantity | None = None
    evaporation_rate: Quantity | None = None
    ph: float | None = None

    def __post_init__(self):
        if self.concentration is not None and self.concentration.value <= 0:
            raise MalformedRecord(
                f"solution.concentration must be positive, got {self.concentration.value}"
            )
        if self.ph is not None:
            _require_finite(self.ph, "solution.ph")
            # pH has no physical-constraint rule, so out-of-range values are
            # rejected at construction rather than stored flagged.
            if not 0 <= self.ph <= 14:
                raise MalformedRecord(f"solution.ph must lie in [0, 14], got {self.ph}")


@dataclass(frozen=True)
class ProcessParameters:
    voltage: Quantity | None = None
    flow_rate: Quantity | None = None
    tip_collector_distance: Quantity | None = None
    spinning_duration: Quantity | None = None


@dataclass(frozen=True)
class AmbientConditions:
    # Physical bounds are validation's job, not construction's: out-of-range
    # submissions must be storable in a flagged state with their violations.
    temperature: Quantity | None = None
    humidity: Quantity | None = None


@dataclass(frozen=True)
class EquipmentConfig:
    config_class: str
    definition: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.config_class or not self.config_class.strip():
            raise MalformedRecord("equipment config_class must be non-empty")
        object.__setattr__(self, "config_class", self.config_class.strip())
        if not isinstance(self.definition, Mapping):
            raise MalformedRecord("equipment definition must be a structured document")
        object.__setattr__(self, "definition", dict(self.definition))

    def validate_role(self, role: EquipmentRole) -> None:
        if self.config_class not in _EQUIPMENT_CLASSES[role]:
            raise MalformedRecord(
                f"unknown {role.value} class {self.config_class!r}; "
                f"registered: {sorted(_EQUIPMENT_CLASSES[role])}"
            )


@dataclass(frozen=True)
class FiberProperties:
    fiber_diameter: Quantity | None = None
    diameter_variation: Quantity | None = None
    is_formation_stable: bool | None = None
    fiber_weight: Quantity | None = None


@dataclass(frozen=True)
class MechanicalProperties:
    tensile_strength: Quantity | None = None
    modulus: Quantity | None = None
    elongation_at_break: Quantity | None = None
    fracture_behavior: str | None = None


@dataclass(frozen=True)
class FunctionalProperties:
    surface_area: Quantity | None = None
    porosity: Quantity | None = None
    thermal_conductivity: Quantity | None = None
    permeability: Quantity | None = None
    electrical_conductivity: Quantity | None = None
    wettability: Quantity | None = None


@dataclass(frozen=True)
class DerivedProperties:
    mechanical: MechanicalProperties | None = None
    functional: FunctionalProperties | None = None
    application_types: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "application_types", tuple(self.application_types))
        for tag in self.application_types:
            if not tag or not tag.strip():
                raise MalformedRecord("application_type tags must be non-empty")


@dataclass(frozen=True)
class ImageRef:
    image_type: ImageType
    image_definition: Mapping[str, Any] = field(default_factory=dict)
    payload_ref: str = ""

    def __post_init__(self):
        if not isinstance(self.image_definition, Mapping):
            raise MalformedRecord("image_definition must be a structured document")
        object.__setattr__(self, "image_definition", dict(self.image_definition))
        if not self.payload_ref:
            raise MalformedRecord("image payload_ref must be non-empty")
        scale_bar = self.image_definition.get("scale_bar")
        if scale_bar is not None:
            try:
                _quantity_from_doc(scale_bar, "image_definition.scale_bar")
            except MalformedRecord:
                raise

    def scale_bar(self) -> Quantity | None:
        raw = self.image_definition.get("scale_bar")
        if raw is None:
            return None
        return _quantity_from_doc(raw, "image_definition.scale_bar")


@dataclass(frozen=True)
class Provenance:
    doi: str | None = None
    title: str | None = None
    bibliographic: str | None = None
    contributor_name: str | None = None
    contributor_contact: str | None = None
    source_kind: SourceKind | None = None

    def __post_init__(self):
        for name in ("doi", "title", "bibliographic", "contributor_name", "contributor_contact"):
            value = getattr(self, name)
            if value is not None:
                stripped = value.strip()
                object.__setattr__(self, name, stripped or None)
        if self.source_kind is None:
            inferred = SourceKind.LITERATURE if self.doi else SourceKind.DIRECT_CONTRIBUTION
            object.__setattr__(self, "source_kind", inferred)

    @property
    def has_attribution(self) -> bool:
        return bool(self.contributor_name and self.contributor_contact)

    @property
    def has_traceable_source(self) -> bool:
        return bool(self.doi) or self.has_attribution


@dataclass(frozen=True)
class ExperimentRecord:
    """The aggregate record linking spinning inputs to observed outcomes."""

    record_id: str | None = None
    polymers: tuple[PolymerComponent, ...] = ()
    solvents: tuple[SolventComponent, ...] = ()
    solution: SolutionProperties = field(default_factory=SolutionProperties)
    process: ProcessParameters = field(default_factory=ProcessParameters)
    ambient: AmbientConditions = field(default_factory=AmbientConditions)
    needle: EquipmentConfig | None = None
    collector: EquipmentConfig | None = None
    fiber: FiberProperties = field(default_factory=FiberProperties)
    morphology: emcv.MorphologyDescriptor | None = None
    instabilities: tuple[str, ...] = ()
    images: tuple[ImageRef, ...] = ()
    derived: DerivedProperties = field(default_factory=DerivedProperties)
    provenance: Provenance = field(default_factory=Provenance)
    vocabulary_version: str = emcv.DEFAULT_VOCABULARY_VERSION

    def __post_init__(self):
        object.__setattr__(self, "polymers", tuple(self.polymers))
        object.__setattr__(self, "solvents", tuple(self.solvents))
        object.__setattr__(self, "instabilities", tuple(self.instabilities))
        object.__setattr__(self, "images", tuple(self.images))

        emcv.vocabulary(self.vocabulary_version)  # raises VersionUnknown

        ratios = [c.weight_ratio for c in self.polymers if c.weight_ratio is not None]
        if len(ratios) >= 2 and abs(sum(ratios) - 1.0) > RATIO_SUM_TOLERANCE:
            raise MalformedRecord(
                f"polymer weight_ratios must sum to 1, got {sum(ratios)!r}"
            )
        volume_ratios = [c.volume_ratio for c in self.solvents]
        if self.solvents and all(r is not None for r in volume_ratios):
            total = sum(volume_ratios)
            if abs(total - 1.0) > RATIO_SUM_TOLERANCE:
                raise MalformedRecord(
                    f"solvent volume_ratios must sum to 1, got {total!r}"
                )

        if self.needle is not None:
            self.needle.validate_role(EquipmentRole.NEEDLE)
        if self.collector is not None:
            self.collector.validate_role(EquipmentRole.COLLECTOR)

        if self.morphology is not None:
            if self.morphology.is_empty():
                raise MalformedRecord(
                    "an all-missing morphology descriptor cannot be attached to a record"
                )
            if self.morphology.vocabulary_version != self.vocabulary_version:
                raise MalformedRecord(
                    "morphology vocabulary_version does not match the record's"
                )

        for code in self.instabilities:
            if not code or not code.strip():
                raise MalformedRecord("instability codes must be non-empty")

    @property
    def has_outcome(self) -> bool:
        """At least one outcome descriptor: diameter, morphology or instability."""
        return (
            self.fiber.fiber_diameter is not None
            or self.morphology is not None
            or len(self.instabilities) > 0
        )


# --- canonical units and normalization -------------------------------------

# Field path -> canonical unit symbol.  Fields not listed here are stored in
# whatever registered unit they arrive in.
CANONICAL_FIELD_UNITS: dict[str, str] = {
    "solution.concentration": "wt%",
    "process.voltage": "kV",
    "process.flow_rate": "mL/h",
    "process.tip_collector_distance": "cm",
    "process.spinning_duration": "min",
    "ambient.temperature": "°C",
    "ambient.humidity": "%RH",
    "fiber.fiber_diameter": "nm",
    "fiber.diameter_variation": "%",
}


def _convert_field(
    quantity: Quantity | None, path: str, registry: UnitRegistry
) -> Quantity | None:
    if quantity is None:
        return None
    target = CANONICAL_FIELD_UNITS.get(path)
    if target is None:
        return quantity
    try:
        return registry.convert(quantity, target)
    except IncompatibleUnits as exc:
        raise IncompatibleUnits(f"{path}: {exc.message}") from None


def normalize_record(
    record: ExperimentRecord, registry: UnitRegistry | None = None
) -> ExperimentRecord:
    """Express every canonically-designated quantity in its canonical unit.

    Idempotent: normalizing an already-canonical record returns an equal
    record.  Conversion failures carry the field path in the error.
    """
    registry = registry or default_registry()
    solution = replace(
        record.solution,
        concentration=_convert_field(
            record.solution.concentration, "solution.concentration", registry
        ),
    )
    process = replace(
        record.process,
        voltage=_convert_field(record.process.voltage, "process.voltage", registry),
        flow_rate=_convert_field(record.process.flow_rate, "process.flow_rate", registry),
        tip_collector_distance=_convert_field(
            record.process.tip_collector_distance, "process.tip_collector_distance", registry
        ),
        spinning_duration=_convert_field(
            record.process.spinning_duration, "process.spinning_duration", registry
        ),
    )
    ambient = replace(
        record.ambient,
        temperature=_convert_field(record.ambient.temperature, "ambient.temperature", registry),
        humidity=_convert_field(record.ambient.humidity, "ambient.humidity", registry),
    )
    fiber = replace(
        record.fiber,
        fiber_diameter=_convert_field(record.fiber.fiber_diameter, "fiber.fiber_diameter", registry),
        diameter_variation=_convert_field(
            record.fiber.diameter_variation, "fiber.diameter_variation", registry
        ),
    )
    return replace(record, solution=solution, process=process, ambient=ambient, fiber=fiber)


def iter_quantities(record: ExperimentRecord) -> Iterator[tuple[str, Quantity]]:
    """Yield every (field path, quantity) pair reachable from the record."""
    for i, component in enumerate(record.polymers):
        if component.polymer_weight is not None:
            yield f"polymers[{i}].polymer_weight", component.polymer_weight
    for i, component in enumerate(record.solvents):
        if component.weight is not None:
            yield f"solvents[{i}].weight", component.weight
    for name in ("concentration", "viscosity", "surface_tension", "conductivity", "evaporation_rate"):
        quantity = getattr(record.solution, name)
        if quantity is not None:
            yield f"solution.{name}", quantity
    for name in ("voltage", "flow_rate", "tip_collector_distance", "spinning_duration"):
        quantity = getattr(record.process, name)
        if quantity is not None:
            yield f"process.{name}", quantity
    for name in ("temperature", "humidity"):
        quantity = getattr(record.ambient, name)
        if quantity is not None:
            yield f"ambient.{name}", quantity
    for name in ("fiber_diameter", "diameter_variation", "fiber_weight"):
        quantity = getattr(record.fiber, name)
        if quantity is not None:
            yield f"fiber.{name}", quantity
    if record.derived.mechanical is not None:
        for name in ("tensile_strength", "modulus", "elongation_at_break"):
            quantity = getattr(record.derived.mechanical, name)
            if quantity is not None:
                yield f"derived.mechanical.{name}", quantity
    if record.derived.functional is not None:
        for name in (
            "surface_area",
            "porosity",
            "thermal_conductivity",
            "permeability",
            "electrical_conductivity",
            "wettability",
        ):
            quantity = getattr(record.derived.functional, name)
            if quantity is not None:
                yield f"derived.functional.{name}", quantity
    for i, image in enumerate(record.images):
        scale_bar = image.scale_bar()
        if scale_bar is not None:
            yield f"images[{i}].image_definition.scale_bar", scale_bar


# --- completeness ------------------------------------------------------------

class FieldStatus(str, Enum):
    REQUIRED_PRESENT = "required_present"
    REQUIRED_MISSING = "required_missing"
    OPTIONAL_PRESENT = "optional_present"
    OPTIONAL_ABSENT = "optional_absent"


# The minimal required element set, in report order.  These names are shared
# with the S-01 schema rule so violations and completeness agree.
REQUIRED_ELEMENTS: tuple[str, ...] = (
    "provenance.source",
    "polymers",
    "solvents",
    "solution.concentration",
    "process.voltage",
    "process.flow_rate",
    "process.tip_collector_distance",
    "needle.config_class",
    "collector.config_class",
    "outcome",
)


def required_element_presence(record: ExperimentRecord) -> dict[str, bool]:
    return {
        "provenance.source": record.provenance.has_traceable_source,
        "polymers": len(record.polymers) > 0,
        "solvents": len(record.solvents) > 0,
        "solution.concentration": record.solution.concentration is not None,
        "process.voltage": record.process.voltage is not None,
        "process.flow_rate": record.process.flow_rate is not None,
        "process.tip_collector_distance": record.process.tip_collector_distance is not None,
        "needle.config_class": record.needle is not None,
        "collector.config_class": record.collector is not None,
        "outcome": record.has_outcome,
    }


_OPTIONAL_GROUPS: tuple[tuple[str, Any], ...] = (
    (
        "solution.measurements",
        lambda r: any(
            getattr(r.solution, n) is not None
            for n in ("viscosity", "surface_tension", "conductivity", "evaporation_rate", "ph")
        ),
    ),
    ("process.spinning_duration", lambda r: r.process.spinning_duration is not None),
    ("ambient", lambda r: r.ambient.temperature is not None or r.ambient.humidity is not None),
    (
        "fiber",
        lambda r: any(
            getattr(r.fiber, n) is not None
            for n in ("fiber_diameter", "diameter_variation", "is_formation_stable", "fiber_weight")
        ),
    ),
    ("morphology", lambda r: r.morphology is not None),
    ("instabilities", lambda r: len(r.instabilities) > 0),
    ("images", lambda r: len(r.images) > 0),
    ("derived.mechanical", lambda r: r.derived.mechanical is not None),
    ("derived.functional", lambda r: r.derived.functional is not None),
    ("derived.application", lambda r: len(r.derived.application_types) > 0),
)


@dataclass(frozen=True)
class CompletenessProfile:
    entries: Mapping[str, FieldStatus]

    @property
    def is_valid_minimal(self) -> bool:
        return FieldStatus.REQUIRED_MISSING not in self.entries.values()

    def missing_required(self) -> tuple[str, ...]:
        return tuple(
            name
            for name, status in self.entries.items()
            if status is FieldStatus.REQUIRED_MISSING
        )


def completeness_profile(record: ExperimentRecord) -> CompletenessProfile:
    """Classify every schema field group as required/optional, present/absent."""
    entries: dict[str, FieldStatus] = {}
    for name, present in required_element_presence(record).items():
        entries[name] = (
            FieldStatus.REQUIRED_PRESENT if present else FieldStatus.REQUIRED_MISSING
        )
    for name, predicate in _OPTIONAL_GROUPS:
        entries[name] = (
            FieldStatus.OPTIONAL_PRESENT if predicate(record) else FieldStatus.OPTIONAL_ABSENT
        )
    return CompletenessProfile(entries=entries)


# --- canonical document serialization ---------------------------------------

def _quantity_to_doc(quantity: Quantity | None) -> dict | None:
    if quantity is None:
        return None
    return {"value": quantity.value, "unit": quantity.unit}


def record_to_doc(record: ExperimentRecord) -> dict:
    """Canonical JSON-compatible document mirroring the type tree."""
    return {
        "record_id": record.record_id,
        "polymers": [
            {
                "polymer_id": c.polymer_id,
                "polymer_weight": _quantity_to_doc(c.polymer_weight),
                "weight_ratio": c.weight_ratio,
            }
            for c in record.polymers
        ],
        "solvents": [
            {
                "solvent_id": c.solvent_id,
                "volume_ratio": c.volume_ratio,
                "weight": _quantity_to_doc(c.weight),
            }
            for c in record.solvents
        ],
        "solution": {
            "concentration": _quantity_to_doc(record.solution.concentration),
            "viscosity": _quantity_to_doc(record.solution.viscosity),
            "surface_tension": _quantity_to_doc(record.solution.surface_tension),
            "conductivity": _quantity_to_doc(record.solution.conductivity),
            "evaporation_rate": _quantity_to_doc(record.solution.evaporation_rate),
            "ph": record.solution.ph,
        },
        "process": {
            "voltage": _quantity_to_doc(record.process.voltage),
            "flow_rate": _quantity_to_doc(record.process.flow_rate),
            "tip_collector_distance": _quantity_to_doc(record.process.tip_collector_distance),
            "spinning_duration": _quantity_to_doc(record.process.spinning_duration),
        },
        "ambient": {
            "temperature": _quantity_to_doc(record.ambient.temperature),
            "humidity": _quantity_to_doc(record.ambient.humidity),
        },
        "needle": None
        if record.needle is None
        else {
            "needle_type": record.needle.config_class,
            "needle_definition": dict(record.needle.definition),
        },
        "collector": None
        if record.collector is None
        else {
            "collector_type": record.collector.config_class,
            "collector_definition": dict(record.collector.definition),
        },
        "fiber": {
            "fiber_diameter": _quantity_to_doc(record.fiber.fiber_diameter),
            "diameter_variation": _quantity_to_doc(record.fiber.diameter_variation),
            "is_formation_stable": record.fiber.is_formation_stable,
            "fiber_weight": _quantity_to_doc(record.fiber.fiber_weight),
        },
        "morphology": None
        if record.morphology is None
        else emcv.serialize_descriptor(record.morphology),
        "instabilities": list(record.instabilities),
        "images": [
            {
                "image_type": image.image_type.value,
                "image_definition": dict(image.image_definition),
                "payload_ref": image.payload_ref,
            }
            for image in record.images
        ],
        "derived": {
            "mechanical": None
            if record.derived.mechanical is None
            else {
                "tensile_strength": _quantity_to_doc(record.derived.mechanical.tensile_strength),
                "modulus": _quantity_to_doc(record.derived.mechanical.modulus),
                "elongation_at_break": _quantity_to_doc(
                    record.derived.mechanical.elongation_at_break
                ),
                "fracture_behavior": record.derived.mechanical.fracture_behavior,
            },
            "functional": None
            if record.derived.functional is None
            else {
                "surface_area": _quantity_to_doc(record.derived.functional.surface_area),
                "porosity": _quantity_to_doc(record.derived.functional.porosity),
                "thermal_conductivity": _quantity_to_doc(
                    record.derived.functional.thermal_conductivity
                ),
                "permeability": _quantity_to_doc(record.derived.functional.permeability),
                "electrical_conductivity": _quantity_to_doc(
                    record.derived.functional.electrical_conductivity
                ),
                "wettability": _quantity_to_doc(record.derived.functional.wettability),
            },
            "application_type": list(record.derived.application_types),
        },
        "provenance": {
            "doi": record.provenance.doi,
            "title": record.provenance.title,
            "bibliographic": record.provenance.bibliographic,
            "contributor_name": record.provenance.contributor_name,
            "contributor_contact": record.provenance.contributor_contact,
            "source_kind": record.provenance.source_kind.value,
        },
        "vocabulary_version": record.vocabulary_version,
    }


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def record_digest(record: ExperimentRecord) -> str:
    payload = canonical_json(record_to_doc(record)).encode("utf-8")
    return "sha256:" + hashlib.sha256(payload).hexdigest()


# --- document parsing --------------------------------------------------------

def _expect_mapping(value: Any, path: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise MalformedRecord(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(doc: Mapping, allowed: tuple[str, ...], path: str) -> None:
    unknown = set(doc) - set(allowed)
    if unknown:
        raise MalformedRecord(f"{path}: unknown keys {sorted(unknown)}")


def _opt_str(doc: Mapping, key: str, path: str) -> str | None:
    value = doc.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise MalformedRecord(f"{path}.{key}: expected a string")
    return value.strip() or None


def _opt_number(doc: Mapping, key: str, path: str) -> float | None:
    value = doc.get(key)
    if value is None:
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise MalformedRecord(f"{path}.{key}: expected a number")
    return float(value)


def _opt_bool(doc: Mapping, key: str, path: str) -> bool | None:
    value = doc.get(key)
    if value is None:
        return None
    if not isinstance(value, bool):
        raise MalformedRecord(f"{path}.{key}: expected a boolean")
    return value


def _quantity_from_doc(value: Any, path: str) -> Quantity:
    payload = _expect_mapping(value, path)
    _check_keys(payload, ("value", "unit"), path)
    if "value" not in payload or "unit" not in payload:
        raise MalformedRecord(f"{path}: quantity requires 'value' and 'unit'")
    raw = payload["value"]
    if not isinstance(raw, (int, float)) or isinstance(raw, bool):
        raise MalformedRecord(f"{path}.value: expected a number")
    unit = payload["unit"]
    if not isinstance(unit, str) or not unit:
        raise MalformedRecord(f"{path}.unit: expected a unit symbol")
    try:
        return Quantity(float(raw), unit)
    except MalformedRecord as exc:
        raise MalformedRecord(f"{path}: {exc.message}") from None


def _opt_quantity(doc: Mapping, key: str, path: str) -> Quantity | None:
    value = doc.get(key)
    if value is None:
        return None
    return _quantity_from_doc(value, f"{path}.{key}")


_TOP_KEYS = (
    "record_id",
    "polymers",
    "solvents",
    "solution",
    "process",
    "ambient",
    "needle",
    "collector",
    "fiber",
    "morphology",
    "instabilities",
    "images",
    "derived",
    "provenance",
    "vocabulary_version",
)


def record_from_doc(doc: Any) -> ExperimentRecord:
    """Parse a canonical record document; raises MalformedRecord with a path."""
    top = _expect_mapping(doc, "record")
    _check_keys(top, _TOP_KEYS, "record")

    polymers = []
    raw_polymers = top.get("polymers") or []
    if not isinstance(raw_polymers, (list, tuple)):
        raise MalformedRecord("polymers: expected a list")
    for i, entry in enumerate(raw_polymers):
        path = f"polymers[{i}]"
        payload = _expect_mapping(entry, path)
        _check_keys(payload, ("polymer_id", "polymer_weight", "weight_ratio"), path)
        polymer_id = _opt_str(payload, "polymer_id", path)
        if polymer_id is None:
            raise MalformedRecord(f"{path}.polymer_id: required")
        polymers.append(
            PolymerComponent(
                polymer_id=polymer_id,
                polymer_weight=_opt_quantity(payload, "polymer_weight", path),
                weight_ratio=_opt_number(payload, "weight_ratio", path),
            )
        )

    solvents = []
    raw_solvents = top.get("solvents") or []
    if not isinstance(raw_solvents, (list, tuple)):
        raise MalformedRecord("solvents: expected a list")
    for i, entry in enumerate(raw_solvents):
        path = f"solvents[{i}]"
        payload = _expect_mapping(entry, path)
        _check_keys(payload, ("solvent_id", "volume_ratio", "weight"), path)
        solvent_id = _opt_str(payload, "solvent_id", path)
        if solvent_id is None:
            raise MalformedRecord(f"{path}.solvent_id: required")
        solvents.append(
            SolventComponent(
                solvent_id=solvent_id,
                volume_ratio=_opt_number(payload, "volume_ratio", path),
                weight=_opt_quantity(payload, "weight", path),
            )
        )

    raw_solution = _expect_mapping(top.get("solution") or {}, "solution")
    _check_keys(
        raw_solution,
        ("concentration", "viscosity", "surface_tension", "conductivity", "evaporation_rate", "ph"),
        "solution",
    )
    solution = SolutionProperties(
        concentration=_opt_quantity(raw_solution, "concentration", "solution"),
        viscosity=_opt_quantity(raw_solution, "viscosity", "solution"),
        surface_tension=_opt_quantity(raw_solution, "surface_tension", "solution"),
        conductivity=_opt_quantity(raw_solution, "conductivity", "solution"),
        evaporation_rate=_opt_quantity(raw_solution, "evaporation_rate", "solution"),
        ph=_opt_number(raw_solution, "ph", "solution"),
    )

    raw_process = _expect_mapping(top.get("process") or {}, "process")
    _check_keys(
        raw_process,
        ("voltage", "flow_rate", "tip_collector_distance", "spinning_duration"),
        "process",
    )
    process = ProcessParameters(
        voltage=_opt_quantity(raw_process, "voltage", "process"),
        flow_rate=_opt_quantity(raw_process, "flow_rate", "process"),
        tip_collector_distance=_opt_quantity(raw_process, "tip_collector_distance", "process"),
        spinning_duration=_opt_quantity(raw_process, "spinning_duration", "process"),
    )

    raw_ambient = _expect_mapping(top.get("ambient") or {}, "ambient")
    _check_keys(raw_ambient, ("temperature", "humidity"), "ambient")
    ambient = AmbientConditions(
        temperature=_opt_quantity(raw_ambient, "temperature", "ambient"),
        humidity=_opt_quantity(raw_ambient, "humidity", "ambient"),
    )

    def equipment(key: str, class_key: str, definition_key: str) -> EquipmentConfig | None:
        raw = top.get(key)
        if raw is None:
            return None
        payload = _expect_mapping(raw, key)
        _check_keys(payload, (class_key, definition_key), key)
        config_class = _opt_str(payload, class_key, key)
        if config_class is None:
            raise MalformedRecord(f"{key}.{class_key}: required")
        definition = payload.get(definition_key) or {}
        if not isinstance(definition, Mapping):
            raise MalformedRecord(f"{key}.{definition_key}: expected an object")
        return EquipmentConfig(config_class=config_class, definition=definition)

    needle = equipment("needle", "needle_type", "needle_definition")
    collector = equipment("collector", "collector_type", "collector_definition")

    raw_fiber = _expect_mapping(top.get("fiber") or {}, "fiber")
    _check_keys(
        raw_fiber,
        ("fiber_diameter", "diameter_variation", "is_formation_stable", "fiber_weight"),
        "fiber",
    )
    fiber = FiberProperties(
        fiber_diameter=_opt_quantity(raw_fiber, "fiber_diameter", "fiber"),
        diameter_variation=_opt_quantity(raw_fiber, "diameter_variation", "fiber"),
        is_formation_stable=_opt_bool(raw_fiber, "is_formation_stable", "fiber"),
        fiber_weight=_opt_quantity(raw_fiber, "fiber_weight", "fiber"),
    )

    vocabulary_version = top.get("vocabulary_version") or emcv.DEFAULT_VOCABULARY_VERSION
    if not isinstance(vocabulary_version, str):
        raise MalformedRecord("vocabulary_version: expected a string")

    raw_morphology = top.get("morphology")
    morphology = None
    if raw_morphology is not None:
        if not isinstance(raw_morphology, str):
            raise MalformedRecord("morphology: expected a canonical descriptor string")
        morphology = emcv.parse_descriptor(raw_morphology, emcv.vocabulary(vocabulary_version))

    raw_instabilities = top.get("instabilities") or []
    if not isinstance(raw_instabilities, (list, tuple)) or not all(
        isinstance(code, str) for code in raw_instabilities
    ):
        raise MalformedRecord("instabilities: expected a list of codes")

    images = []
    raw_images = top.get("images") or []
    if not isinstance(raw_images, (list, tuple)):
        raise MalformedRecord("images: expected a list")
    for i, entry in enumerate(raw_images):
        path = f"images[{i}]"
        payload = _expect_mapping(entry, path)
        _check_keys(payload, ("image_type", "image_definition", "payload_ref"), path)
        type_token = _opt_str(payload, "image_type", path)
        try:
            image_type = ImageType(type_token)
        except ValueError:
            raise MalformedRecord(f"{path}.image_type: unknown type {type_token!r}") from None
        definition = payload.get("image_definition") or {}
        if not isinstance(definition, Mapping):
            raise MalformedRecord(f"{path}.image_definition: expected an object")
        payload_ref = _opt_str(payload, "payload_ref", path)
        if payload_ref is None:
            raise MalformedRecord(f"{path}.payload_ref: required")
        images.append(
            ImageRef(image_type=image_type, image_definition=definition, payload_ref=payload_ref)
        )

    raw_derived = _expect_mapping(top.get("derived") or {}, "derived")
    _check_keys(raw_derived, ("mechanical", "functional", "application_type"), "derived")
    mechanical = None
    if raw_derived.get("mechanical") is not None:
        payload = _expect_mapping(raw_derived["mechanical"], "derived.mechanical")
        _check_keys(
            payload,
            ("tensile_strength", "modulus", "elongation_at_break", "fracture_behavior"),
            "derived.mechanical",
        )
        mechanical = MechanicalProperties(
            tensile_strength=_opt_quantity(payload, "tensile_strength", "derived.mechanical"),
            modulus=_opt_quantity(payload, "modulus", "derived.mechanical"),
            elongation_at_break=_opt_quantity(payload, "elongation_at_break", "derived.mechanical"),
            fracture_behavior=_opt_str(payload, "fracture_behavior", "derived.mechanical"),
        )
    functional = None
    if raw_derived.get("functional") is not None:
        payload = _expect_mapping(raw_derived["functional"], "derived.functional")
        _check_keys(
            payload,
            (
                "surface_area",
                "porosity",
                "thermal_conductivity",
                "permeability",
                "electrical_conductivity",
                "wettability",
            ),
            "derived.functional",
        )
        functional = FunctionalProperties(
            surface_area=_opt_quantity(payload, "surface_area", "derived.functional"),
            porosity=_opt_quantity(payload, "porosity", "derived.functional"),
            thermal_conductivity=_opt_quantity(payload, "thermal_conductivity", "derived.functional"),
            permeability=_opt_quantity(payload, "permeability", "derived.functional"),
            electrical_conductivity=_opt_quantity(
                payload, "electrical_conductivity", "derived.functional"
            ),
            wettability=_opt_quantity(payload, "wettability", "derived.functional"),
        )
    raw_applications = raw_derived.get("application_type") or []
    if not isinstance(raw_applications, (list, tuple)) or not all(
        isinstance(tag, str) for tag in raw_applications
    ):
        raise MalformedRecord("derived.application_type: expected a list of tags")
    derived = DerivedProperties(
        mechanical=mechanical,
        functional=functional,
        application_types=tuple(raw_applications),
    )

    raw_provenance = _expect_mapping(top.get("provenance") or {}, "provenance")
    _check_keys(
        raw_provenance,
        ("doi", "title", "bibliographic", "contributor_name", "contributor_contact", "source_kind"),
        "provenance",
    )
    source_kind = None
    if raw_provenance.get("source_kind") is not None:
        try:
            source_kind = SourceKind(raw_provenance["source_kind"])
        except ValueError:
            raise MalformedRecord(
                f"provenance.source_kind: unknown kind {raw_provenance['source_kind']!r}"
            ) from None
    provenance = Provenance(
        doi=_opt_str(raw_provenance, "doi", "provenance"),
        title=_opt_str(raw_provenance, "title", "provenance"),
        bibliographic=_opt_str(raw_provenance, "bibliographic", "provenance"),
        contributor_name=_opt_str(raw_provenance, "contributor_name", "provenance"),
        contributor_contact=_opt_str(raw_provenance, "contributor_contact", "provenance"),
        source_kind=source_kind,
    )

    record_id = _opt_str(top, "record_id", "record")

    return ExperimentRecord(
        record_id=record_id,
        polymers=tuple(polymers),
        solvents=tuple(solvents),
        solution=solution,
        process=process,
        ambient=ambient,
        needle=needle,
        collector=collector,
        fiber=fiber,
        morphology=morphology,
        instabilities=tuple(raw_instabilities),
        images=tuple(images),
        derived=derived,
        provenance=provenance,
        vocabulary_version=vocabulary_version,
    )
