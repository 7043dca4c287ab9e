"""Cogni-EVVR rule catalog: schema rules (S) and physical constraint rules (P).

Violations are data, not exceptions.  The catalog is evaluated in full for
every record (no short-circuiting) and is deterministic for a fixed catalog
version.  Physical bounds are checked on canonical units; fields whose
units cannot be resolved or converted are reported by S-03 and skipped by
the physical rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from .errors import IncompatibleUnits
from .records import (
    CANONICAL_FIELD_UNITS,
    ExperimentRecord,
    iter_quantities,
    record_digest,
    required_element_presence,
)
from .units import Quantity, UnitRegistry, default_registry

CATALOG_VERSION = "1.0"

TEMPERATURE_RANGE_C = (-50.0, 200.0)
HUMIDITY_RANGE_PCT = (0.0, 100.0)


class RuleClass(str, Enum):
    SCHEMA = "schema"
    PHYSICAL = "physical"


class Severity(str, Enum):
    REJECT = "reject"
    FLAG = "flag"


@dataclass(frozen=True)
class RuleDescriptor:
    rule_id: str
    rule_class: RuleClass
    description: str
    severity: Severity = Severity.REJECT


@dataclass(frozen=True)
class Violation:
    rule_id: str
    field_path: str
    observed: str
    message: str

    def to_doc(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "field_path": self.field_path,
            "observed": self.observed,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    record_ref: str
    violations: tuple[Violation, ...]
    passed: bool
    catalog_version: str
    evaluated_at: str

    def to_doc(self) -> dict:
        return {
            "record_ref": self.record_ref,
            "catalog_version": self.catalog_version,
            "passed": self.passed,
            "violations": [v.to_doc() for v in self.violations],
            "evaluated_at": self.evaluated_at,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ValidationReport":
        return cls(
            record_ref=doc["record_ref"],
            violations=tuple(
                Violation(
                    rule_id=v["rule_id"],
                    field_path=v["field_path"],
                    observed=v["observed"],
                    message=v["message"],
                )
                for v in doc["violations"]
            ),
            passed=doc["passed"],
            catalog_version=doc["catalog_version"],
            evaluated_at=doc["evaluated_at"],
        )


_CATALOG = (
    RuleDescriptor("S-01", RuleClass.SCHEMA, "every required schema field is present"),
    RuleDescriptor("S-02", RuleClass.SCHEMA, "contributor attribution is present"),
    RuleDescriptor(
        "S-03",
        RuleClass.SCHEMA,
        "every quantity carries a resolvable, canonically convertible unit",
    ),
    RuleDescriptor("P-VOLT", RuleClass.PHYSICAL, "applied voltage is non-zero"),
    RuleDescriptor("P-FLOW", RuleClass.PHYSICAL, "flow rate is positive"),
    RuleDescriptor("P-DIAM", RuleClass.PHYSICAL, "fiber diameter is positive"),
    RuleDescriptor(
        "P-TEMP",
        RuleClass.PHYSICAL,
        "temperature lies within [-50, 200] °C",
    ),
    RuleDescriptor("P-HUM", RuleClass.PHYSICAL, "humidity lies within [0, 100] %RH"),
)


def rule_catalog() -> tuple[RuleDescriptor, ...]:
    """The full ordered catalog for CATALOG_VERSION."""
    return _CATALOG


def check_s_rules(
    record: ExperimentRecord, registry: UnitRegistry | None = None
) -> list[Violation]:
    """Schema rules: required fields (S-01), attribution (S-02), units (S-03)."""
    registry = registry or default_registry()
    violations: list[Violation] = []

    for path, present in required_element_presence(record).items():
        if not present:
            violations.append(
                Violation(
                    rule_id="S-01",
                    field_path=path,
                    observed="missing",
                    message=f"required element {path!r} is missing",
                )
            )

    if not record.provenance.has_attribution:
        violations.append(
            Violation(
                rule_id="S-02",
                field_path="provenance.contributor",
                observed="missing",
                message="contributor attribution (name and contact) is required",
            )
        )

    for path, quantity in iter_quantities(record):
        if not registry.knows(quantity.unit):
            violations.append(
                Violation(
                    rule_id="S-03",
                    field_path=path,
                    observed=str(quantity),
                    message=f"unit {quantity.unit!r} is not registered",
                )
            )
            continue
        target = _canonical_target(path)
        if target is not None and not registry.convertible(quantity.unit, target):
            violations.append(
                Violation(
                    rule_id="S-03",
                    field_path=path,
                    observed=str(quantity),
                    message=f"unit {quantity.unit!r} is not convertible to canonical {target!r}",
                )
            )

    return violations


def _canonical_target(path: str) -> str | None:
    # Indexed paths (polymers[0].polymer_weight) have no canonical unit.
    return CANONICAL_FIELD_UNITS.get(path)


def _canonical_value(
    quantity: Quantity | None, path: str, registry: UnitRegistry
) -> float | None:
    """Value in the field's canonical unit, or None when absent/unconvertible."""
    if quantity is None:
        return None
    target = CANONICAL_FIELD_UNITS[path]
    try:
        return registry.convert(quantity, target).value
    except IncompatibleUnits:
        return None  # reported by S-03


def check_p_rules(
    record: ExperimentRecord, registry: UnitRegistry | None = None
) -> list[Violation]:
    """Physical constraint rules, evaluated on canonical units.

    Absent optional fields fire nothing; fields guarded out by S-03 are
    skipped here rather than double-reported.
    """
    registry = registry or default_registry()
    violations: list[Violation] = []

    voltage = _canonical_value(record.process.voltage, "process.voltage", registry)
    if voltage is not None and voltage == 0.0:
        violations.append(
            Violation(
                rule_id="P-VOLT",
                field_path="process.voltage",
                observed=f"{voltage:g} kV",
                message="applied voltage must be non-zero (negative polarity is admitted)",
            )
        )

    flow = _canonical_value(record.process.flow_rate, "process.flow_rate", registry)
    if flow is not None and flow <= 0.0:
        violations.append(
            Violation(
                rule_id="P-FLOW",
                field_path="process.flow_rate",
                observed=f"{flow:g} mL/h",
                message="flow rate must be strictly positive",
            )
        )

    diameter = _canonical_value(record.fiber.fiber_diameter, "fiber.fiber_diameter", registry)
    if diameter is not None and diameter <= 0.0:
        violations.append(
            Violation(
                rule_id="P-DIAM",
                field_path="fiber.fiber_diameter",
                observed=f"{diameter:g} nm",
                message="fiber diameter must be strictly positive when reported",
            )
        )

    temperature = _canonical_value(record.ambient.temperature, "ambient.temperature", registry)
    if temperature is not None and not (
        TEMPERATURE_RANGE_C[0] <= temperature <= TEMPERATURE_RANGE_C[1]
    ):
        violations.append(
            Violation(
                rule_id="P-TEMP",
                field_path="ambient.temperature",
                observed=f"{temperature:g} °C",
                message=f"temperature must lie within [{TEMPERATURE_RANGE_C[0]:g}, "
                f"{TEMPERATURE_RANGE_C[1]:g}] °C inclusive",
            )
        )

    humidity = _canonical_value(record.ambient.humidity, "ambient.humidity", registry)
    if humidity is not None and not (
        HUMIDITY_RANGE_PCT[0] <= humidity <= HUMIDITY_RANGE_PCT[1]
    ):
        violations.append(
            Violation(
                rule_id="P-HUM",
                field_path="ambient.humidity",
                observed=f"{humidity:g} %RH",
                message=f"humidity must lie within [{HUMIDITY_RANGE_PCT[0]:g}, "
                f"{HUMIDITY_RANGE_PCT[1]:g}] %RH inclusive",
            )
        )

    return violations


def validate_record(
    record: ExperimentRecord,
    registry: UnitRegistry | None = None,
    record_ref: str | None = None,
) -> ValidationReport:
    """Run the full catalog and return a structured report."""
    registry = registry or default_registry()
    violations = check_s_rules(record, registry) + check_p_rules(record, registry)
    if record_ref is None:
        record_ref = record.record_id or record_digest(record)
    return ValidationReport(
        record_ref=record_ref,
        violations=tuple(violations),
        passed=not violations,
        catalog_version=CATALOG_VERSION,
        evaluated_at=datetime.now(timezone.utc).isoformat(),
    )
