"""Filter execution and summary statistics over accepted records.

Filters are a conjunction of set-membership, equipment-class, closed-range,
morphology-term and instability constraints.  Set constraints match if any
component matches; an exclusive mode additionally requires every component
to lie inside the filter set.  Records missing a range-constrained field
are excluded.  Results are ordered by accession id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import emcv
from .errors import IncompatibleUnits, InvalidFilter, EmptySelection, NotFound
from .records import ExperimentRecord
from .store import BaseStore
from .units import Quantity, UnitRegistry, default_registry

# Queryable numeric fields: public key -> (record accessor, canonical unit).
# ph is stored dimensionless.
NUMERIC_FIELDS: dict[str, tuple[str, str | None]] = {
    "voltage": ("process.voltage", "kV"),
    "flow_rate": ("process.flow_rate", "mL/h"),
    "tip_collector_distance": ("process.tip_collector_distance", "cm"),
    "spinning_duration": ("process.spinning_duration", "min"),
    "concentration": ("solution.concentration", "wt%"),
    "temperature": ("ambient.temperature", "°C"),
    "humidity": ("ambient.humidity", "%RH"),
    "fiber_diameter": ("fiber.fiber_diameter", "nm"),
    "diameter_variation": ("fiber.diameter_variation", "%"),
    "ph": ("solution.ph", None),
}

_MORPHOLOGY_AXES = ("shape", "topography", "composition", "texture", "defects")


def _field_quantity(record: ExperimentRecord, dotted: str) -> Quantity | float | None:
    group, name = dotted.split(".", 1)
    return getattr(getattr(record, group), name)


def numeric_field_value(
    record: ExperimentRecord, key: str, registry: UnitRegistry
) -> float | None:
    """The record's canonical value for a queryable field, or None if absent."""
    dotted, target = NUMERIC_FIELDS[key]
    raw = _field_quantity(record, dotted)
    if raw is None:
        return None
    if target is None:
        return float(raw)
    try:
        return registry.convert(raw, target).value
    except IncompatibleUnits:
        return None


@dataclass(frozen=True)
class FilterSpec:
    polymer_ids: frozenset[str] | None = None
    solvent_ids: frozenset[str] | None = None
    needle_class: str | None = None
    collector_class: str | None = None
    ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    morphology_terms: Mapping[str, str] = field(default_factory=dict)
    instability_ids: frozenset[str] | None = None
    has_images: bool | None = None
    exclusive_polymers: bool = False

    def __post_init__(self):
        if self.polymer_ids is not None:
            object.__setattr__(self, "polymer_ids", frozenset(self.polymer_ids))
        if self.solvent_ids is not None:
            object.__setattr__(self, "solvent_ids", frozenset(self.solvent_ids))
        if self.instability_ids is not None:
            object.__setattr__(self, "instability_ids", frozenset(self.instability_ids))
        object.__setattr__(self, "ranges", dict(self.ranges))
        object.__setattr__(self, "morphology_terms", dict(self.morphology_terms))

    def validate(self) -> None:
        for key, bounds in self.ranges.items():
            if key not in NUMERIC_FIELDS:
                raise InvalidFilter(f"unknown range field {key!r}")
            low, high = bounds
            if not (math.isfinite(low) and math.isfinite(high)):
                raise InvalidFilter(f"range for {key!r} must be finite")
            if low > high:
                raise InvalidFilter(f"empty interval for {key!r}: [{low}, {high}]")
        vocab = emcv.vocabulary()
        for axis, term in self.morphology_terms.items():
            if axis not in _MORPHOLOGY_AXES:
                raise InvalidFilter(f"unknown morphology axis {axis!r}")
            if not vocab.is_term(emcv.Axis(axis), term):
                raise InvalidFilter(f"unknown {axis} term {term!r}")

    def to_doc(self) -> dict:
        return {
            "polymer_ids": sorted(self.polymer_ids) if self.polymer_ids is not None else None,
            "solvent_ids": sorted(self.solvent_ids) if self.solvent_ids is not None else None,
            "needle_class": self.needle_class,
            "collector_class": self.collector_class,
            "ranges": {k: list(v) for k, v in sorted(self.ranges.items())},
            "morphology_terms": dict(sorted(self.morphology_terms.items())),
            "instability_ids": sorted(self.instability_ids)
            if self.instability_ids is not None
            else None,
            "has_images": self.has_images,
            "exclusive_polymers": self.exclusive_polymers,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "FilterSpec":
        ranges = {
            key: (float(v[0]), float(v[1])) for key, v in (doc.get("ranges") or {}).items()
        }
        return cls(
            polymer_ids=frozenset(doc["polymer_ids"]) if doc.get("polymer_ids") else None,
            solvent_ids=frozenset(doc["solvent_ids"]) if doc.get("solvent_ids") else None,
            needle_class=doc.get("needle_class"),
            collector_class=doc.get("collector_class"),
            ranges=ranges,
            morphology_terms=dict(doc.get("morphology_terms") or {}),
            instability_ids=frozenset(doc["instability_ids"])
            if doc.get("instability_ids")
            else None,
            has_images=doc.get("has_images"),
            exclusive_polymers=bool(doc.get("exclusive_polymers", False)),
        )


@dataclass(frozen=True)
class FieldSummary:
    n: int
    median: float | None = None
    q1: float | None = None
    q3: float | None = None
    min: float | None = None
    max: float | None = None

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "min": self.min,
            "max": self.max,
        }


@dataclass(frozen=True)
class SummaryStats:
    n: int
    fields: Mapping[str, FieldSummary]
    histogram: tuple[tuple[float, float, int], ...] | None = None

    def to_doc(self) -> dict:
        doc = {
            "n": self.n,
            "fields": {k: v.to_doc() for k, v in self.fields.items()},
        }
        if self.histogram is not None:
            doc["histogram"] = [
                {"lower": lo, "upper": hi, "count": count} for lo, hi, count in self.histogram
            ]
        return doc


def record_summary_doc(record: ExperimentRecord, registry: UnitRegistry) -> dict:
    """Compact listing row for query results (shared by API and CLI)."""
    values = {key: numeric_field_value(record, key, registry) for key in NUMERIC_FIELDS}
    return {
        "record_id": record.record_id,
        "polymers": [c.polymer_id for c in record.polymers],
        "solvents": [c.solvent_id for c in record.solvents],
        "needle_class": record.needle.config_class if record.needle else None,
        "collector_class": record.collector.config_class if record.collector else None,
        "concentration_wtpct": values["concentration"],
        "voltage_kv": values["voltage"],
        "flow_rate_ml_h": values["flow_rate"],
        "distance_cm": values["tip_collector_distance"],
        "fiber_diameter_nm": values["fiber_diameter"],
        "morphology": emcv.serialize_descriptor(record.morphology)
        if record.morphology
        else None,
        "instabilities": list(record.instabilities),
        "image_count": len(record.images),
    }


def quantile_linear(sorted_values: Sequence[float], p: float) -> float:
    """Empirical quantile with linear interpolation at position (n-1)*p."""
    n = len(sorted_values)
    if n == 0:
        raise EmptySelection("quantile of an empty selection")
    if n == 1:
        return sorted_values[0]
    position = (n - 1) * p
    low = int(math.floor(position))
    frac = position - low
    if low + 1 >= n:
        return sorted_values[-1]
    return sorted_values[low] + (sorted_values[low + 1] - sorted_values[low]) * frac


class _Row:
    __slots__ = (
        "record_id",
        "polymers",
        "solvents",
        "needle",
        "collector",
        "values",
        "morphology",
        "defects",
        "instabilities",
        "has_images",
    )

    def __init__(self, record: ExperimentRecord, registry: UnitRegistry):
        self.record_id = record.record_id
        self.polymers = frozenset(c.polymer_id for c in record.polymers)
        self.solvents = frozenset(c.solvent_id for c in record.solvents)
        self.needle = record.needle.config_class if record.needle else None
        self.collector = record.collector.config_class if record.collector else None
        self.values = {
            key: value
            for key in NUMERIC_FIELDS
            if (value := numeric_field_value(record, key, registry)) is not None
        }
        if record.morphology is not None:
            self.morphology = {
                "shape": record.morphology.shape,
                "topography": record.morphology.topography,
                "composition": record.morphology.composition,
                "texture": record.morphology.texture,
            }
            self.defects = record.morphology.defects
        else:
            self.morphology = None
            self.defects = frozenset()
        self.instabilities = frozenset(record.instabilities)
        self.has_images = len(record.images) > 0


class QueryEngine:
    """Read-only query layer over a store; safe for parallel use."""

    def __init__(self, store: BaseStore, registry: UnitRegistry | None = None):
        self.store = store
        self.registry = registry or default_registry()
        self._rows_cache: list[_Row] | None = None
        self._rows_revision: int | None = None

    def _rows(self) -> list[_Row]:
        revision = self.store.revision
        if self._rows_cache is None or self._rows_revision != revision:
            rows = [_Row(record, self.registry) for record in self.store.iter_records()]
            rows.sort(key=lambda row: row.record_id)
            self._rows_cache = rows
            self._rows_revision = revision
        return self._rows_cache

    def _row_map(self) -> dict[str, _Row]:
        return {row.record_id: row for row in self._rows()}

    def execute_filter(self, spec: FilterSpec) -> list[str]:
        """Record ids satisfying the conjunction of all constraints."""
        spec.validate()
        matched: list[str] = []
        for row in self._rows():
            if self._matches(row, spec):
                matched.append(row.record_id)
        return matched

    @staticmethod
    def _matches(row: _Row, spec: FilterSpec) -> bool:
        if spec.polymer_ids is not None:
            if not (row.polymers & spec.polymer_ids):
                return False
            if spec.exclusive_polymers and not row.polymers <= spec.polymer_ids:
                return False
        if spec.solvent_ids is not None and not (row.solvents & spec.solvent_ids):
            return False
        if spec.needle_class is not None and row.needle != spec.needle_class:
            return False
        if spec.collector_class is not None and row.collector != spec.collector_class:
            return False
        for key, (low, high) in spec.ranges.items():
            value = row.values.get(key)
            if value is None or not (low <= value <= high):
                return False
        for axis, term in spec.morphology_terms.items():
            if axis == "defects":
                if term not in row.defects:
                    return False
            else:
                if row.morphology is None or row.morphology.get(axis) != term:
                    return False
        if spec.instability_ids is not None and not (
            row.instabilities & spec.instability_ids
        ):
            return False
        if spec.has_images is not None and row.has_images != spec.has_images:
            return False
        return True

    def summarize(
        self,
        record_ids: Iterable[str],
        fields: Sequence[str],
        histogram_field: str | None = None,
        bins: int | None = None,
    ) -> SummaryStats:
        """Median/quartile/extrema per field; records missing a field are dropped."""
        ids = list(record_ids)
        for key in fields:
            if key not in NUMERIC_FIELDS:
                raise InvalidFilter(f"unknown numeric field {key!r}")
        rows = self._resolve_rows(ids)
        summaries: dict[str, FieldSummary] = {}
        any_values = False
        for key in fields:
            values = sorted(row.values[key] for row in rows if key in row.values)
            if not values:
                summaries[key] = FieldSummary(n=0)
                continue
            any_values = True
            summaries[key] = FieldSummary(
                n=len(values),
                median=quantile_linear(values, 0.5),
                q1=quantile_linear(values, 0.25),
                q3=quantile_linear(values, 0.75),
                min=values[0],
                max=values[-1],
            )
        if fields and not any_values:
            raise EmptySelection("no values for any requested field")
        histogram = None
        if histogram_field is not None:
            histogram = tuple(self.histogram(ids, histogram_field, bins or 10))
        return SummaryStats(n=len(ids), fields=summaries, histogram=histogram)

    def _resolve_rows(self, record_ids: Iterable[str]) -> list[_Row]:
        row_map = self._row_map()
        rows = []
        for record_id in record_ids:
            row = row_map.get(record_id)
            if row is None:
                raise NotFound(f"record {record_id!r} not found")
            rows.append(row)
        return rows

    def histogram(
        self, record_ids: Iterable[str], field_key: str, bins: int
    ) -> list[tuple[float, float, int]]:
        """Equal-width bins over [min, max]; right-open except the last."""
        if field_key not in NUMERIC_FIELDS:
            raise InvalidFilter(f"unknown numeric field {field_key!r}")
        if bins < 1:
            raise InvalidFilter(f"bins must be >= 1, got {bins}")
        values = [
            row.values[field_key]
            for row in self._resolve_rows(record_ids)
            if field_key in row.values
        ]
        if not values:
            raise EmptySelection(f"no values for field {field_key!r}")
        low, high = min(values), max(values)
        if low == high:
            return [(low, high, len(values))]
        width = (high - low) / bins
        counts = [0] * bins
        for value in values:
            index = min(int((value - low) / width), bins - 1)
            counts[index] += 1
        edges = [low + i * width for i in range(bins)] + [high]
        return [(edges[i], edges[i + 1], counts[i]) for i in range(bins)]
