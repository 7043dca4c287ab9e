from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from espindata.errors import IncompatibleUnits, MalformedRecord, UnknownUnit
from espindata.records import (
    CANONICAL_FIELD_UNITS,
    normalize_record,
    record_from_doc,
)
from espindata.units import Quantity, convert_quantity, default_registry


def test_si_prefix_conversion():
    assert convert_quantity(Quantity(1, "kV"), "V").value == 1000.0


def test_identity_conversion():
    q = convert_quantity(Quantity(10, "cm"), "cm")
    assert q == Quantity(10.0, "cm")


def test_flow_rate_per_minute_to_per_hour():
    q = convert_quantity(Quantity(0.005, "mL/min"), "mL/h")
    assert q.unit == "mL/h"
    assert q.value == pytest.approx(0.30, abs=1e-12)


def test_kind_mismatch_raises():
    with pytest.raises(IncompatibleUnits):
        convert_quantity(Quantity(1, "kV"), "cm")


def test_unknown_unit_raises():
    with pytest.raises(UnknownUnit):
        convert_quantity(Quantity(1, "furlong"), "cm")
    with pytest.raises(UnknownUnit):
        convert_quantity(Quantity(1, "cm"), "furlong")


def test_same_kind_without_registered_conversion_raises():
    # g/mol shares the mass kind with g but deliberately has no conversion.
    with pytest.raises(IncompatibleUnits):
        convert_quantity(Quantity(1, "g/mol"), "g")


def test_quantity_rejects_non_finite():
    for bad in (float("nan"), float("inf"), float("-inf")):
        with pytest.raises(MalformedRecord):
            Quantity(bad, "kV")


_CONVERTIBLE_PAIRS = [
    (source, target)
    for source in default_registry().symbols()
    for target in default_registry().symbols()
    if source != target and default_registry().convertible(source, target)
]


@given(
    value=st.floats(min_value=1e-6, max_value=1e6, allow_nan=False),
    pair=st.sampled_from(_CONVERTIBLE_PAIRS),
)
def test_round_trip_within_1e9_relative(value, pair):
    source, target = pair
    registry = default_registry()
    there = registry.convert(Quantity(value, source), target)
    back = registry.convert(there, source)
    assert math.isclose(back.value, value, rel_tol=1e-9)


def test_normalize_record_converts_voltage(golden_doc):
    golden_doc["process"]["voltage"] = {"value": 15000.0, "unit": "V"}
    record = normalize_record(record_from_doc(golden_doc))
    assert record.process.voltage == Quantity(15.0, "kV")


def test_normalize_record_converts_distance_mm(golden_doc):
    golden_doc["process"]["tip_collector_distance"] = {"value": 150.0, "unit": "mm"}
    record = normalize_record(record_from_doc(golden_doc))
    assert record.process.tip_collector_distance.unit == "cm"
    assert record.process.tip_collector_distance.value == pytest.approx(15.0, abs=1e-12)


def test_normalize_is_idempotent(golden_doc):
    golden_doc["process"]["voltage"] = {"value": 18500.0, "unit": "V"}
    golden_doc["process"]["flow_rate"] = {"value": 0.02, "unit": "mL/min"}
    once = normalize_record(record_from_doc(golden_doc))
    twice = normalize_record(once)
    assert once == twice


def test_normalize_identity_on_canonical_record(golden_record):
    assert normalize_record(golden_record) == golden_record


def test_normalize_propagates_field_path(golden_doc):
    golden_doc["process"]["voltage"] = {"value": 15.0, "unit": "cm"}
    with pytest.raises(IncompatibleUnits) as excinfo:
        normalize_record(record_from_doc(golden_doc))
    assert "process.voltage" in str(excinfo.value)


def test_canonical_units_all_registered():
    registry = default_registry()
    for target in CANONICAL_FIELD_UNITS.values():
        assert registry.knows(target)
