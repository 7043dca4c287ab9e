"""Unit registry, quantities and exact unit conversion.

All numeric measurements reference a shared unit registry by symbol, and
conversion is only defined for explicitly registered same-kind pairs.  The
registered table is generated from per-group scale factors, which keeps
round-trips exact to well below the 1e-9 relative tolerance the rest of
the platform assumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import IncompatibleUnits, MalformedRecord, UnknownUnit


class UnitKind(str, Enum):
    VOLTAGE = "voltage"
    FLOW_RATE = "flow_rate"
    LENGTH = "length"
    TEMPERATURE = "temperature"
    RELATIVE_HUMIDITY = "relative_humidity"
    MASS_FRACTION = "mass_fraction"
    MASS = "mass"
    VISCOSITY = "viscosity"
    SURFACE_TENSION = "surface_tension"
    CONDUCTIVITY = "conductivity"
    PRESSURE_LIKE = "pressure_like"
    FRACTION = "fraction"
    PH = "ph"
    TIME = "time"
    AREA_PER_MASS = "area_per_mass"
    RATE = "rate"


@dataclass(frozen=True)
class Unit:
    """A registered unit.  The symbol doubles as the unit id."""

    symbol: str
    kind: UnitKind

    @property
    def unit_id(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class Quantity:
    """A finite numeric value tagged with a unit symbol."""

    value: float
    unit: str

    def __post_init__(self):
        if not isinstance(self.value, (int, float)) or isinstance(self.value, bool):
            raise MalformedRecord(f"quantity value must be numeric, got {self.value!r}")
        if not math.isfinite(self.value):
            raise MalformedRecord(f"quantity value must be finite, got {self.value!r}")
        object.__setattr__(self, "value", float(self.value))
        if not self.unit or not isinstance(self.unit, str):
            raise MalformedRecord("quantity unit symbol must be a non-empty string")

    def __str__(self) -> str:
        return f"{self.value:g} {self.unit}"


# Convertible groups: symbol -> scale expressed in the group's anchor unit.
# Pairwise conversion factors are derived as scale[from] / scale[to].
_SCALED_GROUPS: dict[UnitKind, dict[str, float]] = {
    UnitKind.VOLTAGE: {"kV": 1.0, "V": 1e-3},
    UnitKind.FLOW_RATE: {
        "mL/h": 1.0,
        "mL/min": 60.0,
        "µL/h": 1e-3,
        "µL/min": 0.06,
        "L/h": 1e3,
    },
    UnitKind.LENGTH: {"m": 100.0, "cm": 1.0, "mm": 0.1, "µm": 1e-4, "nm": 1e-7},
    UnitKind.TIME: {"min": 1.0, "h": 60.0, "s": 1.0 / 60.0},
    UnitKind.MASS: {"g": 1.0, "mg": 1e-3, "kg": 1e3},
    UnitKind.VISCOSITY: {"mPa·s": 1.0, "Pa·s": 1e3, "cP": 1.0},
    UnitKind.SURFACE_TENSION: {"mN/m": 1.0, "N/m": 1e3},
    UnitKind.CONDUCTIVITY: {"S/m": 1.0, "mS/cm": 0.1, "µS/cm": 1e-4},
    UnitKind.PRESSURE_LIKE: {"MPa": 1.0, "kPa": 1e-3, "GPa": 1e3, "Pa": 1e-6},
    UnitKind.RATE: {"g/h": 1.0, "g/min": 60.0},
}

# Units with no registered conversion partner.  g/mol deliberately shares
# the mass kind with g but has no conversion: the unit alone disambiguates
# batch mass from molecular weight and no cross-interpretation is performed.
_SINGLETON_UNITS: dict[str, UnitKind] = {
    "°C": UnitKind.TEMPERATURE,
    "%RH": UnitKind.RELATIVE_HUMIDITY,
    "wt%": UnitKind.MASS_FRACTION,
    "%": UnitKind.FRACTION,
    "deg": UnitKind.FRACTION,
    "g/mol": UnitKind.MASS,
    "m²/g": UnitKind.AREA_PER_MASS,
    "W/(m·K)": UnitKind.CONDUCTIVITY,
    "L/(m²·h)": UnitKind.RATE,
}


class UnitRegistry:
    """Immutable registry of units plus a static pairwise conversion table."""

    def __init__(
        self,
        units: Mapping[str, Unit],
        conversions: Mapping[tuple[str, str], tuple[float, float]],
    ):
        self._units = dict(units)
        self._conversions = dict(conversions)

    def resolve(self, symbol: str) -> Unit:
        unit = self._units.get(symbol)
        if unit is None:
            raise UnknownUnit(f"unit symbol {symbol!r} is not registered")
        return unit

    def knows(self, symbol: str) -> bool:
        return symbol in self._units

    def convertible(self, source: str, target: str) -> bool:
        if source == target:
            return self.knows(source)
        return (source, target) in self._conversions

    def convert(self, quantity: Quantity, target: str) -> Quantity:
        """Convert ``quantity`` to ``target``, exact per the registered factor."""
        source_unit = self.resolve(quantity.unit)
        target_unit = self.resolve(target)
        if quantity.unit == target:
            return Quantity(quantity.value, target)
        if source_unit.kind is not target_unit.kind:
            raise IncompatibleUnits(
                f"cannot convert {quantity.unit!r} ({source_unit.kind.value}) "
                f"to {target!r} ({target_unit.kind.value})"
            )
        entry = self._conversions.get((quantity.unit, target))
        if entry is None:
            raise IncompatibleUnits(
                f"no conversion registered from {quantity.unit!r} to {target!r}"
            )
        factor, offset = entry
        return Quantity(quantity.value * factor + offset, target)

    def symbols(self) -> tuple[str, ...]:
        return tuple(sorted(self._units))

    def units_of_kind(self, kind: UnitKind) -> tuple[str, ...]:
        return tuple(sorted(s for s, u in self._units.items() if u.kind is kind))


def _build_default_registry() -> UnitRegistry:
    units: dict[str, Unit] = {}
    conversions: dict[tuple[str, str], tuple[float, float]] = {}
    for kind, scales in _SCALED_GROUPS.items():
        for symbol in scales:
            units[symbol] = Unit(symbol, kind)
        for src, src_scale in scales.items():
            for dst, dst_scale in scales.items():
                if src != dst:
                    conversions[(src, dst)] = (src_scale / dst_scale, 0.0)
    for symbol, kind in _SINGLETON_UNITS.items():
        units[symbol] = Unit(symbol, kind)
    return UnitRegistry(units, conversions)


_DEFAULT_REGISTRY = _build_default_registry()


def default_registry() -> UnitRegistry:
    return _DEFAULT_REGISTRY


def convert_quantity(
    quantity: Quantity, target: str, registry: UnitRegistry | None = None
) -> Quantity:
    """Module-level convenience for :meth:`UnitRegistry.convert`."""
    return (registry or _DEFAULT_REGISTRY).convert(quantity, target)
