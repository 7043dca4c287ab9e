"""Cogni-EMCV morphology vocabulary: term registries, grammar and codec.

A morphology value spans seven axes in a fixed canonical order: shape,
topography, size, size variation, composition, texture, defects.  The five
categorical axes draw from finite versioned term sets; the two size axes
hold continuous measurements (nm and percent).  The wire form is a
pipe-delimited string::

    descriptor = field "|" field "|" size "|" sizevar "|" field "|" field "|" defects
    field      = term / "-"
    size       = number / "-"
    sizevar    = number / "-"
    defects    = term *("," term) / "-"

Missing axes are encoded as ``-``.  Term matching is exact and
case-sensitive after trimming surrounding whitespace; near-miss
suggestions are advisory only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import (
    DuplicateDefect,
    InvalidNumber,
    MalformedDescriptor,
    UnknownTerm,
    VersionUnknown,
)
from .numfmt import parse_number, render_number

DEFAULT_VOCABULARY_VERSION = "1.0"

FIELD_COUNT = 7

# Canonical axis order of the pipe-delimited form.  Quantitative axes sit
# between topography and composition.
CANONICAL_AXES = (
    "shape",
    "topography",
    "size",
    "size_variation",
    "composition",
    "texture",
    "defects",
)

_RESERVED_CHARS = ("|", ",")


class Axis(str, Enum):
    """The categorical axes (the two size axes are quantitative)."""

    SHAPE = "shape"
    TOPOGRAPHY = "topography"
    COMPOSITION = "composition"
    TEXTURE = "texture"
    DEFECTS = "defects"


@dataclass(frozen=True)
class Vocabulary:
    """An immutable versioned snapshot of the categorical term sets."""

    version: str
    terms: Mapping[Axis, tuple[str, ...]]

    def __post_init__(self):
        for axis in Axis:
            if axis not in self.terms:
                raise VersionUnknown(f"vocabulary {self.version!r} lacks axis {axis.value}")
        for axis, terms in self.terms.items():
            for term in terms:
                if any(ch in term for ch in _RESERVED_CHARS):
                    raise MalformedDescriptor(
                        f"term {term!r} contains a reserved delimiter character"
                    )

    def axis_terms(self, axis: Axis) -> tuple[str, ...]:
        return tuple(self.terms[axis])

    def is_term(self, axis: Axis, token: str) -> bool:
        return token in self.terms[axis]

    def suggest(self, axis: Axis, token: str) -> str | None:
        """Nearest-match suggestion: case-insensitive hit, then edit distance <= 2."""
        lowered = token.lower()
        for term in self.terms[axis]:
            if term.lower() == lowered:
                return term
        best: tuple[int, str] | None = None
        for term in self.terms[axis]:
            distance = _edit_distance(token, term, limit=2)
            if distance is not None and (best is None or distance < best[0]):
                best = (distance, term)
        return best[1] if best else None


def _edit_distance(a: str, b: str, limit: int) -> int | None:
    """Levenshtein distance, or None once it provably exceeds ``limit``."""
    if abs(len(a) - len(b)) > limit:
        return None
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        if min(current) > limit:
            return None
        previous = current
    return previous[-1] if previous[-1] <= limit else None


def _load_builtin() -> Vocabulary:
    payload = json.loads(
        resources.files("espindata.resources").joinpath("emcv-1.0.json").read_text("utf-8")
    )
    return _vocabulary_from_doc(payload)


def _vocabulary_from_doc(payload: dict) -> Vocabulary:
    terms = {Axis(entry["axis"]): tuple(entry["terms"]) for entry in payload["axes"]}
    return Vocabulary(version=payload["version"], terms=terms)


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Load a vocabulary snapshot from a registry file (overrides the built-in)."""
    payload = json.loads(Path(path).read_text("utf-8"))
    vocabulary = _vocabulary_from_doc(payload)
    register_vocabulary(vocabulary)
    return vocabulary


_VOCABULARIES: dict[str, Vocabulary] = {}


def register_vocabulary(vocabulary: Vocabulary) -> None:
    _VOCABULARIES[vocabulary.version] = vocabulary


def vocabulary(version: str = DEFAULT_VOCABULARY_VERSION) -> Vocabulary:
    try:
        return _VOCABULARIES[version]
    except KeyError:
        raise VersionUnknown(f"vocabulary version {version!r} is not registered") from None


register_vocabulary(_load_builtin())


@dataclass(frozen=True)
class MorphologyDescriptor:
    """A seven-axis morphology value.

    Defects are an order-insensitive set.  An all-missing descriptor is a
    legal value of the grammar but carries no information; callers that
    attach descriptors to records reject it via :meth:`is_empty`.
    """

    shape: str | None = None
    topography: str | None = None
    size_nm: float | None = None
    size_variation_pct: float | None = None
    composition: str | None = None
    texture: str | None = None
    defects: frozenset[str] = field(default_factory=frozenset)
    vocabulary_version: str = DEFAULT_VOCABULARY_VERSION

    def __post_init__(self):
        object.__setattr__(self, "defects", frozenset(self.defects))
        vocab = vocabulary(self.vocabulary_version)
        for axis, token in (
            (Axis.SHAPE, self.shape),
            (Axis.TOPOGRAPHY, self.topography),
            (Axis.COMPOSITION, self.composition),
            (Axis.TEXTURE, self.texture),
        ):
            if token is not None and not vocab.is_term(axis, token):
                raise UnknownTerm(axis.value, token, vocab.suggest(axis, token))
        for token in self.defects:
            if not vocab.is_term(Axis.DEFECTS, token):
                raise UnknownTerm(Axis.DEFECTS.value, token, vocab.suggest(Axis.DEFECTS, token))
        if self.size_nm is not None:
            if not math.isfinite(self.size_nm) or self.size_nm <= 0:
                raise InvalidNumber(f"size must be a positive number of nm, got {self.size_nm!r}")
        if self.size_variation_pct is not None:
            if not math.isfinite(self.size_variation_pct) or self.size_variation_pct < 0:
                raise InvalidNumber(
                    f"size variation must be a non-negative percentage, got {self.size_variation_pct!r}"
                )

    def is_empty(self) -> bool:
        return (
            self.shape is None
            and self.topography is None
            and self.size_nm is None
            and self.size_variation_pct is None
            and self.composition is None
            and self.texture is None
            and not self.defects
        )


def _parse_term(vocab: Vocabulary, axis: Axis, token: str) -> str | None:
    if token == "-":
        return None
    if not vocab.is_term(axis, token):
        raise UnknownTerm(axis.value, token, vocab.suggest(axis, token))
    return token


def _parse_size(name: str, token: str, minimum_exclusive: bool) -> float | None:
    if token == "-":
        return None
    try:
        value = parse_number(token)
    except InvalidNumber:
        raise InvalidNumber(f"{name} field is not a plain decimal number: {token!r}") from None
    if minimum_exclusive and value <= 0:
        raise InvalidNumber(f"{name} must be positive, got {token!r}")
    if not minimum_exclusive and value < 0:
        raise InvalidNumber(f"{name} must be non-negative, got {token!r}")
    return value


def parse_descriptor(text: str, vocab: Vocabulary | None = None) -> MorphologyDescriptor:
    """Parse a pipe-delimited morphology string into a descriptor value."""
    vocab = vocab or vocabulary()
    fields = [part.strip() for part in text.split("|")]
    if len(fields) != FIELD_COUNT:
        raise MalformedDescriptor(
            f"descriptor must have exactly {FIELD_COUNT} pipe-delimited fields, got {len(fields)}"
        )
    shape = _parse_term(vocab, Axis.SHAPE, fields[0])
    topography = _parse_term(vocab, Axis.TOPOGRAPHY, fields[1])
    size = _parse_size("size", fields[2], minimum_exclusive=True)
    variation = _parse_size("size_variation", fields[3], minimum_exclusive=False)
    composition = _parse_term(vocab, Axis.COMPOSITION, fields[4])
    texture = _parse_term(vocab, Axis.TEXTURE, fields[5])

    defects: list[str] = []
    if fields[6] != "-":
        for raw in fields[6].split(","):
            token = raw.strip()
            if not vocab.is_term(Axis.DEFECTS, token):
                raise UnknownTerm(Axis.DEFECTS.value, token, vocab.suggest(Axis.DEFECTS, token))
            if token in defects:
                raise DuplicateDefect(f"defect {token!r} listed more than once")
            defects.append(token)

    return MorphologyDescriptor(
        shape=shape,
        topography=topography,
        size_nm=size,
        size_variation_pct=variation,
        composition=composition,
        texture=texture,
        defects=frozenset(defects),
        vocabulary_version=vocab.version,
    )


def serialize_descriptor(descriptor: MorphologyDescriptor) -> str:
    """Emit the canonical string form: ``-`` for missing axes, defects sorted."""
    parts = [
        descriptor.shape or "-",
        descriptor.topography or "-",
        render_number(descriptor.size_nm) if descriptor.size_nm is not None else "-",
        render_number(descriptor.size_variation_pct)
        if descriptor.size_variation_pct is not None
        else "-",
        descriptor.composition or "-",
        descriptor.texture or "-",
        ",".join(sorted(descriptor.defects)) if descriptor.defects else "-",
    ]
    return "|".join(parts)


@dataclass(frozen=True)
class UnknownTermFinding:
    """An advisory validation finding (not an error)."""

    axis: str
    token: str
    suggestion: str | None = None


def validate_terms(
    tokens: Mapping[Axis | str, str], vocab: Vocabulary | None = None
) -> list[UnknownTermFinding]:
    """Check tokens against their axis registries; empty list means all known."""
    vocab = vocab or vocabulary()
    findings: list[UnknownTermFinding] = []
    for axis_key, token in tokens.items():
        axis = Axis(axis_key)
        if not vocab.is_term(axis, token):
            findings.append(UnknownTermFinding(axis.value, token, vocab.suggest(axis, token)))
    return findings


def vocabulary_manifest(version: str = DEFAULT_VOCABULARY_VERSION) -> dict:
    """Full registry document for a registered version, in canonical axis order."""
    vocab = vocabulary(version)
    axes = []
    for name in CANONICAL_AXES:
        if name == "size":
            axes.append({"axis": "size", "kind": "quantitative", "unit": "nm"})
        elif name == "size_variation":
            axes.append({"axis": "size_variation", "kind": "quantitative", "unit": "%"})
        else:
            axis = Axis(name)
            axes.append(
                {
                    "axis": axis.value,
                    "kind": "categorical",
                    "multi_valued": axis is Axis.DEFECTS,
                    "terms": list(vocab.axis_terms(axis)),
                }
            )
    return {"version": vocab.version, "axes": axes}
