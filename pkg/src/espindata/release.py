"""Immutable, deterministic, versioned dataset releases.

A cut produces four cached artifacts per release label: the canonical
flattened CSV (the artifact release determinism is defined on), a
relational multi-table archive, a spreadsheet rendering generated from the
canonical rows, and the image archive.  Artifacts are byte-deterministic
for a fixed record set: stable field order, minimal number rendering,
UTF-8, fixed archive timestamps and no embedded clock values.  Serving a
release never touches the record store.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from . import emcv, evvr
from .errors import (
    NothingToRelease,
    UnknownArtifact,
    UnknownRelease,
)
from .numfmt import render_number
from .records import ExperimentRecord, canonical_json
from .store import BaseStore, BlobStore, write_deterministic_zip
from .units import Quantity, UnitRegistry, default_registry

# Normative column layout of the flattened dataset artifact.
DATASET_HEADER: tuple[str, ...] = (
    "record_id",
    "doi",
    "polymers",
    "polymer_weight_ratios",
    "solvents",
    "solvent_volume_ratios",
    "concentration_wtpct",
    "viscosity",
    "surface_tension",
    "conductivity",
    "evaporation_rate",
    "ph",
    "voltage_kv",
    "flow_rate_ml_h",
    "distance_cm",
    "duration_min",
    "temperature_c",
    "humidity_pct",
    "needle_class",
    "needle_definition",
    "collector_class",
    "collector_definition",
    "fiber_diameter_nm",
    "diameter_variation_pct",
    "is_formation_stable",
    "fiber_weight",
    "morphology_emcv",
    "instabilities",
    "image_count",
    "tensile_strength",
    "modulus",
    "elongation_at_break",
    "fracture_behavior",
    "surface_area",
    "porosity",
    "thermal_conductivity",
    "permeability",
    "electrical_conductivity",
    "wettability",
    "application_types",
    "vocabulary_version",
)

ARTIFACT_FILES = {
    "manifest": "manifest.json",
    "dataset": "dataset.csv",
    "dataset_xlsx": "dataset.xlsx",
    "tables": "tables.zip",
    "images": "images.zip",
}

_LABEL_RE = re.compile(r"^v(\d+)$")


def _digest(payload: bytes) -> str:
    return "sha256:" + hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class ReleaseManifest:
    label: str
    released_at: str
    record_count: int
    dataset_digest: str
    images_digest: str
    vocabulary_version: str
    catalog_version: str

    def to_doc(self) -> dict:
        return {
            "label": self.label,
            "released_at": self.released_at,
            "record_count": self.record_count,
            "dataset_digest": self.dataset_digest,
            "images_digest": self.images_digest,
            "vocabulary_version": self.vocabulary_version,
            "catalog_version": self.catalog_version,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ReleaseManifest":
        return cls(
            label=doc["label"],
            released_at=doc["released_at"],
            record_count=doc["record_count"],
            dataset_digest=doc["dataset_digest"],
            images_digest=doc["images_digest"],
            vocabulary_version=doc["vocabulary_version"],
            catalog_version=doc["catalog_version"],
        )


# --- flattening ---------------------------------------------------------------

def _canonical_cell(
    quantity: Quantity | None, target: str, registry: UnitRegistry
) -> str:
    if quantity is None:
        return ""
    return render_number(registry.convert(quantity, target).value)


def _unitful_cell(quantity: Quantity | None) -> str:
    if quantity is None:
        return ""
    return f"{render_number(quantity.value)} {quantity.unit}"


def _ratio_cells(ratios: Iterable[float | None]) -> str:
    rendered = ["" if r is None else render_number(r) for r in ratios]
    return ";".join(rendered) if any(rendered) else ""


def _definition_cell(definition: dict) -> str:
    return canonical_json(definition) if definition else ""


def flatten_record(record: ExperimentRecord, registry: UnitRegistry) -> list[str]:
    """One CSV row per experiment; multi-valued groups joined with ';'."""
    mech = record.derived.mechanical
    func = record.derived.functional
    return [
        record.record_id or "",
        record.provenance.doi or "",
        ";".join(c.polymer_id for c in record.polymers),
        _ratio_cells(c.weight_ratio for c in record.polymers),
        ";".join(c.solvent_id for c in record.solvents),
        _ratio_cells(c.volume_ratio for c in record.solvents),
        _canonical_cell(record.solution.concentration, "wt%", registry),
        _unitful_cell(record.solution.viscosity),
        _unitful_cell(record.solution.surface_tension),
        _unitful_cell(record.solution.conductivity),
        _unitful_cell(record.solution.evaporation_rate),
        "" if record.solution.ph is None else render_number(record.solution.ph),
        _canonical_cell(record.process.voltage, "kV", registry),
        _canonical_cell(record.process.flow_rate, "mL/h", registry),
        _canonical_cell(record.process.tip_collector_distance, "cm", registry),
        _canonical_cell(record.process.spinning_duration, "min", registry),
        _canonical_cell(record.ambient.temperature, "°C", registry),
        _canonical_cell(record.ambient.humidity, "%RH", registry),
        record.needle.config_class if record.needle else "",
        _definition_cell(dict(record.needle.definition)) if record.needle else "",
        record.collector.config_class if record.collector else "",
        _definition_cell(dict(record.collector.definition)) if record.collector else "",
        _canonical_cell(record.fiber.fiber_diameter, "nm", registry),
        _canonical_cell(record.fiber.diameter_variation, "%", registry),
        ""
        if record.fiber.is_formation_stable is None
        else ("true" if record.fiber.is_formation_stable else "false"),
        _unitful_cell(record.fiber.fiber_weight),
        emcv.serialize_descriptor(record.morphology) if record.morphology else "",
        ";".join(record.instabilities),
        str(len(record.images)),
        _unitful_cell(mech.tensile_strength) if mech else "",
        _unitful_cell(mech.modulus) if mech else "",
        _unitful_cell(mech.elongation_at_break) if mech else "",
        (mech.fracture_behavior or "") if mech else "",
        _unitful_cell(func.surface_area) if func else "",
        _unitful_cell(func.porosity) if func else "",
        _unitful_cell(func.thermal_conductivity) if func else "",
        _unitful_cell(func.permeability) if func else "",
        _unitful_cell(func.electrical_conductivity) if func else "",
        _unitful_cell(func.wettability) if func else "",
        ";".join(record.derived.application_types),
        record.vocabulary_version,
    ]


def build_dataset_csv(
    records: Sequence[ExperimentRecord], registry: UnitRegistry
) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for record in records:
        writer.writerow(flatten_record(record, registry))
    return buffer.getvalue().encode("utf-8")


# --- relational multi-table archive ---------------------------------------------

def _table_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue().encode("utf-8")


def _quantity_pair(quantity: Quantity | None) -> tuple[str, str]:
    if quantity is None:
        return "", ""
    return render_number(quantity.value), quantity.unit


def build_tables_zip(records: Sequence[ExperimentRecord]) -> bytes:
    """One CSV table per schema group, keyed by record_id."""
    anchor, polymers, solvents, solution, process, ambient = [], [], [], [], [], []
    needles, collectors, fibers, morphology, instability = [], [], [], [], []
    images, mechanical, functional, application = [], [], [], []

    for record in records:
        rid = record.record_id or ""
        p = record.provenance
        anchor.append(
            [
                rid,
                p.doi or "",
                p.title or "",
                p.bibliographic or "",
                p.contributor_name or "",
                p.contributor_contact or "",
                p.source_kind.value,
                record.vocabulary_version,
            ]
        )
        for i, c in enumerate(record.polymers):
            wv, wu = _quantity_pair(c.polymer_weight)
            polymers.append(
                [rid, str(i), c.polymer_id, wv, wu,
                 render_number(c.weight_ratio) if c.weight_ratio is not None else ""]
            )
        for i, c in enumerate(record.solvents):
            wv, wu = _quantity_pair(c.weight)
            solvents.append(
                [rid, str(i), c.solvent_id,
                 render_number(c.volume_ratio) if c.volume_ratio is not None else "", wv, wu]
            )
        s = record.solution
        solution.append(
            [rid]
            + list(_quantity_pair(s.concentration))
            + list(_quantity_pair(s.viscosity))
            + list(_quantity_pair(s.surface_tension))
            + list(_quantity_pair(s.conductivity))
            + list(_quantity_pair(s.evaporation_rate))
            + [render_number(s.ph) if s.ph is not None else ""]
        )
        pr = record.process
        process.append(
            [rid]
            + list(_quantity_pair(pr.voltage))
            + list(_quantity_pair(pr.flow_rate))
            + list(_quantity_pair(pr.tip_collector_distance))
            + list(_quantity_pair(pr.spinning_duration))
        )
        a = record.ambient
        ambient.append(
            [rid] + list(_quantity_pair(a.temperature)) + list(_quantity_pair(a.humidity))
        )
        if record.needle:
            needles.append(
                [rid, record.needle.config_class, _definition_cell(dict(record.needle.definition))]
            )
        if record.collector:
            collectors.append(
                [rid, record.collector.config_class,
                 _definition_cell(dict(record.collector.definition))]
            )
        f = record.fiber
        fibers.append(
            [rid]
            + list(_quantity_pair(f.fiber_diameter))
            + list(_quantity_pair(f.diameter_variation))
            + ["" if f.is_formation_stable is None else ("true" if f.is_formation_stable else "false")]
            + list(_quantity_pair(f.fiber_weight))
        )
        if record.morphology:
            morphology.append(
                [rid, emcv.serialize_descriptor(record.morphology), record.vocabulary_version]
            )
        for i, code in enumerate(record.instabilities):
            instability.append([rid, str(i), code])
        for i, image in enumerate(record.images):
            images.append(
                [rid, str(i), image.image_type.value,
                 _definition_cell(dict(image.image_definition)), image.payload_ref]
            )
        if record.derived.mechanical:
            m = record.derived.mechanical
            mechanical.append(
                [rid]
                + list(_quantity_pair(m.tensile_strength))
                + list(_quantity_pair(m.modulus))
                + list(_quantity_pair(m.elongation_at_break))
                + [m.fracture_behavior or ""]
            )
        if record.derived.functional:
            fn = record.derived.functional
            functional.append(
                [rid]
                + list(_quantity_pair(fn.surface_area))
                + list(_quantity_pair(fn.porosity))
                + list(_quantity_pair(fn.thermal_conductivity))
                + list(_quantity_pair(fn.permeability))
                + list(_quantity_pair(fn.electrical_conductivity))
                + list(_quantity_pair(fn.wettability))
            )
        for i, tag in enumerate(record.derived.application_types):
            application.append([rid, str(i), tag])

    def q_cols(*names: str) -> list[str]:
        columns: list[str] = []
        for name in names:
            columns += [f"{name}_value", f"{name}_unit"]
        return columns

    tables = {
        "experiment_records.csv": _table_csv(
            ["record_id", "doi", "title", "bibliographic", "contributor_name",
             "contributor_contact", "source_kind", "vocabulary_version"],
            anchor,
        ),
        "polymer_components.csv": _table_csv(
            ["record_id", "position", "polymer_id"] + q_cols("polymer_weight") + ["weight_ratio"],
            polymers,
        ),
        "solvent_components.csv": _table_csv(
            ["record_id", "position", "solvent_id", "volume_ratio"] + q_cols("weight"),
            solvents,
        ),
        "solution_properties.csv": _table_csv(
            ["record_id"]
            + q_cols("concentration", "viscosity", "surface_tension", "conductivity",
                     "evaporation_rate")
            + ["ph"],
            solution,
        ),
        "process_parameters.csv": _table_csv(
            ["record_id"]
            + q_cols("voltage", "flow_rate", "tip_collector_distance", "spinning_duration"),
            process,
        ),
        "ambient_parameters.csv": _table_csv(
            ["record_id"] + q_cols("temperature", "humidity"), ambient
        ),
        "needle_properties.csv": _table_csv(
            ["record_id", "needle_type", "needle_definition"], needles
        ),
        "collector_properties.csv": _table_csv(
            ["record_id", "collector_type", "collector_definition"], collectors
        ),
        "fiber_properties.csv": _table_csv(
            ["record_id"]
            + q_cols("fiber_diameter", "diameter_variation")
            + ["is_formation_stable"]
            + q_cols("fiber_weight"),
            fibers,
        ),
        "fiber_morphology.csv": _table_csv(
            ["record_id", "morphology_emcv", "vocabulary_version"], morphology
        ),
        "process_instability.csv": _table_csv(
            ["record_id", "position", "instability_id"], instability
        ),
        "experiment_images.csv": _table_csv(
            ["record_id", "position", "image_type", "image_definition", "payload_ref"],
            images,
        ),
        "mechanical_properties.csv": _table_csv(
            ["record_id"]
            + q_cols("tensile_strength", "modulus", "elongation_at_break")
            + ["fracture_behavior"],
            mechanical,
        ),
        "functional_properties.csv": _table_csv(
            ["record_id"]
            + q_cols("surface_area", "porosity", "thermal_conductivity", "permeability",
                     "electrical_conductivity", "wettability"),
            functional,
        ),
        "application_properties.csv": _table_csv(
            ["record_id", "position", "application_type"], application
        ),
    }
    buffer = io.BytesIO()
    write_deterministic_zip(buffer, list(tables.items()))
    return buffer.getvalue()


# --- image archive --------------------------------------------------------------

def _image_extension(definition: dict) -> str:
    ext = definition.get("file_extension")
    if isinstance(ext, str) and ext:
        return ext.lstrip(".")
    return "bin"


def build_images_zip(records: Sequence[ExperimentRecord], blobs: BlobStore) -> bytes:
    """One directory per record; files named by content hash plus an index."""
    entries: dict[str, bytes] = {}
    index_rows: list[list[str]] = []
    for record in records:
        for image in record.images:
            digest_hex = image.payload_ref.split(":", 1)[1]
            name = f"{record.record_id}/{digest_hex}.{_image_extension(dict(image.image_definition))}"
            if name not in entries:
                entries[name] = blobs.get(image.payload_ref)
            index_rows.append([image.payload_ref, record.record_id or "", name])
    index_rows.sort()
    entries["index.csv"] = _table_csv(["payload_ref", "record_id", "path"], index_rows)
    buffer = io.BytesIO()
    write_deterministic_zip(buffer, list(entries.items()))
    return buffer.getvalue()


# --- spreadsheet rendering --------------------------------------------------------

_PLAIN_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")

_XLSX_CONTENT_TYPES = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
    '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
    '<Default Extension="xml" ContentType="application/xml"/>'
    '<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>'
    '<Override PartName="/xl/worksheets/sheet1.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>'
    "</Types>"
)

_XLSX_RELS = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
    '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>'
    "</Relationships>"
)

_XLSX_WORKBOOK = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    '<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
    'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
    '<sheets><sheet name="dataset" sheetId="1" r:id="rId1"/></sheets></workbook>'
)

_XLSX_WORKBOOK_RELS = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
    '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet1.xml"/>'
    "</Relationships>"
)


def build_xlsx(header: Sequence[str], rows: Iterable[Sequence[str]]) -> bytes:
    """Minimal OOXML workbook with one inline-string worksheet.

    Generated from the canonical rows; numeric-looking cells are written as
    numbers so spreadsheet tools sort and aggregate them natively.
    """
    parts = ['<?xml version="1.0" encoding="UTF-8" standalone="yes"?>']
    parts.append(
        '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">'
    )
    parts.append("<sheetData>")
    for row_number, row in enumerate([list(header)] + [list(r) for r in rows], start=1):
        parts.append(f'<row r="{row_number}">')
        for cell in row:
            if cell == "":
                parts.append('<c t="inlineStr"><is><t/></is></c>')
            elif row_number > 1 and _PLAIN_NUMBER_RE.match(cell):
                parts.append(f"<c><v>{cell}</v></c>")
            else:
                parts.append(f'<c t="inlineStr"><is><t>{escape(cell)}</t></is></c>')
        parts.append("</row>")
    parts.append("</sheetData></worksheet>")
    sheet_xml = "".join(parts)

    buffer = io.BytesIO()
    write_deterministic_zip(
        buffer,
        [
            ("[Content_Types].xml", _XLSX_CONTENT_TYPES.encode("utf-8")),
            ("_rels/.rels", _XLSX_RELS.encode("utf-8")),
            ("xl/workbook.xml", _XLSX_WORKBOOK.encode("utf-8")),
            ("xl/_rels/workbook.xml.rels", _XLSX_WORKBOOK_RELS.encode("utf-8")),
            ("xl/worksheets/sheet1.xml", sheet_xml.encode("utf-8")),
        ],
    )
    return buffer.getvalue()


# --- release manager ----------------------------------------------------------------

class ReleaseManager:
    """Cuts releases and serves their cached artifacts."""

    def __init__(
        self,
        store: BaseStore,
        registry: UnitRegistry | None = None,
        releases_root: str | Path | None = None,
    ):
        self.store = store
        self.registry = registry or default_registry()
        root = releases_root
        if root is None:
            root = getattr(store, "releases_dir", None)
        self._root = Path(root) if root is not None else None
        self._memory: dict[str, dict[str, bytes]] = {}

    # -- artifact persistence (file-backed when the store is) ------------

    def _labels(self) -> list[str]:
        if self._root is None:
            labels = list(self._memory)
        elif self._root.exists():
            labels = [p.name for p in self._root.iterdir() if _LABEL_RE.match(p.name)]
        else:
            labels = []
        return sorted(labels, key=lambda label: int(label[1:]))

    def _write_artifacts(self, label: str, artifacts: dict[str, bytes]) -> None:
        if self._root is None:
            self._memory[label] = dict(artifacts)
            return
        target = self._root / label
        staging = self._root / f".{label}.staging"
        if staging.exists():
            raise NothingToRelease(f"stale staging directory for {label}")
        staging.mkdir(parents=True)
        for filename, payload in artifacts.items():
            (staging / filename).write_bytes(payload)
        staging.rename(target)

    def _read_artifact(self, label: str, filename: str) -> bytes:
        if self._root is None:
            return self._memory[label][filename]
        return (self._root / label / filename).read_bytes()

    # -- operations --------------------------------------------------------

    def cut_release(
        self, force: bool = False, released_at: date | None = None
    ) -> ReleaseManifest:
        """Cut the next release over all accepted records."""
        with self.store.cut_guard():
            records = list(self.store.iter_records())
            if not records:
                raise NothingToRelease("no accepted records to release")
            existing = self.list_releases()
            last_count = existing[-1].record_count if existing else 0
            if not force and len(records) <= last_count:
                raise NothingToRelease(
                    "no accepted records newer than the last release (use force to cut anyway)"
                )
            label = f"v{len(existing) + 1}"

            dataset = build_dataset_csv(records, self.registry)
            rows = [flatten_record(r, self.registry) for r in records]
            xlsx = build_xlsx(DATASET_HEADER, rows)
            tables = build_tables_zip(records)
            images = build_images_zip(records, self.store.blobs)

            manifest = ReleaseManifest(
                label=label,
                released_at=(released_at or date.today()).isoformat(),
                record_count=len(records),
                dataset_digest=_digest(dataset),
                images_digest=_digest(images),
                vocabulary_version=emcv.DEFAULT_VOCABULARY_VERSION,
                catalog_version=evvr.CATALOG_VERSION,
            )
            self._write_artifacts(
                label,
                {
                    ARTIFACT_FILES["manifest"]: canonical_json(manifest.to_doc()).encode("utf-8"),
                    ARTIFACT_FILES["dataset"]: dataset,
                    ARTIFACT_FILES["dataset_xlsx"]: xlsx,
                    ARTIFACT_FILES["tables"]: tables,
                    ARTIFACT_FILES["images"]: images,
                },
            )
            return manifest

    def list_releases(self) -> list[ReleaseManifest]:
        manifests = []
        for label in self._labels():
            doc = json.loads(self._read_artifact(label, ARTIFACT_FILES["manifest"]))
            manifests.append(ReleaseManifest.from_doc(doc))
        return manifests

    def fetch_release(self, label: str, artifact: str) -> bytes:
        """Cached artifact bytes; no store reads are performed."""
        if artifact not in ARTIFACT_FILES:
            raise UnknownArtifact(
                f"unknown artifact {artifact!r}; known: {sorted(ARTIFACT_FILES)}"
            )
        if label not in self._labels():
            raise UnknownRelease(f"release {label!r} does not exist")
        return self._read_artifact(label, ARTIFACT_FILES[artifact])
