/** Form model mirroring the canonical record document.
 *
 * Entry state is kept as strings (what the user typed) plus unit
 * selections; `toRecordDocument` produces the document the API receives,
 * skipping blank optional entries.
 */

import type { RecordDocument } from "./api.js";
import { MorphologyPick, emptyPick, isEmptyPick, serializePick } from "./morphology.js";
import { defaultUnit } from "./units.js";

export interface QuantityEntry {
  value: string;
  unit: string;
}

export interface PolymerEntry {
  polymerId: string;
  weightRatio: string;
}

export interface SolventEntry {
  solventId: string;
  volumeRatio: string;
}

export interface FormState {
  polymers: PolymerEntry[];
  solvents: SolventEntry[];
  concentration: QuantityEntry;
  ph: string;
  voltage: QuantityEntry;
  flowRate: QuantityEntry;
  distance: QuantityEntry;
  duration: QuantityEntry;
  temperature: QuantityEntry;
  humidity: QuantityEntry;
  needleClass: string;
  collectorClass: string;
  fiberDiameter: QuantityEntry;
  diameterVariation: QuantityEntry;
  formationStable: "" | "true" | "false";
  morphology: MorphologyPick;
  instabilities: string[];
  doi: string;
  title: string;
  attributionName: string;
  attributionContact: string;
}

export function emptyForm(): FormState {
  const entry = (field: string): QuantityEntry => ({ value: "", unit: defaultUnit(field) });
  return {
    polymers: [{ polymerId: "", weightRatio: "" }],
    solvents: [{ solventId: "", volumeRatio: "" }],
    concentration: entry("concentration"),
    ph: "",
    voltage: entry("voltage"),
    flowRate: entry("flow_rate"),
    distance: entry("tip_collector_distance"),
    duration: entry("spinning_duration"),
    temperature: entry("temperature"),
    humidity: entry("humidity"),
    needleClass: "",
    collectorClass: "",
    fiberDiameter: entry("fiber_diameter"),
    diameterVariation: entry("diameter_variation"),
    formationStable: "",
    morphology: emptyPick(),
    instabilities: [],
    doi: "",
    title: "",
    attributionName: "",
    attributionContact: "",
  };
}

function parseEntry(entry: QuantityEntry): { value: number; unit: string } | null {
  const text = entry.value.trim();
  if (!text) return null;
  const value = Number(text);
  if (!Number.isFinite(value)) return null;
  return { value, unit: entry.unit };
}

/** All quantity entries with text that does not parse as a number. */
export function invalidNumericEntries(state: FormState): string[] {
  const bad: string[] = [];
  const check = (name: string, entry: QuantityEntry) => {
    if (entry.value.trim() && !Number.isFinite(Number(entry.value))) bad.push(name);
  };
  check("solution.concentration", state.concentration);
  check("process.voltage", state.voltage);
  check("process.flow_rate", state.flowRate);
  check("process.tip_collector_distance", state.distance);
  check("process.spinning_duration", state.duration);
  check("ambient.temperature", state.temperature);
  check("ambient.humidity", state.humidity);
  check("fiber.fiber_diameter", state.fiberDiameter);
  check("fiber.diameter_variation", state.diameterVariation);
  if (state.ph.trim() && !Number.isFinite(Number(state.ph))) bad.push("solution.ph");
  return bad;
}

export function toRecordDocument(state: FormState): RecordDocument {
  const ratio = (text: string): number | null => {
    const trimmed = text.trim();
    if (!trimmed) return null;
    const value = Number(trimmed);
    return Number.isFinite(value) ? value : null;
  };
  const polymers = state.polymers
    .filter((p) => p.polymerId.trim())
    .map((p) => ({
      polymer_id: p.polymerId.trim(),
      polymer_weight: null,
      weight_ratio: ratio(p.weightRatio),
    }));
  const solvents = state.solvents
    .filter((s) => s.solventId.trim())
    .map((s) => ({
      solvent_id: s.solventId.trim(),
      volume_ratio: ratio(s.volumeRatio),
      weight: null,
    }));
  return {
    record_id: null,
    polymers,
    solvents,
    solution: {
      concentration: parseEntry(state.concentration),
      viscosity: null,
      surface_tension: null,
      conductivity: null,
      evaporation_rate: null,
      ph: state.ph.trim() ? Number(state.ph) : null,
    },
    process: {
      voltage: parseEntry(state.voltage),
      flow_rate: parseEntry(state.flowRate),
      tip_collector_distance: parseEntry(state.distance),
      spinning_duration: parseEntry(state.duration),
    },
    ambient: {
      temperature: parseEntry(state.temperature),
      humidity: parseEntry(state.humidity),
    },
    needle: state.needleClass
      ? { needle_type: state.needleClass, needle_definition: {} }
      : null,
    collector: state.collectorClass
      ? { collector_type: state.collectorClass, collector_definition: {} }
      : null,
    fiber: {
      fiber_diameter: parseEntry(state.fiberDiameter),
      diameter_variation: parseEntry(state.diameterVariation),
      is_formation_stable: state.formationStable ? state.formationStable === "true" : null,
      fiber_weight: null,
    },
    morphology: isEmptyPick(state.morphology) ? null : serializePick(state.morphology),
    instabilities: [...state.instabilities],
    images: [],
    derived: { mechanical: null, functional: null, application_type: [] },
    provenance: {
      doi: state.doi.trim() || null,
      title: state.title.trim() || null,
      bibliographic: null,
      contributor_name: state.attributionName.trim() || null,
      contributor_contact: state.attributionContact.trim() || null,
      source_kind: null,
    },
    vocabulary_version: "1.0",
  };
}

export function attributionOf(state: FormState): { name: string; contact: string } {
  return { name: state.attributionName.trim(), contact: state.attributionContact.trim() };
}

/** Prefill a form from an existing record document (revision flow). */
export function docToForm(doc: RecordDocument): FormState {
  const state = emptyForm();
  const quantity = (raw: unknown, field: string): QuantityEntry => {
    const q = raw as { value: number; unit: string } | null;
    if (!q) return { value: "", unit: defaultUnit(field) };
    return { value: String(q.value), unit: q.unit };
  };
  const polymers = (doc.polymers as { polymer_id: string; weight_ratio: number | null }[]) ?? [];
  if (polymers.length) {
    state.polymers = polymers.map((p) => ({
      polymerId: p.polymer_id,
      weightRatio: p.weight_ratio === null ? "" : String(p.weight_ratio),
    }));
  }
  const solvents = (doc.solvents as { solvent_id: string; volume_ratio: number | null }[]) ?? [];
  if (solvents.length) {
    state.solvents = solvents.map((s) => ({
      solventId: s.solvent_id,
      volumeRatio: s.volume_ratio === null ? "" : String(s.volume_ratio),
    }));
  }
  const solution = (doc.solution ?? {}) as Record<string, unknown>;
  state.concentration = quantity(solution.concentration, "concentration");
  state.ph = solution.ph === null || solution.ph === undefined ? "" : String(solution.ph);
  const process = (doc.process ?? {}) as Record<string, unknown>;
  state.voltage = quantity(process.voltage, "voltage");
  state.flowRate = quantity(process.flow_rate, "flow_rate");
  state.distance = quantity(process.tip_collector_distance, "tip_collector_distance");
  state.duration = quantity(process.spinning_duration, "spinning_duration");
  const ambient = (doc.ambient ?? {}) as Record<string, unknown>;
  state.temperature = quantity(ambient.temperature, "temperature");
  state.humidity = quantity(ambient.humidity, "humidity");
  const needle = doc.needle as { needle_type: string } | null;
  state.needleClass = needle?.needle_type ?? "";
  const collector = doc.collector as { collector_type: string } | null;
  state.collectorClass = collector?.collector_type ?? "";
  const fiber = (doc.fiber ?? {}) as Record<string, unknown>;
  state.fiberDiameter = quantity(fiber.fiber_diameter, "fiber_diameter");
  state.diameterVariation = quantity(fiber.diameter_variation, "diameter_variation");
  state.formationStable =
    fiber.is_formation_stable === null || fiber.is_formation_stable === undefined
      ? ""
      : fiber.is_formation_stable
        ? "true"
        : "false";
  const morphology = doc.morphology as string | null;
  if (morphology) {
    const [shape, topography, size, variation, composition, texture, defects] =
      morphology.split("|");
    state.morphology = {
      shape: shape === "-" ? null : (shape ?? null),
      topography: topography === "-" ? null : (topography ?? null),
      sizeNm: size === "-" || size === undefined ? null : Number(size),
      sizeVariationPct: variation === "-" || variation === undefined ? null : Number(variation),
      composition: composition === "-" ? null : (composition ?? null),
      texture: texture === "-" ? null : (texture ?? null),
      defects: defects === "-" || defects === undefined ? [] : defects.split(","),
    };
  }
  state.instabilities = [...((doc.instabilities as string[]) ?? [])];
  const provenance = (doc.provenance ?? {}) as Record<string, unknown>;
  state.doi = (provenance.doi as string | null) ?? "";
  state.title = (provenance.title as string | null) ?? "";
  state.attributionName = (provenance.contributor_name as string | null) ?? "";
  state.attributionContact = (provenance.contributor_contact as string | null) ?? "";
  return state;
}
