/** Client-side mirror of the validation rule catalog for instant feedback.
 *
 * Evaluates the record document the API will receive, using the same
 * required-element names, rule ids and bounds as the server. The server
 * remains authoritative: anything the client flags the server also flags,
 * and a client-clean document receives no schema/physical violations.
 */

import type { RecordDocument } from "./api.js";
import { FIELD_UNITS, toCanonical } from "./units.js";

export interface ClientFinding {
  ruleId: string;
  fieldPath: string;
  message: string;
}

export const TEMPERATURE_RANGE: [number, number] = [-50, 200];
export const HUMIDITY_RANGE: [number, number] = [0, 100];

interface Quantityish {
  value: number;
  unit: string;
}

function quantity(group: unknown, name: string): Quantityish | null {
  const raw = (group as Record<string, unknown> | null)?.[name];
  if (!raw || typeof raw !== "object") return null;
  const q = raw as Quantityish;
  return Number.isFinite(q.value) && typeof q.unit === "string" ? q : null;
}

function canonicalValue(group: unknown, name: string, field: string): number | null {
  const q = quantity(group, name);
  if (!q) return null;
  return toCanonical(field, q.value, q.unit);
}

export function evaluateDocument(doc: RecordDocument): ClientFinding[] {
  const findings: ClientFinding[] = [];
  const flag = (ruleId: string, fieldPath: string, message: string) =>
    findings.push({ ruleId, fieldPath, message });

  const provenance = (doc.provenance ?? {}) as Record<string, unknown>;
  const hasAttribution = Boolean(provenance.contributor_name && provenance.contributor_contact);
  const hasSource = Boolean(provenance.doi) || hasAttribution;
  const polymers = (doc.polymers as unknown[]) ?? [];
  const solvents = (doc.solvents as unknown[]) ?? [];
  const fiber = (doc.fiber ?? {}) as Record<string, unknown>;
  const hasOutcome =
    quantity(fiber, "fiber_diameter") !== null ||
    Boolean(doc.morphology) ||
    ((doc.instabilities as unknown[]) ?? []).length > 0;

  const required: [string, boolean][] = [
    ["provenance.source", hasSource],
    ["polymers", polymers.length > 0],
    ["solvents", solvents.length > 0],
    ["solution.concentration", quantity(doc.solution, "concentration") !== null],
    ["process.voltage", quantity(doc.process, "voltage") !== null],
    ["process.flow_rate", quantity(doc.process, "flow_rate") !== null],
    [
      "process.tip_collector_distance",
      quantity(doc.process, "tip_collector_distance") !== null,
    ],
    ["needle.config_class", doc.needle !== null && doc.needle !== undefined],
    ["collector.config_class", doc.collector !== null && doc.collector !== undefined],
    ["outcome", hasOutcome],
  ];
  for (const [path, present] of required) {
    if (!present) flag("S-01", path, `required element ${path} is missing`);
  }

  if (!hasAttribution) {
    flag("S-02", "provenance.contributor", "contributor attribution is required");
  }

  const canonicalFields: [string, unknown, string, string][] = [
    ["solution.concentration", doc.solution, "concentration", "concentration"],
    ["process.voltage", doc.process, "voltage", "voltage"],
    ["process.flow_rate", doc.process, "flow_rate", "flow_rate"],
    [
      "process.tip_collector_distance",
      doc.process,
      "tip_collector_distance",
      "tip_collector_distance",
    ],
    ["process.spinning_duration", doc.process, "spinning_duration", "spinning_duration"],
    ["ambient.temperature", doc.ambient, "temperature", "temperature"],
    ["ambient.humidity", doc.ambient, "humidity", "humidity"],
    ["fiber.fiber_diameter", doc.fiber, "fiber_diameter", "fiber_diameter"],
    ["fiber.diameter_variation", doc.fiber, "diameter_variation", "diameter_variation"],
  ];
  for (const [path, group, name, field] of canonicalFields) {
    const q = quantity(group, name);
    if (!q) continue;
    const known = (FIELD_UNITS[field] ?? []).some((o) => o.symbol === q.unit);
    if (!known) flag("S-03", path, `unit ${q.unit} is not usable for ${field}`);
  }

  const voltage = canonicalValue(doc.process, "voltage", "voltage");
  if (voltage !== null && voltage === 0) {
    flag("P-VOLT", "process.voltage", "applied voltage must be non-zero");
  }
  const flow = canonicalValue(doc.process, "flow_rate", "flow_rate");
  if (flow !== null && flow <= 0) {
    flag("P-FLOW", "process.flow_rate", "flow rate must be positive");
  }
  const diameter = canonicalValue(doc.fiber, "fiber_diameter", "fiber_diameter");
  if (diameter !== null && diameter <= 0) {
    flag("P-DIAM", "fiber.fiber_diameter", "fiber diameter must be positive");
  }
  const temperature = canonicalValue(doc.ambient, "temperature", "temperature");
  if (
    temperature !== null &&
    (temperature < TEMPERATURE_RANGE[0] || temperature > TEMPERATURE_RANGE[1])
  ) {
    flag(
      "P-TEMP",
      "ambient.temperature",
      `temperature must lie within [${TEMPERATURE_RANGE[0]}, ${TEMPERATURE_RANGE[1]}] °C`,
    );
  }
  const humidity = canonicalValue(doc.ambient, "humidity", "humidity");
  if (humidity !== null && (humidity < HUMIDITY_RANGE[0] || humidity > HUMIDITY_RANGE[1])) {
    flag(
      "P-HUM",
      "ambient.humidity",
      `humidity must lie within [${HUMIDITY_RANGE[0]}, ${HUMIDITY_RANGE[1]}] %RH`,
    );
  }

  return findings;
}

/** The submit action stays disabled while any required element is missing. */
export function submitBlocked(findings: ClientFinding[]): boolean {
  return findings.some((f) => f.ruleId === "S-01" || f.ruleId === "S-02");
}

export function findingsByPath(findings: ClientFinding[]): Map<string, ClientFinding[]> {
  const map = new Map<string, ClientFinding[]>();
  for (const finding of findings) {
    const existing = map.get(finding.fieldPath) ?? [];
    existing.push(finding);
    map.set(finding.fieldPath, existing);
  }
  return map;
}
