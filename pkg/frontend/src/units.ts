/** Unit options offered by the entry forms, with canonical conversion.
 *
 * This mirrors the server's registry for exactly the units the form
 * selectors offer; the server remains authoritative for everything else.
 */

export interface UnitOption {
  symbol: string;
  /** multiply by this to express the value in the field's canonical unit */
  toCanonical: number;
}

export const FIELD_UNITS: Record<string, UnitOption[]> = {
  voltage: [
    { symbol: "kV", toCanonical: 1 },
    { symbol: "V", toCanonical: 1e-3 },
  ],
  flow_rate: [
    { symbol: "mL/h", toCanonical: 1 },
    { symbol: "mL/min", toCanonical: 60 },
    { symbol: "µL/h", toCanonical: 1e-3 },
    { symbol: "µL/min", toCanonical: 0.06 },
    { symbol: "L/h", toCanonical: 1e3 },
  ],
  tip_collector_distance: [
    { symbol: "cm", toCanonical: 1 },
    { symbol: "mm", toCanonical: 0.1 },
    { symbol: "m", toCanonical: 100 },
  ],
  spinning_duration: [
    { symbol: "min", toCanonical: 1 },
    { symbol: "h", toCanonical: 60 },
    { symbol: "s", toCanonical: 1 / 60 },
  ],
  concentration: [{ symbol: "wt%", toCanonical: 1 }],
  temperature: [{ symbol: "°C", toCanonical: 1 }],
  humidity: [{ symbol: "%RH", toCanonical: 1 }],
  fiber_diameter: [
    { symbol: "nm", toCanonical: 1 },
    { symbol: "µm", toCanonical: 1e3 },
  ],
  diameter_variation: [{ symbol: "%", toCanonical: 1 }],
};

export function toCanonical(field: string, value: number, unit: string): number | null {
  const option = (FIELD_UNITS[field] ?? []).find((o) => o.symbol === unit);
  return option ? value * option.toCanonical : null;
}

export function defaultUnit(field: string): string {
  return FIELD_UNITS[field]?.[0]?.symbol ?? "";
}

export const NEEDLE_CLASSES = ["single_needle", "multi_needle", "coaxial", "needleless", "other"];

export const COLLECTOR_CLASSES = [
  "flat_plate",
  "rotating_drum",
  "rotating_disk",
  "patterned",
  "liquid_bath",
  "other",
];

export const INSTABILITY_CODES = [
  "jet_breakup",
  "dripping",
  "electrospraying",
  "bead_dominated",
  "jet_instability_whipping_excess",
  "clogging",
  "film_formation",
  "no_jet",
];
