/** Morphology axis picker model and its canonical string encoding.
 *
 * The picker constrains categorical axes to the server-provided
 * vocabulary; serialization follows the canonical axis order with "-" for
 * missing axes and lexicographically sorted, comma-joined defect codes so
 * the output always parses server-side.
 */

import type { VocabularyManifest } from "./api.js";

export interface MorphologyPick {
  shape: string | null;
  topography: string | null;
  sizeNm: number | null;
  sizeVariationPct: number | null;
  composition: string | null;
  texture: string | null;
  defects: string[];
}

export function emptyPick(): MorphologyPick {
  return {
    shape: null,
    topography: null,
    sizeNm: null,
    sizeVariationPct: null,
    composition: null,
    texture: null,
    defects: [],
  };
}

export function isEmptyPick(pick: MorphologyPick): boolean {
  return (
    pick.shape === null &&
    pick.topography === null &&
    pick.sizeNm === null &&
    pick.sizeVariationPct === null &&
    pick.composition === null &&
    pick.texture === null &&
    pick.defects.length === 0
  );
}

export function axisTerms(vocabulary: VocabularyManifest, axis: string): string[] {
  return vocabulary.axes.find((a) => a.axis === axis)?.terms ?? [];
}

/** Minimal plain-decimal rendering (no exponent notation). */
export function renderNumber(value: number): string {
  if (!Number.isFinite(value)) throw new Error(`cannot render ${value}`);
  if (Number.isInteger(value) && Math.abs(value) < 1e15) return String(value);
  const text = String(value);
  if (!text.includes("e") && !text.includes("E")) return text;
  // expand the rare exponent case into plain decimal
  return value.toFixed(20).replace(/0+$/, "").replace(/\.$/, "");
}

export function serializePick(pick: MorphologyPick): string {
  const parts = [
    pick.shape ?? "-",
    pick.topography ?? "-",
    pick.sizeNm !== null ? renderNumber(pick.sizeNm) : "-",
    pick.sizeVariationPct !== null ? renderNumber(pick.sizeVariationPct) : "-",
    pick.composition ?? "-",
    pick.texture ?? "-",
    pick.defects.length ? [...pick.defects].sort().join(",") : "-",
  ];
  return parts.join("|");
}

export function validatePick(pick: MorphologyPick, vocabulary: VocabularyManifest): string[] {
  const problems: string[] = [];
  const check = (axis: string, term: string | null) => {
    if (term !== null && !axisTerms(vocabulary, axis).includes(term)) {
      problems.push(`unknown ${axis} term: ${term}`);
    }
  };
  check("shape", pick.shape);
  check("topography", pick.topography);
  check("composition", pick.composition);
  check("texture", pick.texture);
  const known = axisTerms(vocabulary, "defects");
  const seen = new Set<string>();
  for (const defect of pick.defects) {
    if (!known.includes(defect)) problems.push(`unknown defect term: ${defect}`);
    if (seen.has(defect)) problems.push(`duplicate defect: ${defect}`);
    seen.add(defect);
  }
  if (pick.sizeNm !== null && !(pick.sizeNm > 0)) problems.push("size must be positive");
  if (pick.sizeVariationPct !== null && pick.sizeVariationPct < 0) {
    problems.push("size variation must be non-negative");
  }
  return problems;
}
