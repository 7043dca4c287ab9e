/** Secondary acceptance criterion: UI/server agreement.
 *
 * Over a generated corpus of 100 form states, every field the client
 * flags is also violated server-side, client-clean forms submit without
 * any schema/physical violation, and morphology picker output parses
 * server-side in 100/100 cases.
 */

import { beforeAll, describe, expect, inject, it } from "vitest";

import { api } from "../src/api.js";
import { setApiBase } from "../src/config.js";
import { attributionOf, toRecordDocument } from "../src/form.js";
import { serializePick, validatePick } from "../src/morphology.js";
import { evaluateDocument } from "../src/rules.js";
import { MUTATIONS, pick, rng, validForm } from "./helpers.js";

const MUTATION_NAMES = Object.keys(MUTATIONS) as (keyof typeof MUTATIONS)[];

beforeAll(() => {
  setApiBase(inject("apiBase"));
});

describe("UI/server agreement", () => {
  it("client-flagged fields are a subset of server violations (100 form states)", async () => {
    const random = rng(1001);
    const token = inject("contribToken");
    let clean = 0;
    let flagged = 0;
    for (let index = 0; index < 100; index++) {
      const state = validForm(random, index);
      const mutationCount = Math.floor(random() * 3);
      for (let m = 0; m < mutationCount; m++) {
        MUTATIONS[pick(random, MUTATION_NAMES)]!(state);
      }
      const doc = toRecordDocument(state);
      const clientPairs = new Set(
        evaluateDocument(doc).map((f) => `${f.ruleId}@${f.fieldPath}`),
      );
      const result = await api.submitRecord(doc, attributionOf(state), token);

      if (result.ok) {
        clean++;
        // server accepted: the client must not have flagged anything
        expect([...clientPairs]).toEqual([]);
        expect(result.body.validation?.passed).toBe(true);
        continue;
      }
      flagged++;
      if (result.error.code === "missing_attribution") {
        // surfaced before validation (no report to compare against); the
        // client must have flagged the attribution rule, and the wizard
        // disables submission for exactly these states
        expect(clientPairs.has("S-02@provenance.contributor")).toBe(true);
        continue;
      }
      expect(result.error.code).toBe("validation_failed");
      const serverPairs = new Set(
        (result.error.violations?.violations ?? []).map(
          (v) => `${v.rule_id}@${v.field_path}`,
        ),
      );
      for (const pair of clientPairs) {
        expect(serverPairs.has(pair), `client flagged ${pair} but server did not`).toBe(true);
      }
    }
    // the corpus must exercise both outcomes
    expect(clean).toBeGreaterThan(10);
    expect(flagged).toBeGreaterThan(10);
  }, 120_000);

  it("morphology picker output parses server-side in 100/100 cases", async () => {
    const random = rng(2002);
    const token = inject("contribToken");
    const vocabulary = await api.vocabulary();
    const terms = (axis: string) =>
      vocabulary.axes.find((a) => a.axis === axis)?.terms ?? [];

    let parsed = 0;
    for (let index = 0; index < 100; index++) {
      const morphology = {
        shape: random() < 0.7 ? pick(random, terms("shape")) : null,
        topography: random() < 0.7 ? pick(random, terms("topography")) : null,
        sizeNm: random() < 0.7 ? Math.round(random() * 4999) + 1 : null,
        sizeVariationPct: random() < 0.6 ? Math.round(random() * 200) : null,
        composition: random() < 0.6 ? pick(random, terms("composition")) : null,
        texture: random() < 0.6 ? pick(random, terms("texture")) : null,
        defects: [...new Set(Array.from({ length: Math.floor(random() * 3) }, () => pick(random, terms("defects"))))],
      };
      expect(validatePick(morphology, vocabulary)).toEqual([]);

      const state = validForm(random, 10_000 + index);
      state.morphology = morphology;
      const doc = toRecordDocument(state);
      expect(doc.morphology === null || typeof doc.morphology === "string").toBe(true);
      if (doc.morphology === null) {
        // empty pick cannot be attached; the serialized form still parses
        expect(serializePick(morphology)).toBe("-|-|-|-|-|-|-");
        parsed++;
        continue;
      }
      const result = await api.submitRecord(doc, attributionOf(state), token);
      expect(result.ok, `server rejected morphology ${doc.morphology}: ${JSON.stringify(result)}`).toBe(true);
      parsed++;
    }
    expect(parsed).toBe(100);
  }, 120_000);
});
