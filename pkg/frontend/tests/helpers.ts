/** Shared test utilities: deterministic RNG and form-state generation. */

import { FormState, emptyForm } from "../src/form.js";

/** mulberry32: tiny deterministic PRNG for reproducible corpora. */
export function rng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function pick<T>(random: () => number, items: readonly T[]): T {
  return items[Math.floor(random() * items.length)]!;
}

const POLYMERS = ["PVA", "PVDF", "PVP", "PAN", "PCL"];
const SOLVENTS = ["water", "DMF", "ethanol", "acetone"];

/** A complete, rule-clean form state. */
export function validForm(random: () => number, index: number): FormState {
  const state = emptyForm();
  state.polymers = [{ polymerId: pick(random, POLYMERS), weightRatio: "" }];
  state.solvents = [{ solventId: pick(random, SOLVENTS), volumeRatio: "" }];
  state.concentration = { value: String(5 + Math.round(random() * 20)), unit: "wt%" };
  state.voltage = { value: String(8 + Math.round(random() * 20)), unit: "kV" };
  state.flowRate = { value: (0.2 + random() * 3).toFixed(2), unit: "mL/h" };
  state.distance = { value: String(8 + Math.round(random() * 15)), unit: "cm" };
  state.needleClass = "single_needle";
  state.collectorClass = "flat_plate";
  state.fiberDiameter = { value: String(80 + Math.round(random() * 1500)), unit: "nm" };
  if (random() < 0.5) {
    state.temperature = { value: String(18 + Math.round(random() * 10)), unit: "°C" };
    state.humidity = { value: String(30 + Math.round(random() * 40)), unit: "%RH" };
  }
  state.doi = random() < 0.7 ? `10.5555/ui.${index}` : "";
  state.attributionName = "ada";
  state.attributionContact = "ada@example.org";
  return state;
}

export type Mutation = (state: FormState) => void;

/** Mutations within the rule space the client mirrors. */
export const MUTATIONS: Record<string, Mutation> = {
  drop_concentration: (s) => {
    s.concentration.value = "";
  },
  drop_voltage: (s) => {
    s.voltage.value = "";
  },
  drop_flow: (s) => {
    s.flowRate.value = "";
  },
  drop_distance: (s) => {
    s.distance.value = "";
  },
  drop_needle: (s) => {
    s.needleClass = "";
  },
  drop_collector: (s) => {
    s.collectorClass = "";
  },
  drop_polymers: (s) => {
    s.polymers = [];
  },
  drop_solvents: (s) => {
    s.solvents = [];
  },
  drop_outcome: (s) => {
    s.fiberDiameter.value = "";
    s.morphology = {
      shape: null,
      topography: null,
      sizeNm: null,
      sizeVariationPct: null,
      composition: null,
      texture: null,
      defects: [],
    };
    s.instabilities = [];
  },
  zero_voltage: (s) => {
    s.voltage.value = "0";
  },
  negative_flow: (s) => {
    s.flowRate.value = "-0.5";
  },
  zero_diameter: (s) => {
    s.fiberDiameter.value = "0";
  },
  hot_ambient: (s) => {
    s.temperature = { value: "250", unit: "°C" };
  },
  cold_ambient: (s) => {
    s.temperature = { value: "-80", unit: "°C" };
  },
  wet_ambient: (s) => {
    s.humidity = { value: "150", unit: "%RH" };
  },
  negative_humidity: (s) => {
    s.humidity = { value: "-5", unit: "%RH" };
  },
  drop_attribution: (s) => {
    s.attributionName = "";
    s.attributionContact = "";
    s.doi = "";
  },
};
