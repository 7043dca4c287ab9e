/** Stepwise submission wizard with live client-side rule hints.
 *
 * Steps follow the schema groups: materials, solution, process, ambient,
 * equipment, outcomes, morphology, attribution. Violations returned by
 * the server render inline against their field paths; flagged envelopes
 * can be revised and resubmitted in place.
 */

import { api, Envelope, RequestFailed, VocabularyManifest } from "./api.js";
import { Session } from "./config.js";
import { append, clear, h } from "./dom.js";
import {
  FormState,
  QuantityEntry,
  attributionOf,
  docToForm,
  emptyForm,
  invalidNumericEntries,
  toRecordDocument,
} from "./form.js";
import { axisTerms } from "./morphology.js";
import { evaluateDocument, findingsByPath, submitBlocked } from "./rules.js";
import {
  COLLECTOR_CLASSES,
  FIELD_UNITS,
  INSTABILITY_CODES,
  NEEDLE_CLASSES,
} from "./units.js";

const STEPS = [
  "materials",
  "solution",
  "process",
  "ambient",
  "equipment",
  "outcomes",
  "morphology",
  "attribution",
] as const;

// form hints keyed by server field paths
const STEP_PATHS: Record<(typeof STEPS)[number], string[]> = {
  materials: ["polymers", "solvents"],
  solution: ["solution.concentration", "solution.ph"],
  process: [
    "process.voltage",
    "process.flow_rate",
    "process.tip_collector_distance",
    "process.spinning_duration",
  ],
  ambient: ["ambient.temperature", "ambient.humidity"],
  equipment: ["needle.config_class", "collector.config_class"],
  outcomes: ["fiber.fiber_diameter", "fiber.diameter_variation", "outcome"],
  morphology: ["morphology"],
  attribution: ["provenance.source", "provenance.contributor"],
};

export class SubmissionWizard {
  readonly element: HTMLElement;
  state: FormState = emptyForm();
  envelopeId: string | null = null; // set when revising a flagged/rejected envelope
  private step = 0;
  private vocabulary: VocabularyManifest | null = null;
  private serverReport: { rule_id: string; field_path: string; message: string }[] = [];
  private outcome: Envelope | null = null;
  private error: string | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor(private session: Session) {
    this.element = h("section", { class: "wizard" });
    this.run(async () => {
      this.vocabulary = await api.vocabulary();
    });
  }

  idle(): Promise<void> {
    return this.pending;
  }

  private run(action: () => Promise<void>): void {
    this.pending = this.pending.then(action).then(
      () => this.render(),
      (error) => {
        this.error = String(error);
        this.render();
      },
    );
  }

  /** Load an existing envelope for revision. */
  loadEnvelope(envelopeId: string): Promise<void> {
    this.run(async () => {
      const envelope = await api.getEnvelope(envelopeId);
      this.envelopeId = envelopeId;
      this.state = docToForm(envelope.record);
      this.serverReport = envelope.validation?.violations ?? [];
      this.outcome = null;
      this.step = 0;
    });
    return this.idle();
  }

  submit(): Promise<void> {
    this.run(async () => {
      const doc = toRecordDocument(this.state);
      const result = this.envelopeId
        ? await api.reviseEnvelope(this.envelopeId, doc, this.session.token)
        : await api.submitRecord(doc, attributionOf(this.state), this.session.token);
      if (result.ok) {
        this.outcome = result.body;
        this.serverReport = [];
        this.error = null;
        return;
      }
      if (result.error.code === "validation_failed" && result.error.violations) {
        this.envelopeId = result.error.envelope_id ?? this.envelopeId;
        this.serverReport = result.error.violations.violations;
        this.outcome = null;
        this.error = null;
        return;
      }
      throw new RequestFailed(result.error);
    });
    return this.idle();
  }

  // -- rendering -------------------------------------------------------

  private hint(paths: string[]): HTMLElement {
    const doc = toRecordDocument(this.state);
    const client = findingsByPath(evaluateDocument(doc));
    const container = h("div", { class: "hints" });
    for (const path of paths) {
      for (const finding of client.get(path) ?? []) {
        container.append(
          h("p", { class: "hint client", "data-path": path }, `${finding.ruleId}: ${finding.message}`),
        );
      }
      for (const violation of this.serverReport.filter((v) => v.field_path === path)) {
        container.append(
          h(
            "p",
            { class: "hint server", "data-path": path },
            `${violation.rule_id} (server): ${violation.message}`,
          ),
        );
      }
    }
    return container;
  }

  private quantityInput(label: string, entry: QuantityEntry, field: string): HTMLElement {
    const input = h("input", {
      type: "text",
      value: entry.value,
      "data-field": field,
      oninput: (event: Event) => {
        entry.value = (event.target as HTMLInputElement).value;
        this.render();
      },
    }) as HTMLInputElement;
    input.value = entry.value;
    const unit = h(
      "select",
      {
        "data-field": `${field}-unit`,
        onchange: (event: Event) => {
          entry.unit = (event.target as HTMLSelectElement).value;
          this.render();
        },
      },
      ...(FIELD_UNITS[field] ?? []).map((option) =>
        h("option", option.symbol === entry.unit ? { selected: true } : {}, option.symbol),
      ),
    ) as HTMLSelectElement;
    unit.value = entry.unit;
    return h("label", { class: "field" }, label, input, unit);
  }

  private textInput(
    label: string,
    value: string,
    field: string,
    apply: (text: string) => void,
  ): HTMLElement {
    const input = h("input", {
      type: "text",
      "data-field": field,
      oninput: (event: Event) => {
        apply((event.target as HTMLInputElement).value);
        this.render();
      },
    }) as HTMLInputElement;
    input.value = value;
    return h("label", { class: "field" }, label, input);
  }

  private classPicker(
    label: string,
    classes: string[],
    value: string,
    field: string,
    apply: (text: string) => void,
  ): HTMLElement {
    const select = h(
      "select",
      {
        "data-field": field,
        onchange: (event: Event) => {
          apply((event.target as HTMLSelectElement).value);
          this.render();
        },
      },
      h("option", { value: "" }, "(select)"),
      ...classes.map((name) => h("option", name === value ? { selected: true } : {}, name)),
    ) as HTMLSelectElement;
    select.value = value;
    return h("label", { class: "field" }, label, select);
  }

  private stepBody(): HTMLElement {
    const step = STEPS[this.step]!;
    switch (step) {
      case "materials": {
        const body = h("div", {});
        this.state.polymers.forEach((polymer, index) => {
          body.append(
            this.textInput(`polymer ${index + 1} id`, polymer.polymerId, `polymer-${index}`, (t) => {
              polymer.polymerId = t;
            }),
            this.textInput(
              `polymer ${index + 1} weight ratio`,
              polymer.weightRatio,
              `polymer-ratio-${index}`,
              (t) => {
                polymer.weightRatio = t;
              },
            ),
          );
        });
        this.state.solvents.forEach((solvent, index) => {
          body.append(
            this.textInput(`solvent ${index + 1} id`, solvent.solventId, `solvent-${index}`, (t) => {
              solvent.solventId = t;
            }),
            this.textInput(
              `solvent ${index + 1} volume ratio`,
              solvent.volumeRatio,
              `solvent-ratio-${index}`,
              (t) => {
                solvent.volumeRatio = t;
              },
            ),
          );
        });
        body.append(
          h(
            "button",
            {
              type: "button",
              "data-action": "add-polymer",
              onclick: () => {
                this.state.polymers.push({ polymerId: "", weightRatio: "" });
                this.render();
              },
            },
            "add polymer",
          ),
          h(
            "button",
            {
              type: "button",
              "data-action": "add-solvent",
              onclick: () => {
                this.state.solvents.push({ solventId: "", volumeRatio: "" });
                this.render();
              },
            },
            "add solvent",
          ),
        );
        return body;
      }
      case "solution":
        return h(
          "div",
          {},
          this.quantityInput("concentration", this.state.concentration, "concentration"),
          this.textInput("pH", this.state.ph, "ph", (t) => {
            this.state.ph = t;
          }),
        );
      case "process":
        return h(
          "div",
          {},
          this.quantityInput("applied voltage", this.state.voltage, "voltage"),
          this.quantityInput("flow rate", this.state.flowRate, "flow_rate"),
          this.quantityInput("tip-collector distance", this.state.distance, "tip_collector_distance"),
          this.quantityInput("spinning duration", this.state.duration, "spinning_duration"),
        );
      case "ambient":
        return h(
          "div",
          {},
          this.quantityInput("temperature", this.state.temperature, "temperature"),
          this.quantityInput("relative humidity", this.state.humidity, "humidity"),
        );
      case "equipment":
        return h(
          "div",
          {},
          this.classPicker("needle class", NEEDLE_CLASSES, this.state.needleClass, "needle", (t) => {
            this.state.needleClass = t;
          }),
          this.classPicker(
            "collector class",
            COLLECTOR_CLASSES,
            this.state.collectorClass,
            "collector",
            (t) => {
              this.state.collectorClass = t;
            },
          ),
        );
      case "outcomes": {
        const instabilities = h(
          "div",
          { class: "checkboxes" },
          ...INSTABILITY_CODES.map((code) => {
            const checkbox = h("input", {
              type: "checkbox",
              "data-field": `instability-${code}`,
              onchange: (event: Event) => {
                const checked = (event.target as HTMLInputElement).checked;
                this.state.instabilities = checked
                  ? [...this.state.instabilities, code]
                  : this.state.instabilities.filter((c) => c !== code);
                this.render();
              },
            }) as HTMLInputElement;
            checkbox.checked = this.state.instabilities.includes(code);
            return h("label", { class: "checkbox" }, checkbox, code);
          }),
        );
        const stable = h(
          "select",
          {
            "data-field": "formation-stable",
            onchange: (event: Event) => {
              this.state.formationStable = (event.target as HTMLSelectElement).value as
                | ""
                | "true"
                | "false";
              this.render();
            },
          },
          h("option", { value: "" }, "(unreported)"),
          h("option", { value: "true" }, "stable"),
          h("option", { value: "false" }, "unstable"),
        ) as HTMLSelectElement;
        stable.value = this.state.formationStable;
        return h(
          "div",
          {},
          this.quantityInput("fiber diameter", this.state.fiberDiameter, "fiber_diameter"),
          this.quantityInput(
            "diameter variation",
            this.state.diameterVariation,
            "diameter_variation",
          ),
          h("label", { class: "field" }, "formation stability", stable),
          h("p", {}, "process instabilities:"),
          instabilities,
        );
      }
      case "morphology": {
        const vocabulary = this.vocabulary;
        if (!vocabulary) return h("p", {}, "loading vocabulary…");
        const pick = this.state.morphology;
        const axisSelect = (axis: "shape" | "topography" | "composition" | "texture") => {
          const select = h(
            "select",
            {
              "data-field": `morph-${axis}`,
              onchange: (event: Event) => {
                const value = (event.target as HTMLSelectElement).value;
                pick[axis] = value || null;
                this.render();
              },
            },
            h("option", { value: "" }, "(none)"),
            ...axisTerms(vocabulary, axis).map((term) =>
              h("option", term === pick[axis] ? { selected: true } : {}, term),
            ),
          ) as HTMLSelectElement;
          select.value = pick[axis] ?? "";
          return h("label", { class: "field" }, axis, select);
        };
        const defectBoxes = h(
          "div",
          { class: "checkboxes" },
          ...axisTerms(vocabulary, "defects").map((term) => {
            const checkbox = h("input", {
              type: "checkbox",
              "data-field": `morph-defect-${term}`,
              onchange: (event: Event) => {
                const checked = (event.target as HTMLInputElement).checked;
                pick.defects = checked
                  ? [...pick.defects, term]
                  : pick.defects.filter((t) => t !== term);
                this.render();
              },
            }) as HTMLInputElement;
            checkbox.checked = pick.defects.includes(term);
            return h("label", { class: "checkbox" }, checkbox, term);
          }),
        );
        return h(
          "div",
          {},
          axisSelect("shape"),
          axisSelect("topography"),
          this.textInput("size (nm)", pick.sizeNm === null ? "" : String(pick.sizeNm), "morph-size", (t) => {
            pick.sizeNm = t.trim() ? Number(t) : null;
          }),
          this.textInput(
            "size variation (%)",
            pick.sizeVariationPct === null ? "" : String(pick.sizeVariationPct),
            "morph-variation",
            (t) => {
              pick.sizeVariationPct = t.trim() ? Number(t) : null;
            },
          ),
          axisSelect("composition"),
          axisSelect("texture"),
          h("p", {}, "defects:"),
          defectBoxes,
        );
      }
      case "attribution":
        return h(
          "div",
          {},
          this.textInput("DOI (literature source)", this.state.doi, "doi", (t) => {
            this.state.doi = t;
          }),
          this.textInput("publication title", this.state.title, "title", (t) => {
            this.state.title = t;
          }),
          this.textInput("contributor name", this.state.attributionName, "attribution-name", (t) => {
            this.state.attributionName = t;
          }),
          this.textInput(
            "contributor contact",
            this.state.attributionContact,
            "attribution-contact",
            (t) => {
              this.state.attributionContact = t;
            },
          ),
        );
    }
  }

  render(): void {
    clear(this.element);
    if (this.outcome) {
      this.element.append(
        h("div", { class: "success", "data-role": "success" },
          h("h3", {}, "submission received"),
          h("p", { "data-role": "envelope-id" }, this.outcome.envelope_id),
          h("p", { "data-role": "envelope-state" }, this.outcome.state),
          h(
            "button",
            {
              type: "button",
              "data-action": "new-submission",
              onclick: () => {
                this.state = emptyForm();
                this.envelopeId = null;
                this.outcome = null;
                this.render();
              },
            },
            "submit another",
          ),
        ),
      );
      return;
    }

    const doc = toRecordDocument(this.state);
    const findings = evaluateDocument(doc);
    const badEntries = invalidNumericEntries(this.state);
    const blocked = submitBlocked(findings) || badEntries.length > 0;

    const nav = h(
      "nav",
      { class: "steps" },
      ...STEPS.map((name, index) =>
        h(
          "button",
          {
            type: "button",
            class: index === this.step ? "step active" : "step",
            "data-step": name,
            onclick: () => {
              this.step = index;
              this.render();
            },
          },
          name,
        ),
      ),
    );

    const step = STEPS[this.step]!;
    const submit = h(
      "button",
      {
        type: "button",
        class: "submit",
        "data-action": "submit",
        disabled: blocked,
        onclick: () => void this.submit(),
      },
      this.envelopeId ? "resubmit revision" : "submit record",
    ) as HTMLButtonElement;

    append(
      this.element,
      h("h2", {}, this.envelopeId ? `revising ${this.envelopeId}` : "new submission"),
      this.error ? h("p", { class: "error" }, this.error) : null,
      nav,
      this.stepBody(),
      this.hint(STEP_PATHS[step]),
      badEntries.length
        ? h("p", { class: "hint client" }, `non-numeric entries: ${badEntries.join(", ")}`)
        : null,
      blocked
        ? h(
            "p",
            { class: "hint blocked", "data-role": "submit-blocked" },
            "submission disabled: required fields are missing",
          )
        : null,
      submit,
    );
  }
}
