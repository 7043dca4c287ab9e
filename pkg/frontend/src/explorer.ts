/** Explorer: filter panel, result table, and distribution views.
 *
 * Filter controls map one-to-one onto the query endpoint's parameters;
 * the fiber-diameter histogram and the boxplots for the four core process
 * parameters render from the stats endpoints, never from client-side math.
 */

import { api, QueryPage, RequestFailed, SummaryStats } from "./api.js";
import { boxplotChart, histogramChart } from "./charts.js";
import { clear, h } from "./dom.js";
import { COLLECTOR_CLASSES, NEEDLE_CLASSES } from "./units.js";

const BOXPLOT_FIELDS = ["voltage", "flow_rate", "concentration", "tip_collector_distance"];
const BOXPLOT_LABELS: Record<string, string> = {
  voltage: "applied voltage (kV)",
  flow_rate: "flow rate (mL/h)",
  concentration: "concentration (wt%)",
  tip_collector_distance: "tip-collector distance (cm)",
};

interface Filters {
  polymer: string;
  solvent: string;
  needle: string;
  collector: string;
  diameterMin: string;
  diameterMax: string;
}

export class Explorer {
  readonly element: HTMLElement;
  private filters: Filters = {
    polymer: "",
    solvent: "",
    needle: "",
    collector: "",
    diameterMin: "",
    diameterMax: "",
  };
  private page: QueryPage | null = null;
  private stats: SummaryStats | null = null;
  private histogram: { bins: { lower: number; upper: number; count: number }[] } | null = null;
  private error: string | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor() {
    this.element = h("section", { class: "explorer" });
    this.render();
  }

  idle(): Promise<void> {
    return this.pending;
  }

  private params(): URLSearchParams {
    const params = new URLSearchParams();
    if (this.filters.polymer.trim()) params.append("polymer", this.filters.polymer.trim());
    if (this.filters.solvent.trim()) params.append("solvent", this.filters.solvent.trim());
    if (this.filters.needle) params.append("needle", this.filters.needle);
    if (this.filters.collector) params.append("collector", this.filters.collector);
    const low = this.filters.diameterMin.trim();
    const high = this.filters.diameterMax.trim();
    if (low && high) params.append("fiber_diameter", `${low}:${high}`);
    return params;
  }

  apply(): Promise<void> {
    this.pending = this.pending
      .then(async () => {
        const params = this.params();
        this.page = await api.queryRecords(new URLSearchParams(params));
        const statsParams = new URLSearchParams(params);
        statsParams.append("fields", BOXPLOT_FIELDS.join(","));
        this.stats = await api.statsSummary(statsParams);
        if (this.page.total > 0) {
          const histogramParams = new URLSearchParams(params);
          histogramParams.append("field", "fiber_diameter");
          histogramParams.append("bins", "20");
          this.histogram = await api.statsHistogram(histogramParams);
        } else {
          this.histogram = null;
        }
        this.error = null;
      })
      .then(
        () => this.render(),
        (error) => {
          this.error = error instanceof RequestFailed ? error.error.detail : String(error);
          this.page = null;
          this.stats = null;
          this.histogram = null;
          this.render();
        },
      );
    return this.pending;
  }

  private input(label: string, key: keyof Filters, field: string): HTMLElement {
    const input = h("input", {
      type: "text",
      "data-filter": field,
      oninput: (event: Event) => {
        this.filters[key] = (event.target as HTMLInputElement).value;
      },
    }) as HTMLInputElement;
    input.value = this.filters[key];
    return h("label", { class: "field" }, label, input);
  }

  private select(label: string, key: keyof Filters, field: string, options: string[]): HTMLElement {
    const select = h(
      "select",
      {
        "data-filter": field,
        onchange: (event: Event) => {
          this.filters[key] = (event.target as HTMLSelectElement).value;
        },
      },
      h("option", { value: "" }, "(any)"),
      ...options.map((name) => h("option", name === this.filters[key] ? { selected: true } : {}, name)),
    ) as HTMLSelectElement;
    select.value = this.filters[key];
    return h("label", { class: "field" }, label, select);
  }

  render(): void {
    clear(this.element);
    const panel = h(
      "form",
      {
        class: "filters",
        onsubmit: (event: Event) => {
          event.preventDefault();
          void this.apply();
        },
      },
      this.input("polymer", "polymer", "polymer"),
      this.input("solvent", "solvent", "solvent"),
      this.select("needle", "needle", "needle", NEEDLE_CLASSES),
      this.select("collector", "collector", "collector", COLLECTOR_CLASSES),
      this.input("diameter min (nm)", "diameterMin", "diameter-min"),
      this.input("diameter max (nm)", "diameterMax", "diameter-max"),
      h("button", { type: "submit", "data-action": "apply" }, "apply filter"),
    );
    this.element.append(h("h2", {}, "explore records"), panel);
    if (this.error) {
      this.element.append(h("p", { class: "error", "data-role": "filter-error" }, this.error));
      return;
    }
    if (!this.page) {
      this.element.append(h("p", {}, "apply a filter to load records"));
      return;
    }
    this.element.append(h("p", { "data-role": "result-count" }, `${this.page.total} record(s)`));
    if (this.page.total === 0) {
      this.element.append(h("p", { "data-role": "empty" }, "no records match this filter"));
      return;
    }

    const header = h(
      "tr",
      {},
      ...["record", "polymers", "solvents", "kV", "mL/h", "cm", "nm", "morphology / instabilities"].map(
        (text) => h("th", {}, text),
      ),
    );
    const rows = this.page.items.map((item) =>
      h(
        "tr",
        { "data-record": item.record_id },
        h("td", {}, item.record_id),
        h("td", {}, item.polymers.join("/")),
        h("td", {}, item.solvents.join("/")),
        h("td", {}, item.voltage_kv === null || item.voltage_kv === undefined ? "" : String(item.voltage_kv)),
        h(
          "td",
          {},
          item.flow_rate_ml_h === null || item.flow_rate_ml_h === undefined
            ? ""
            : String(item.flow_rate_ml_h),
        ),
        h("td", {}, item.distance_cm === null || item.distance_cm === undefined ? "" : String(item.distance_cm)),
        h(
          "td",
          {},
          item.fiber_diameter_nm === null || item.fiber_diameter_nm === undefined
            ? ""
            : String(item.fiber_diameter_nm),
        ),
        h("td", {}, item.morphology ?? item.instabilities.join(";")),
      ),
    );
    this.element.append(h("table", { class: "results" }, header, ...rows));

    if (this.histogram && this.histogram.bins.length) {
      this.element.append(
        h("h3", {}, "fiber diameter distribution (nm)"),
        histogramChart(this.histogram.bins),
      );
    }
    if (this.stats) {
      const charts = h("div", { class: "boxplots" });
      for (const field of BOXPLOT_FIELDS) {
        const summary = this.stats.fields[field];
        if (!summary || summary.n === 0) continue;
        charts.append(
          h("h4", {}, `${BOXPLOT_LABELS[field]} (n=${summary.n}, median=${summary.median})`),
          boxplotChart(field, summary),
        );
      }
      this.element.append(h("h3", {}, "core process parameters"), charts);
    }
  }
}
