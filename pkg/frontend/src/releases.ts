/** Release archive: every historical version with its download links. */

import { api, ReleaseManifest } from "./api.js";
import { clear, h } from "./dom.js";

export class ReleaseArchive {
  readonly element: HTMLElement;
  private releases: ReleaseManifest[] = [];
  private error: string | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor() {
    this.element = h("section", { class: "releases" });
    this.render();
  }

  idle(): Promise<void> {
    return this.pending;
  }

  refresh(): Promise<void> {
    this.pending = this.pending
      .then(async () => {
        this.releases = await api.releases();
        this.error = null;
      })
      .then(
        () => this.render(),
        (error) => {
          this.error = String(error);
          this.render();
        },
      );
    return this.pending;
  }

  render(): void {
    clear(this.element);
    this.element.append(
      h("h2", {}, "release archive"),
      h(
        "button",
        { type: "button", "data-action": "refresh", onclick: () => void this.refresh() },
        "refresh",
      ),
    );
    if (this.error) {
      this.element.append(h("p", { class: "error" }, this.error));
      return;
    }
    if (!this.releases.length) {
      this.element.append(h("p", {}, "no releases yet"));
      return;
    }
    const rows = this.releases.map((release) =>
      h(
        "tr",
        { "data-release": release.label },
        h("td", {}, release.label),
        h("td", {}, release.released_at),
        h("td", {}, String(release.record_count)),
        h(
          "td",
          {},
          h("a", { href: api.releaseArtifactUrl(release.label, "dataset") }, "dataset (csv)"),
          " · ",
          h("a", { href: api.releaseArtifactUrl(release.label, "dataset_xlsx") }, "xlsx"),
          " · ",
          h("a", { href: api.releaseArtifactUrl(release.label, "tables") }, "tables"),
          " · ",
          h("a", { href: api.releaseArtifactUrl(release.label, "images") }, "images"),
        ),
      ),
    );
    this.element.append(
      h(
        "table",
        { class: "results" },
        h("tr", {}, h("th", {}, "label"), h("th", {}, "date"), h("th", {}, "records"), h("th", {}, "downloads")),
        ...rows,
      ),
    );
  }
}
