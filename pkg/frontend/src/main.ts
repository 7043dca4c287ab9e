/** Application shell: hash routing, credential entry, view mounting. */

import { loadSession, saveToken, Session } from "./config.js";
import { clear, h } from "./dom.js";
import { Explorer } from "./explorer.js";
import { ModerationDashboard } from "./moderation.js";
import { ReleaseArchive } from "./releases.js";
import { SubmissionWizard } from "./wizard.js";

const session: Session = loadSession();

function tokenPanel(): HTMLElement {
  const input = h("input", {
    type: "password",
    placeholder: "bearer token (contributor/moderator)",
    oninput: (event: Event) => {
      session.token = (event.target as HTMLInputElement).value || null;
      saveToken(session.token);
    },
  }) as HTMLInputElement;
  input.value = session.token ?? "";
  return h("div", { class: "token" }, h("label", {}, "credential: ", input));
}

function mount(root: HTMLElement): void {
  const outlet = h("main", {});
  const routes: Record<string, () => HTMLElement> = {
    "#/submit": () => new SubmissionWizard(session).element,
    "#/moderation": () => {
      const dashboard = new ModerationDashboard(session);
      void dashboard.refresh();
      return dashboard.element;
    },
    "#/explore": () => new Explorer().element,
    "#/releases": () => {
      const archive = new ReleaseArchive();
      void archive.refresh();
      return archive.element;
    },
  };

  const navigate = () => {
    const route = routes[location.hash] ? location.hash : "#/explore";
    clear(outlet);
    outlet.append(routes[route]!());
  };

  root.append(
    h(
      "header",
      {},
      h("h1", {}, "electrospinning experiment records"),
      h(
        "nav",
        {},
        h("a", { href: "#/explore" }, "explore"),
        h("a", { href: "#/submit" }, "submit"),
        h("a", { href: "#/moderation" }, "moderation"),
        h("a", { href: "#/releases" }, "releases"),
      ),
      tokenPanel(),
    ),
    outlet,
  );
  window.addEventListener("hashchange", navigate);
  navigate();
}

const root = document.getElementById("app");
if (root) mount(root);
