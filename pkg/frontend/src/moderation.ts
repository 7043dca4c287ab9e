/** Moderation dashboard: review queue with claim and decide actions.
 *
 * Claim races surface as an "already claimed" notice and refresh the
 * queue; rejecting is blocked client-side until a reason is entered.
 */

import { api, Envelope } from "./api.js";
import { Session } from "./config.js";
import { append, clear, h } from "./dom.js";

export class ModerationDashboard {
  readonly element: HTMLElement;
  private queue: Envelope[] = [];
  private notice: string | null = null;
  private reasons = new Map<string, string>();
  private pending: Promise<void> = Promise.resolve();

  constructor(private session: Session) {
    this.element = h("section", { class: "moderation" });
    this.render();
  }

  idle(): Promise<void> {
    return this.pending;
  }

  private run(action: () => Promise<void>): Promise<void> {
    this.pending = this.pending.then(action).then(
      () => this.render(),
      (error) => {
        this.notice = String(error);
        this.render();
      },
    );
    return this.pending;
  }

  refresh(): Promise<void> {
    return this.run(async () => {
      this.queue = await api.moderationQueue(this.session.token);
    });
  }

  claim(envelopeId: string): Promise<void> {
    return this.run(async () => {
      const result = await api.claim(envelopeId, this.session.token);
      if (!result.ok) {
        this.notice =
          result.status === 409
            ? `envelope ${envelopeId} already claimed`
            : `claim failed: ${result.error.detail}`;
      } else {
        this.notice = null;
      }
      this.queue = await api.moderationQueue(this.session.token);
    });
  }

  decide(envelopeId: string, decision: "accept" | "reject"): Promise<void> {
    return this.run(async () => {
      const reason = this.reasons.get(envelopeId)?.trim() || null;
      const result = await api.decide(envelopeId, decision, reason, this.session.token);
      if (!result.ok) {
        this.notice = `${decision} failed: ${result.error.detail}`;
      } else {
        this.notice = `${envelopeId} ${result.body.state}`;
        this.reasons.delete(envelopeId);
      }
      this.queue = await api.moderationQueue(this.session.token);
    });
  }

  private envelopeCard(envelope: Envelope): HTMLElement {
    const record = envelope.record as Record<string, any>;
    const polymers = ((record.polymers as any[]) ?? [])
      .map((p) => p.polymer_id)
      .join("/");
    const reason = this.reasons.get(envelope.envelope_id) ?? "";
    const reasonInput = h("textarea", {
      "data-role": "reason",
      placeholder: "rejection reason (required to reject)",
      oninput: (event: Event) => {
        this.reasons.set(envelope.envelope_id, (event.target as HTMLTextAreaElement).value);
        this.render();
      },
    }) as HTMLTextAreaElement;
    reasonInput.value = reason;

    const actions =
      envelope.state === "auto_validated"
        ? [
            h(
              "button",
              {
                type: "button",
                "data-action": "claim",
                onclick: () => void this.claim(envelope.envelope_id),
              },
              "claim for review",
            ),
          ]
        : [
            h(
              "button",
              {
                type: "button",
                "data-action": "accept",
                onclick: () => void this.decide(envelope.envelope_id, "accept"),
              },
              "accept",
            ),
            reasonInput,
            h(
              "button",
              {
                type: "button",
                "data-action": "reject",
                disabled: reason.trim().length === 0,
                onclick: () => void this.decide(envelope.envelope_id, "reject"),
              },
              "reject",
            ),
          ];

    return h(
      "article",
      { class: "envelope", "data-envelope": envelope.envelope_id, "data-state": envelope.state },
      h("h3", {}, `${envelope.envelope_id} — ${envelope.state}`),
      h("p", {}, `polymers: ${polymers || "(none)"}`),
      h(
        "details",
        {},
        h("summary", {}, "record"),
        h("pre", { class: "record" }, JSON.stringify(envelope.record, null, 2)),
      ),
      envelope.validation
        ? h(
            "p",
            { class: "validation" },
            `validation: ${envelope.validation.passed ? "passed" : "failed"} ` +
              `(catalog ${envelope.validation.catalog_version})`,
          )
        : null,
      h(
        "ol",
        { class: "audit" },
        ...envelope.decisions.map((event) =>
          h(
            "li",
            {},
            `${event.at} ${event.actor}/${event.identity}: ${event.action}` +
              (event.reason ? ` — ${event.reason}` : ""),
          ),
        ),
      ),
      ...actions,
    );
  }

  render(): void {
    clear(this.element);
    append(
      this.element,
      h("h2", {}, "moderation queue"),
      h(
        "button",
        {
          type: "button",
          "data-action": "refresh",
          onclick: () => void this.refresh(),
        },
        "refresh",
      ),
      this.notice ? h("p", { class: "notice", "data-role": "notice" }, this.notice) : null,
      this.queue.length
        ? h("div", { class: "queue" }, ...this.queue.map((e) => this.envelopeCard(e)))
        : h("p", {}, "queue is empty"),
    );
  }
}
