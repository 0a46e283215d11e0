import type { AppContext } from "../context.js";
import { clear, el } from "../dom.js";
import { STRINGS } from "../strings.js";
import type { SessionRecord } from "../types.js";

function isoDate(daysAgo: number): string {
  const when = new Date(Date.now() - daysAgo * 24 * 3600 * 1000);
  return when.toISOString().slice(0, 10);
}

function detailPanel(record: SessionRecord): HTMLElement {
  const panel = el("div", { class: "detail", "data-role": "detail" });
  panel.append(el("p", {}, `${record.timestamp} - ${record.confirmed_state}`));
  if (record.detected_emotion) {
    panel.append(el("p", {}, `detected: ${record.detected_emotion.label}`));
  }
  if (record.reflection) {
    panel.append(
      el("p", {}, `${STRINGS.qBlockage} ${record.reflection.blockage}`),
      el("p", {}, `${STRINGS.qGoal} ${record.reflection.goal}`),
    );
  }
  if (record.suggestion) {
    for (const step of record.suggestion.steps) {
      panel.append(el("p", { class: "step-line" }, `${step.kind}: ${step.action}`));
    }
  }
  return panel;
}

export function renderHistory(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  const list = el("div", { class: "history-list", "data-role": "history-list" });
  const detail = el("div", { class: "history-detail" });

  async function refresh(): Promise<void> {
    const { records } = await ctx.api.listSessions(isoDate(7), isoDate(-1));
    // the backend is authoritative: cache entries it no longer knows are dropped
    ctx.cache.reconcile(records);
    clear(list);
    if (records.length === 0) {
      list.append(el("p", { class: "empty-state", "data-role": "empty-state" },
        STRINGS.historyEmpty));
      return;
    }
    for (const record of [...records].reverse()) {
      const row = el(
        "div",
        { class: "history-row", "data-id": record.id },
        el("span", { class: "stamp" }, record.timestamp),
        el("span", { class: "state" }, record.confirmed_state),
        record.was_corrected ? el("span", { class: "badge" }, STRINGS.corrected) : null,
        el(
          "button",
          {
            class: "danger",
            "data-role": "delete",
            onclick: async (event: Event) => {
              event.stopPropagation();
              if (!ctx.confirm(STRINGS.confirmDelete)) return;
              await ctx.api.deleteSession(record.id);
              ctx.cache.dropRecord(record.id);
              row.remove();
              if (!list.querySelector(".history-row")) await refresh();
            },
          },
          STRINGS.deleteRecord,
        ),
      );
      row.addEventListener("click", () => {
        clear(detail);
        detail.append(detailPanel(record));
      });
      list.append(row);
    }
  }

  root.append(el("h2", {}, STRINGS.navHistory), list, detail);
  void refresh();
}
