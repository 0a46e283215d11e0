import type { AppContext } from "../context.js";
import { barChart } from "../charts.js";
import { clear, el } from "../dom.js";
import { STRINGS } from "../strings.js";
import { LABELS, type ReviewReport } from "../types.js";

function bulletList(items: string[], role: string): HTMLElement {
  const list = el("ul", { class: "summaries", "data-role": role });
  for (const item of items) list.append(el("li", {}, item));
  return list;
}

function trendLabel(start: string, kind: "daily" | "weekly"): string {
  // hourly buckets for daily reports, weekday dates for weekly ones
  return kind === "daily" ? start.slice(11, 16) : start.slice(5, 10);
}

export function renderReportInto(target: HTMLElement, report: ReviewReport): void {
  clear(target);
  if (report.total_checks === 0) {
    target.append(
      el("div", { class: "empty-state", "data-role": "empty-state" },
        el("p", {}, STRINGS.emptyReport)),
    );
    return;
  }
  const distribution = LABELS.map((label) => ({
    label,
    value: report.state_distribution[label] ?? 0,
  }));
  const trend = report.trend.map((bucket) => ({
    label: trendLabel(bucket.start, report.period.kind),
    value: bucket.count,
  }));
  target.append(
    el("p", { class: "totals", "data-role": "total-checks" },
      `${report.total_checks} ${STRINGS.totalChecks}`),
    el("h3", {}, STRINGS.distributionTitle),
    barChart(distribution, { name: "distribution" }),
    el("h3", {}, STRINGS.trendTitle),
    barChart(trend, { name: "trend", width: 560 }),
    el("h3", {}, STRINGS.blockagesTitle),
    bulletList(report.blockage_summaries, "blockages"),
    el("h3", {}, STRINGS.suggestionsTitle),
    bulletList(report.suggestion_summaries, "suggestions"),
    el("h3", {}, STRINGS.nextStepsTitle),
    bulletList(report.next_steps, "next-steps"),
  );
}

export function renderReports(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  const body = el("div", { class: "report-body", "data-role": "report-body" });
  const period = el("select", { "data-role": "period" },
    el("option", { value: "daily" }, STRINGS.daily),
    el("option", { value: "weekly" }, STRINGS.weekly)) as HTMLSelectElement;
  const key = el("input", { "data-role": "period-key", placeholder: "2025-01-15 / 2025-W03" }) as HTMLInputElement;

  const load = el(
    "button",
    {
      class: "primary",
      "data-role": "load",
      onclick: async () => {
        const value = key.value.trim() || undefined;
        const report =
          period.value === "weekly"
            ? await ctx.api.weeklyReport(value)
            : await ctx.api.dailyReport(value);
        ctx.cache.rememberReport(report);
        renderReportInto(body, report);
      },
    },
    STRINGS.loadReport,
  );

  root.append(
    el("h2", {}, STRINGS.navReports),
    el("div", { class: "row" }, period, key, load),
    body,
  );

  const cached = ctx.cache.lastReport();
  if (cached) renderReportInto(body, cached);
}
