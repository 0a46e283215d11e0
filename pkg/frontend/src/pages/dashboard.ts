import type { AppContext } from "../context.js";
import { clear, el } from "../dom.js";
import { STRINGS } from "../strings.js";
import { LABELS } from "../types.js";

// Today's summary plus quick entries. The voice shortcut appears only when
// the backend reports configured speech adapters.

export function renderDashboard(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  const summary = el("div", { class: "summary", "data-role": "today-summary" });

  void (async () => {
    try {
      const report = await ctx.api.dailyReport();
      const dominant = LABELS.reduce((best, label) =>
        (report.state_distribution[label] ?? 0) > (report.state_distribution[best] ?? 0)
          ? label
          : best,
      );
      summary.append(
        el("p", {}, `${report.total_checks} ${STRINGS.totalChecks}`),
        report.total_checks > 0
          ? el("p", {}, `mostly ${dominant}`)
          : el("p", { class: "empty-state" }, STRINGS.emptyReport),
      );
      for (const step of report.next_steps) {
        summary.append(el("p", { class: "next-step" }, `→ ${step}`));
      }
    } catch {
      summary.append(el("p", { class: "empty-state" }, "Service not reachable."));
    }
  })();

  const quick = el(
    "div",
    { class: "row quick-links" },
    el("button", { class: "primary", onclick: () => ctx.navigate("#/check") },
      STRINGS.navStateCheck),
    el("button", { onclick: () => ctx.navigate("#/reflect") }, STRINGS.navReflection),
    el("button", { onclick: () => ctx.navigate("#/reports") }, STRINGS.navReports),
  );

  root.append(el("h2", {}, STRINGS.todayTitle), summary, quick);

  if (ctx.health?.speech.configured) {
    const voiceNote = el("p", { class: "hint" }, STRINGS.voiceHint);
    const voiceButton = el(
      "button",
      { class: "voice", "data-role": "voice-button", title: STRINGS.voiceHold },
      STRINGS.voiceHold,
    );
    attachRecorder(voiceButton, ctx);
    root.append(el("div", { class: "voice-block", "data-role": "voice-block" },
      voiceButton, voiceNote));
  }
}

function attachRecorder(button: HTMLElement, ctx: AppContext): void {
  // press-and-hold recording; requires MediaRecorder (real browsers only)
  let recorder: MediaRecorder | null = null;
  let chunks: Blob[] = [];

  button.addEventListener("pointerdown", async () => {
    if (typeof MediaRecorder === "undefined" || !navigator.mediaDevices) return;
    try {
      const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
      chunks = [];
      recorder = new MediaRecorder(stream);
      recorder.addEventListener("dataavailable", (event) => chunks.push(event.data));
      recorder.start();
    } catch {
      recorder = null;
    }
  });

  button.addEventListener("pointerup", () => {
    const active = recorder;
    if (!active) return;
    active.addEventListener("stop", () => {
      active.stream.getTracks().forEach((track) => track.stop());
      const clip = new Blob(chunks, { type: active.mimeType || "audio/webm" });
      void ctx.api.voiceChat(clip).then((response) => {
        if (response.reply_audio_id) {
          const audio = new Audio(ctx.api.mediaUrl(response.reply_audio_id));
          void audio.play().catch(() => undefined);
        }
      });
    });
    active.stop();
    recorder = null;
  });
}
