import type { AppContext } from "../context.js";
import { clear, el } from "../dom.js";
import { STRINGS } from "../strings.js";
import {
  LABELS,
  type ChatReflectResponse,
  type EmotionLabel,
  type ThreeStepSuggestion,
} from "../types.js";

const STEP_TITLES: Record<string, string> = {
  immediate: "Immediate action",
  short_term: "Short-term strategy",
  longer_term: "Longer-term reminder",
};

function suggestionCards(suggestion: ThreeStepSuggestion): HTMLElement {
  const wrap = el("div", { class: "steps", "data-role": "suggestion" });
  suggestion.steps.forEach((step, i) => {
    wrap.append(
      el(
        "div",
        { class: "step-card", "data-kind": step.kind },
        el("h4", {}, `Step ${i + 1}: ${STEP_TITLES[step.kind] ?? step.kind}`),
        el("p", { class: "action" }, step.action),
        el("p", { class: "explanation" }, step.explanation),
      ),
    );
  });
  return wrap;
}

export function renderReflection(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  const pending = ctx.cache.pendingCheck();

  const picker = el("select", { class: "state-picker", "data-role": "state-picker" });
  for (const label of LABELS) picker.append(el("option", { value: label }, label));
  picker.value = pending?.confirmed_state ?? "neutral";

  const blockage = el("textarea", { "data-role": "blockage", rows: "3" }) as HTMLTextAreaElement;
  const tried = el("textarea", { "data-role": "tried", rows: "2" }) as HTMLTextAreaElement;
  const goal = el("textarea", { "data-role": "goal", rows: "2" }) as HTMLTextAreaElement;
  const hint = el("p", { class: "hint error", "data-role": "hint" });
  const result = el("div", { class: "result", "data-role": "result" });

  const submit = el(
    "button",
    {
      class: "primary",
      "data-role": "submit",
      onclick: async () => {
        hint.textContent = "";
        if (!blockage.value.trim()) {
          hint.textContent = STRINGS.blockageRequired;
          return;
        }
        if (!goal.value.trim()) {
          hint.textContent = STRINGS.goalRequired;
          return;
        }
        submit.disabled = true;
        try {
          const response: ChatReflectResponse = await ctx.api.reflectChat({
            mode: "reflect",
            confirmed_state: picker.value as EmotionLabel,
            ...(pending?.detected_emotion
              ? { detected_emotion: pending.detected_emotion }
              : {}),
            reflection: {
              blockage: blockage.value,
              tried: tried.value,
              goal: goal.value,
            },
          });
          clear(result);
          if (response.fallback) {
            result.append(
              el(
                "div",
                { class: "fallback", "data-role": "fallback" },
                el("h4", {}, STRINGS.fallbackTitle),
                el("p", {}, response.message ?? ""),
              ),
            );
          } else if (response.suggestion) {
            result.append(suggestionCards(response.suggestion));
          } else if (response.raw_reply) {
            result.append(
              el(
                "div",
                { class: "raw-reply", "data-role": "raw-reply" },
                el("h4", {}, STRINGS.rawReplyTitle),
                el("pre", {}, response.raw_reply),
              ),
            );
          }
          ctx.cache.setPendingCheck(null);
          const { records } = await ctx.api.listSessions();
          ctx.cache.reconcile(records);
        } finally {
          submit.disabled = false;
        }
      },
    },
    STRINGS.submitReflection,
  ) as HTMLButtonElement;

  root.append(
    el("h2", {}, STRINGS.navReflection),
    el("label", { class: "field" }, STRINGS.yourState, picker),
    el("label", { class: "field" }, STRINGS.qBlockage, blockage),
    el("label", { class: "field" }, STRINGS.qTried, tried),
    el("label", { class: "field" }, STRINGS.qGoal, goal),
    el("div", { class: "row" }, submit),
    hint,
    result,
    el("p", { class: "notice disclaimer", "data-role": "disclaimer" }, STRINGS.disclaimer),
  );
}
