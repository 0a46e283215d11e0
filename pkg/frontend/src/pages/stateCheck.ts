import type { AppContext } from "../context.js";
import { clear, el } from "../dom.js";
import { CameraPermissionDenied, grabFrame, startCamera, stopCamera } from "../capture.js";
import { STRINGS } from "../strings.js";
import { LABELS, type EmotionLabel, type EmotionPrediction } from "../types.js";

// State check: optional camera cue, mandatory human confirmation. The
// predicted label only pre-selects the picker; whatever the user leaves
// selected is what gets stored.

export function renderStateCheck(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  let detected: EmotionPrediction | undefined;
  let analyzing = false;
  let cameraOn = false;

  const video = el("video", { class: "camera", autoplay: "", muted: "" });
  const cameraHint = el("p", { class: "hint camera-hint" });
  const detectedLine = el("p", { class: "detected", "data-role": "detected" });

  const picker = el("select", { class: "state-picker", "data-role": "state-picker" });
  for (const label of LABELS) {
    picker.append(el("option", { value: label }, label));
  }
  picker.value = "neutral";

  const status = el("p", { class: "status", "data-role": "status" });

  const analyzeButton = el(
    "button",
    {
      class: "primary",
      "data-role": "analyze",
      disabled: true,
      onclick: async () => {
        // one in-flight analysis at a time; button stays disabled meanwhile
        if (analyzing || !cameraOn) return;
        analyzing = true;
        analyzeButton.disabled = true;
        try {
          const frame = grabFrame(video);
          const { prediction } = await ctx.api.analyzeEmotion(frame);
          detected = prediction ?? undefined;
          if (detected) {
            detectedLine.textContent = `${STRINGS.detectedAs}: ${detected.label}`;
            picker.value = detected.label;
          }
        } catch (error) {
          status.textContent = error instanceof Error ? error.message : String(error);
        } finally {
          analyzing = false;
          analyzeButton.disabled = !cameraOn;
        }
      },
    },
    STRINGS.captureAnalyze,
  ) as HTMLButtonElement;

  const cameraButton = el(
    "button",
    {
      "data-role": "start-camera",
      onclick: async () => {
        try {
          await startCamera(video);
          cameraOn = true;
          analyzeButton.disabled = false;
          cameraHint.textContent = "";
          video.classList.add("live");
        } catch (error) {
          // the manual path stays fully usable without a camera
          cameraOn = false;
          analyzeButton.disabled = true;
          cameraHint.textContent =
            error instanceof CameraPermissionDenied
              ? STRINGS.cameraUnavailable
              : String(error);
        }
      },
    },
    STRINGS.startCamera,
  ) as HTMLButtonElement;

  const saveButton = el(
    "button",
    {
      class: "primary",
      "data-role": "save-state",
      onclick: async () => {
        const confirmed = picker.value as EmotionLabel;
        const body = detected
          ? { confirmed_state: confirmed, detected_emotion: detected }
          : { confirmed_state: confirmed };
        const { id } = await ctx.api.saveSession(body);
        status.textContent = `${STRINGS.stateSaved} (#${id.slice(0, 8)})`;
        const { records } = await ctx.api.listSessions();
        ctx.cache.reconcile(records);
      },
    },
    STRINGS.saveState,
  );

  const reflectButton = el(
    "button",
    {
      "data-role": "to-reflection",
      onclick: () => {
        ctx.cache.setPendingCheck({
          confirmed_state: picker.value as EmotionLabel,
          ...(detected ? { detected_emotion: detected } : {}),
        });
        ctx.navigate("#/reflect");
      },
    },
    STRINGS.continueReflection,
  );

  root.append(
    el("h2", {}, STRINGS.navStateCheck),
    el("p", { class: "notice privacy", "data-role": "privacy-notice" }, STRINGS.privacyNotice),
    el("div", { class: "camera-block" }, video, cameraHint,
      el("div", { class: "row" }, cameraButton, analyzeButton)),
    detectedLine,
    el("label", { class: "field" }, STRINGS.yourState, picker),
    el("div", { class: "row" }, saveButton, reflectButton),
    status,
    el("p", { class: "notice disclaimer", "data-role": "disclaimer" }, STRINGS.disclaimer),
  );

  // leaving the page releases the camera
  root.addEventListener("page:teardown", () => stopCamera(video), { once: true });
}
