import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionCache } from "../src/cache.js";
import { mountApp, pageFromHash } from "../src/app.js";
import { FakeBackend } from "./fakeBackend.js";
import { flush, mountRoot } from "./testUtils.js";

describe("app shell", () => {
  let backend: FakeBackend;
  let root: HTMLElement;

  beforeEach(() => {
    backend = new FakeBackend();
    root = mountRoot();
    window.localStorage.clear();
    window.location.hash = "";
  });

  function client(): ApiClient {
    return new ApiClient("", backend.fetch);
  }

  it("routes hashes to pages with dashboard as the default", () => {
    expect(pageFromHash("")).toBe("dashboard");
    expect(pageFromHash("#/check")).toBe("check");
    expect(pageFromHash("#/definitely-not-a-page")).toBe("dashboard");
  });

  it("shows the external-speech disclosure banner iff health reports one", async () => {
    backend.speech = { configured: true, external: true };
    await mountApp(root, client(), new SessionCache(window.localStorage));
    await flush();
    expect(root.querySelector("[data-role=external-speech-banner]")).not.toBeNull();

    const second = mountRoot();
    backend.speech = { configured: true, external: false };
    await mountApp(second, client(), new SessionCache(window.localStorage));
    await flush();
    expect(second.querySelector("[data-role=external-speech-banner]")).toBeNull();
  });

  it("hides the voice widget unless speech adapters are configured", async () => {
    backend.speech = { configured: false, external: false };
    await mountApp(root, client(), new SessionCache(window.localStorage));
    await flush();
    expect(root.querySelector("[data-role=voice-block]")).toBeNull();

    const second = mountRoot();
    backend.speech = { configured: true, external: false };
    await mountApp(second, client(), new SessionCache(window.localStorage));
    await flush();
    expect(second.querySelector("[data-role=voice-block]")).not.toBeNull();
  });

  it("keeps every browser-storage key under the mindmirror.v1 namespace", async () => {
    const cache = new SessionCache(window.localStorage);
    const app = await mountApp(root, client(), new SessionCache(window.localStorage));
    await flush();
    app.ctx.cache.rememberRecords([]);
    app.ctx.cache.setPendingCheck({ confirmed_state: "sad" });
    for (let i = 0; i < window.localStorage.length; i += 1) {
      expect(window.localStorage.key(i)!.startsWith("mindmirror.v1.")).toBe(true);
    }
    expect(cache.ownKeys().length).toBeGreaterThan(0);
  });

  it("survives an unreachable backend at mount time", async () => {
    const failing = new ApiClient("", () => Promise.reject(new Error("down")));
    const app = await mountApp(root, failing, new SessionCache(window.localStorage));
    await flush();
    expect(app.ctx.health).toBeNull();
    expect(root.querySelector("main")).not.toBeNull();
  });
});
