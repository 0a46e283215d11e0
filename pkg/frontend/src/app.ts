import { ApiClient } from "./api.js";
import { SessionCache } from "./cache.js";
import type { AppContext } from "./context.js";
import { clear, el } from "./dom.js";
import { renderDashboard } from "./pages/dashboard.js";
import { renderHistory } from "./pages/history.js";
import { renderReflection } from "./pages/reflection.js";
import { renderReports } from "./pages/reports.js";
import { renderStateCheck } from "./pages/stateCheck.js";
import { STRINGS } from "./strings.js";

export type PageName = "dashboard" | "check" | "reflect" | "reports" | "history";

const PAGES: Record<PageName, (root: HTMLElement, ctx: AppContext) => void> = {
  dashboard: renderDashboard,
  check: renderStateCheck,
  reflect: renderReflection,
  reports: renderReports,
  history: renderHistory,
};

export function pageFromHash(hash: string): PageName {
  const name = hash.replace(/^#\//, "");
  return (Object.keys(PAGES) as PageName[]).includes(name as PageName)
    ? (name as PageName)
    : "dashboard";
}

export interface App {
  ctx: AppContext;
  renderPage(name: PageName): void;
}

export async function mountApp(
  root: HTMLElement,
  api: ApiClient = new ApiClient(),
  cache: SessionCache = new SessionCache(),
  confirmFn: (message: string) => boolean = (message) => window.confirm(message),
): Promise<App> {
  const ctx: AppContext = {
    api,
    cache,
    health: null,
    navigate: (hash) => {
      window.location.hash = hash;
      renderPage(pageFromHash(hash));
    },
    confirm: confirmFn,
  };
  try {
    ctx.health = await api.health();
  } catch {
    ctx.health = null;
  }

  clear(root);
  const nav = el(
    "nav",
    { class: "topnav" },
    el("span", { class: "brand" }, STRINGS.appTitle),
    navLink("#/dashboard", STRINGS.navDashboard),
    navLink("#/check", STRINGS.navStateCheck),
    navLink("#/reflect", STRINGS.navReflection),
    navLink("#/reports", STRINGS.navReports),
    navLink("#/history", STRINGS.navHistory),
  );
  const banner = el("div", { class: "banner-area" });
  // third-party speech processing must be disclosed whenever active
  if (ctx.health?.speech.external) {
    banner.append(
      el("p", { class: "banner external-speech", "data-role": "external-speech-banner" },
        STRINGS.externalSpeechBanner),
    );
  }
  const outlet = el("main", { class: "page", "data-role": "page" });
  root.append(nav, banner, outlet);

  function renderPage(name: PageName): void {
    outlet.dispatchEvent(new Event("page:teardown"));
    PAGES[name](outlet, ctx);
  }

  window.addEventListener("hashchange", () => renderPage(pageFromHash(window.location.hash)));
  renderPage(pageFromHash(window.location.hash));
  return { ctx, renderPage };
}

function navLink(hash: string, label: string): HTMLElement {
  return el("a", { href: hash, class: "nav-link" }, label);
}

// browser entry point; tests import mountApp directly instead
if (typeof document !== "undefined" && document.getElementById("app")) {
  void mountApp(document.getElementById("app") as HTMLElement);
}
