import type { ApiClient } from "./api.js";
import type { SessionCache } from "./cache.js";
import type { HealthInfo } from "./types.js";

export interface AppContext {
  api: ApiClient;
  cache: SessionCache;
  health: HealthInfo | null;
  navigate(hash: string): void;
  /** Injectable confirm dialog so destructive actions stay testable. */
  confirm(message: string): boolean;
}
