import type {
  ChatReflectRequest,
  ChatReflectResponse,
  HealthInfo,
  NewSessionRequest,
  ReviewReport,
  SessionRecord,
  VoiceChatResponse,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function fail(response: Response): Promise<never> {
  let code = "UnknownError";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiRequestError(response.status, code, message);
}

/** Thin typed client over the local service; the fetch function is
 * injectable so tests can run against an in-memory backend. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) await fail(response);
    return (await response.json()) as T;
  }

  private async sendJson<T>(method: string, path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await fail(response);
    return (await response.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.getJson("/api/health");
  }

  analyzeEmotion(imageBase64: string): Promise<{ prediction: SessionRecord["detected_emotion"] }> {
    return this.sendJson("POST", "/api/emotion/analyze", { image: imageBase64 });
  }

  reflectChat(request: ChatReflectRequest): Promise<ChatReflectResponse> {
    return this.sendJson("POST", "/api/chat", request);
  }

  async voiceChat(audio: Blob): Promise<VoiceChatResponse> {
    const form = new FormData();
    form.append("mode", "voice");
    form.append("audio", audio, "clip.webm");
    const response = await this.fetchFn(this.baseUrl + "/api/chat", {
      method: "POST",
      body: form,
    });
    if (!response.ok) await fail(response);
    return (await response.json()) as VoiceChatResponse;
  }

  saveSession(record: NewSessionRequest): Promise<{ id: string }> {
    return this.sendJson("POST", "/api/sessions", record);
  }

  listSessions(from?: string, to?: string): Promise<{ records: SessionRecord[] }> {
    const params = new URLSearchParams();
    if (from) params.set("from", from);
    if (to) params.set("to", to);
    const query = params.toString();
    return this.getJson(`/api/sessions${query ? "?" + query : ""}`);
  }

  async deleteSession(id: string): Promise<boolean> {
    const response = await this.fetchFn(`${this.baseUrl}/api/sessions/${id}`, {
      method: "DELETE",
    });
    if (response.status === 404) return false;
    if (!response.ok) await fail(response);
    return true;
  }

  dailyReport(date?: string): Promise<ReviewReport> {
    return this.getJson(`/api/reports/daily${date ? "?date=" + date : ""}`);
  }

  weeklyReport(week?: string): Promise<ReviewReport> {
    return this.getJson(`/api/reports/weekly${week ? "?week=" + week : ""}`);
  }

  mediaUrl(id: string): string {
    return `${this.baseUrl}/api/media/${id}`;
  }
}
