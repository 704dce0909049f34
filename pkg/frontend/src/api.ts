/** Thin fetch client for the session service endpoints. */

import type { RequestListPayload, ResponseBody, SessionSummary } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface RespondResult {
  status: number;
  body: unknown;
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.url(path));
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  async sessions(): Promise<SessionSummary[]> {
    const data = await this.getJson<{ sessions: SessionSummary[] }>("/sessions");
    return data.sessions;
  }

  async requests(sessionId: string): Promise<RequestListPayload> {
    return this.getJson<RequestListPayload>(
      `/sessions/${encodeURIComponent(sessionId)}/requests`,
    );
  }

  async snapshot(sessionId: string): Promise<unknown> {
    return this.getJson<unknown>(`/sessions/${encodeURIComponent(sessionId)}/snapshot`);
  }

  async trace(sessionId: string): Promise<{ entries: Record<string, unknown>[] }> {
    return this.getJson<{ entries: Record<string, unknown>[] }>(
      `/sessions/${encodeURIComponent(sessionId)}/trace`,
    );
  }

  /** POST a response; never throws on HTTP error codes (callers branch on status). */
  async respond(sessionId: string, body: ResponseBody): Promise<RespondResult> {
    const response = await this.fetchFn(
      this.url(`/sessions/${encodeURIComponent(sessionId)}/responses`),
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    let parsed: unknown = null;
    try {
      parsed = await response.json();
    } catch {
      parsed = null;
    }
    return { status: response.status, body: parsed };
  }
}
