// Thin typed client for the gateway. Every call goes through request() so
// auth failures surface uniformly as AuthError.

import type {
  ClonePair,
  NormalizedReport,
  ReportSummary,
  SourceSlice,
  WebhookResponse,
} from "./types.js";

export class AuthError extends Error {}

export class GatewayError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private token: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 401) {
      throw new AuthError("gateway rejected the token");
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const payload = await response.json();
        if (payload && payload.error) detail = payload.error;
      } catch {
        /* non-JSON error body */
      }
      throw new GatewayError(detail, response.status);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  sendUtterance(session: string, query: string): Promise<WebhookResponse> {
    return this.request("POST", "/v1/webhook", {
      session,
      query,
      timestamp: new Date().toISOString(),
    });
  }

  report(reportId: string): Promise<NormalizedReport> {
    return this.request("GET", `/v1/reports/${reportId}`);
  }

  summary(reportId: string): Promise<ReportSummary> {
    return this.request("GET", `/v1/reports/${reportId}/summary`);
  }

  clones(reportId: string): Promise<ClonePair[]> {
    return this.request("GET", `/v1/reports/${reportId}/clones`);
  }

  source(
    reportId: string,
    path: string,
    begin: number,
    end: number,
  ): Promise<SourceSlice> {
    const query = new URLSearchParams({
      path,
      begin: String(begin),
      end: String(end),
    });
    return this.request("GET", `/v1/reports/${reportId}/source?${query}`);
  }
}
