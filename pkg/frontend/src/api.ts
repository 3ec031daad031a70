// Thin typed client over the HTTP API. No scoring or reordering happens
// here: responses pass through exactly as the server produced them.

import type {
  ApiErrorBody,
  AskResponse,
  IconAssignment,
  IngestResponse,
  LabelRow,
  SegmentRow,
  Strategy,
} from "./types";

export class ApiRequestError extends Error {
  readonly code: ApiErrorBody["code"];
  readonly status: number;
  readonly detail?: string | null;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
    this.detail = body.detail;
  }
}

export class NetworkError extends Error {
  constructor(cause: unknown) {
    super("network request failed");
    this.cause = cause;
  }
}

async function toError(response: Response): Promise<ApiRequestError> {
  let body: ApiErrorBody;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    body = { code: "internal", message: `HTTP ${response.status}` };
  }
  return new ApiRequestError(response.status, body);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      throw await toError(response);
    }
    return (await response.json()) as T;
  }

  ingest(policyId: string, source: string, url?: string): Promise<IngestResponse> {
    return this.request<IngestResponse>("/policies", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ policy_id: policyId, source, url }),
    });
  }

  segments(policyId: string): Promise<SegmentRow[]> {
    return this.request<SegmentRow[]>(`/policies/${encodeURIComponent(policyId)}/segments`);
  }

  labels(policyId: string): Promise<LabelRow[]> {
    return this.request<LabelRow[]>(`/policies/${encodeURIComponent(policyId)}/labels`);
  }

  ask(policyId: string, question: string): Promise<AskResponse> {
    return this.request<AskResponse>(`/policies/${encodeURIComponent(policyId)}/ask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question }),
    });
  }

  icons(policyId: string, strategy: Strategy = "conservative"): Promise<IconAssignment[]> {
    const params = new URLSearchParams({ strategy });
    return this.request<IconAssignment[]>(
      `/policies/${encodeURIComponent(policyId)}/icons?${params}`,
    );
  }

  health(): Promise<{ status: string; policies: number }> {
    return this.request("/health");
  }
}
