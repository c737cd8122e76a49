/**
 * Typed client for the control service.
 *
 * The bearer token doubles as the subscriber id. Service-side failures
 * arrive as {code, message, findings[]} and surface here as ApiError;
 * anything else (connection refused, DNS, abort) propagates as thrown
 * by fetch so callers can tell "service said no" from "no service".
 */

import type {
  DesignDoc,
  ErrorBody,
  Finding,
  HealthPayload,
  LedgerPayload,
  MonitorPayload,
  SubmitResponse,
  TopologyDoc,
  WindowPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly findings: Finding[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface SubmitBody {
  request_id: string;
  design: DesignDoc;
  start_s?: number;
  end_s?: number;
  priority?: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ConsoleApi {
  constructor(
    readonly baseUrl: string,
    readonly token: string,
    private readonly fetchImpl: FetchLike = (...a) => fetch(...a),
  ) {}

  get subscriberId(): string {
    return this.token;
  }

  private async request<T>(path: string, init: RequestInit = {}, auth = true): Promise<T> {
    const headers = new Headers(init.headers);
    if (auth) headers.set("Authorization", `Bearer ${this.token}`);
    if (init.body) headers.set("Content-Type", "application/json");
    const res = await this.fetchImpl(this.baseUrl + path, { ...init, headers });
    if (!res.ok) throw await toApiError(res);
    return (await res.json()) as T;
  }

  health(): Promise<HealthPayload> {
    return this.request<HealthPayload>("/health", {}, false);
  }

  topology(): Promise<TopologyDoc> {
    return this.request<TopologyDoc>("/topology", {}, false);
  }

  submitRequest(body: SubmitBody): Promise<SubmitResponse> {
    return this.request<SubmitResponse>("/requests", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  schedule(requestId: string): Promise<WindowPayload> {
    return this.request<WindowPayload>(`/requests/${encodeURIComponent(requestId)}/schedule`, {
      method: "POST",
    });
  }

  instantiate(requestId: string): Promise<MonitorPayload> {
    return this.request<MonitorPayload>("/instantiations", {
      method: "POST",
      body: JSON.stringify({ request_id: requestId }),
    });
  }

  monitor(handleId: string): Promise<MonitorPayload> {
    return this.request<MonitorPayload>(`/instantiations/${encodeURIComponent(handleId)}`);
  }

  /** Raw Response; the body is an NDJSON stream consumed by stream.ts. */
  async fetchCounts(
    handleId: string,
    opts: { follow?: boolean; afterPs?: number; signal?: AbortSignal } = {},
  ): Promise<Response> {
    const params = new URLSearchParams({
      follow: String(opts.follow ?? true),
      after_ps: String(opts.afterPs ?? -1),
    });
    const res = await this.fetchImpl(
      `${this.baseUrl}/instantiations/${encodeURIComponent(handleId)}/counts?${params}`,
      {
        headers: { Authorization: `Bearer ${this.token}` },
        signal: opts.signal ?? null,
      },
    );
    if (!res.ok) throw await toApiError(res);
    return res;
  }

  archiveUrl(handleId: string): string {
    return `${this.baseUrl}/archives/${encodeURIComponent(handleId)}`;
  }

  /** Download the run archive; returns the zip plus its manifest digest. */
  async downloadArchive(handleId: string): Promise<{ blob: Blob; manifestSha256: string }> {
    const res = await this.fetchImpl(this.archiveUrl(handleId), {
      headers: { Authorization: `Bearer ${this.token}` },
    });
    if (!res.ok) throw await toApiError(res);
    return {
      blob: await res.blob(),
      manifestSha256: res.headers.get("x-manifest-sha256") ?? "",
    };
  }

  ledger(): Promise<LedgerPayload> {
    return this.request<LedgerPayload>(`/ledger/${encodeURIComponent(this.subscriberId)}`);
  }
}

async function toApiError(res: Response): Promise<ApiError> {
  let body: Partial<ErrorBody> = {};
  try {
    body = (await res.json()) as Partial<ErrorBody>;
  } catch {
    // non-JSON error body; fall through to a bare status error
  }
  return new ApiError(
    res.status,
    body.code ?? `HTTP_${res.status}`,
    body.message ?? res.statusText,
    body.findings ?? [],
  );
}
