/** Typed fetch adapter for the campaign server; the only network surface. */

import type {
  AgreementDoc,
  AnnotationDoc,
  AssignmentsDoc,
  ConflictContext,
  ErrorDoc,
  PutAck,
  PutAnnotationBody,
  RiskRegisterDoc,
  RoundsDoc,
  ScalesDoc,
  SummaryDoc,
  SusAck,
  TaxonomyDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly context: Record<string, unknown>;

  constructor(status: number, doc: ErrorDoc) {
    super(doc.message);
    this.name = "ApiError";
    this.status = status;
    this.code = doc.error;
    this.context = doc.context ?? {};
  }
}

/** Stale compare-and-swap write; carries both version numbers. */
export class ConflictError extends ApiError {
  readonly expected: number;
  readonly actual: number;

  constructor(doc: ErrorDoc) {
    super(409, doc);
    this.name = "ConflictError";
    const context = (doc.context ?? {}) as Partial<ConflictContext>;
    this.expected = context.expected ?? -1;
    this.actual = context.actual ?? -1;
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let doc: ErrorDoc;
  try {
    doc = (await response.json()) as ErrorDoc;
  } catch {
    doc = { error: "http", message: `HTTP ${response.status}` };
  }
  if (response.status === 409 && doc.error === "conflict") {
    return new ConflictError(doc);
  }
  return new ApiError(response.status, doc);
}

export class ApiClient {
  private readonly baseUrl: string;
  private token: string | null;

  constructor(baseUrl: string, token: string | null = null) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.token = token;
  }

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers = new Headers(init.headers);
    if (this.token !== null) {
      headers.set("Authorization", `Bearer ${this.token}`);
    }
    if (init.body !== undefined) {
      headers.set("Content-Type", "application/json");
    }
    const response = await fetch(`${this.baseUrl}${path}`, {
      ...init,
      headers,
    });
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return (await response.json()) as T;
  }

  taxonomy(version: number): Promise<TaxonomyDoc> {
    return this.request(`/api/taxonomy/${version}`);
  }

  scales(): Promise<ScalesDoc> {
    return this.request("/api/scales");
  }

  rounds(): Promise<RoundsDoc> {
    return this.request("/api/rounds");
  }

  assignments(roundId: string, reviewer?: string): Promise<AssignmentsDoc> {
    const query = reviewer ? `?reviewer=${encodeURIComponent(reviewer)}` : "";
    return this.request(
      `/api/rounds/${encodeURIComponent(roundId)}/assignments${query}`,
    );
  }

  summary(summaryId: string): Promise<SummaryDoc> {
    return this.request(`/api/summaries/${encodeURIComponent(summaryId)}`);
  }

  /** Saved record, or null when the reviewer has not written one yet. */
  async annotation(
    roundId: string,
    reviewerId: string,
    summaryId: string,
  ): Promise<AnnotationDoc | null> {
    try {
      return await this.request(
        `/api/rounds/${encodeURIComponent(roundId)}/annotations/` +
          `${encodeURIComponent(reviewerId)}/${encodeURIComponent(summaryId)}`,
      );
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        return null;
      }
      throw error;
    }
  }

  putAnnotation(
    roundId: string,
    reviewerId: string,
    summaryId: string,
    body: PutAnnotationBody,
  ): Promise<PutAck> {
    return this.request(
      `/api/rounds/${encodeURIComponent(roundId)}/annotations/` +
        `${encodeURIComponent(reviewerId)}/${encodeURIComponent(summaryId)}`,
      { method: "PUT", body: JSON.stringify(body) },
    );
  }

  agreementReport(roundId: string, stage: 1 | 2 | 3): Promise<AgreementDoc> {
    return this.request(
      `/api/rounds/${encodeURIComponent(roundId)}/reports/agreement` +
        `?stage=${stage}`,
    );
  }

  riskReport(roundId: string): Promise<RiskRegisterDoc> {
    return this.request(
      `/api/rounds/${encodeURIComponent(roundId)}/reports/risk`,
    );
  }

  submitSus(evaluatorId: string, items: number[]): Promise<SusAck> {
    return this.request("/api/sus", {
      method: "POST",
      body: JSON.stringify({ evaluator_id: evaluatorId, items }),
    });
  }
}
