/** Typed client over the audit service's HTTP API. */

import type {
  DecisionAck,
  DecisionSubmission,
  DisputeQueue,
  RoundReport,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

/** What the console needs from the service; ApiClient is the HTTP form. */
export interface AuditApi {
  listDisputes(roundId: string): Promise<DisputeQueue>;
  submitDecision(disputeId: string, submission: DecisionSubmission): Promise<DecisionAck>;
  skipDispute(disputeId: string): Promise<{ remaining: number; round_state: string }>;
  roundReport(roundId: string): Promise<RoundReport>;
}

export class ApiClient implements AuditApi {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiRequestError(
        response.status,
        typeof payload.code === "string" ? payload.code : "error",
        typeof payload.message === "string" ? payload.message : response.statusText,
      );
    }
    return payload as T;
  }

  listDisputes(roundId: string): Promise<DisputeQueue> {
    return this.request<DisputeQueue>("GET", `/rounds/${roundId}/disputes`);
  }

  submitDecision(disputeId: string, submission: DecisionSubmission): Promise<DecisionAck> {
    return this.request<DecisionAck>("POST", `/disputes/${disputeId}/decision`, submission);
  }

  skipDispute(disputeId: string): Promise<{ remaining: number; round_state: string }> {
    return this.request("POST", `/disputes/${disputeId}/skip`);
  }

  roundReport(roundId: string): Promise<RoundReport> {
    return this.request<RoundReport>("GET", `/rounds/${roundId}/report`);
  }
}
