/** Wire types mirroring the audit service's JSON payloads. */

export type Verdict = "Supported" | "Inconclusive" | "Contradictory" | "NoneVerifiable";
export type Decision = "ACCEPT" | "REJECT";
export type ConfidenceLevel = "Certain" | "Confident" | "Uncertain";

export interface RationaleView {
  verdict: Verdict;
  rationale_text: string;
  evidence_refs: string[];
  challenger?: string;
}

export interface ErrorCodeEntry {
  code: string;
  stage: string;
  description: string;
}

export interface DisputeView {
  dispute_id: string;
  claim_id: string;
  claim_text: string;
  report_id: string;
  report_excerpt: string;
  claim_start: number;
  claim_end: number;
  incumbent: RationaleView;
  proposal: RationaleView;
  position: { index: number; total: number };
  status: "open" | "decided" | "skipped";
  label_definitions: Record<string, string>;
  error_codes: ErrorCodeEntry[];
}

export interface DisputeQueue {
  round_id: string;
  state: "AWAITING_AUDIT" | "COMMITTED";
  total: number;
  remaining: number;
  disputes: DisputeView[];
}

export interface DecisionSubmission {
  decision: Decision;
  rationale_text?: string;
  error_code?: string | null;
  confidence: ConfidenceLevel;
  idempotency_key: string;
}

export interface DecisionAck {
  dispute_id: string;
  decision: Decision;
  final_verdict: Verdict;
  remaining: number;
  round_state: string;
  idempotency_key: string;
}

export interface RoundReport {
  round: number;
  challenger: string;
  conflicts: number;
  audited: number;
  accepted: number;
  score: number | null;
  [key: string]: unknown;
}

/** Unsubmitted decision state for one dispute. */
export interface Draft {
  decision?: Decision;
  confidence?: ConfidenceLevel;
  errorCode?: string;
  rationaleText?: string;
  /** Generated once per draft; reused verbatim on every retry. */
  idempotencyKey: string;
}

/** Minimal storage contract so tests can inject a fake localStorage. */
export interface KeyValueStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}
