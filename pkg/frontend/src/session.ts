/**
 * Console session state machine.
 *
 * Owns the fetched dispute queue, the cursor, and local unsubmitted drafts.
 * Drafts and the cursor persist to storage after every mutation so a page
 * reload restores the session exactly; a draft is discarded only once the
 * server acknowledges its submission.  Submissions reuse one idempotency
 * key per draft, so network-level retries can never decrement the queue
 * twice.
 */

import { ApiRequestError, type AuditApi } from "./api.js";
import type {
  ConfidenceLevel,
  Decision,
  DecisionAck,
  DisputeView,
  Draft,
  KeyValueStorage,
  Verdict,
} from "./types.js";

const UNSUPPORTED: ReadonlySet<Verdict> = new Set(["Inconclusive", "Contradictory"]);

function freshKey(): string {
  const rand =
    globalThis.crypto && "randomUUID" in globalThis.crypto
      ? globalThis.crypto.randomUUID()
      : Math.random().toString(36).slice(2);
  return `idem-${Date.now().toString(36)}-${rand}`;
}

interface PersistedState {
  cursor: number;
  drafts: Record<string, Draft>;
}

export interface SubmitOutcome {
  ack: DecisionAck;
  retries: number;
}

export class ValidationError extends Error {
  constructor(
    public readonly field: "decision" | "confidence" | "error_code",
    message: string,
  ) {
    super(message);
    this.name = "ValidationError";
  }
}

export class ConsoleSession {
  private disputes: DisputeView[] = [];
  private drafts = new Map<string, Draft>();
  private cursorIndex = 0;
  private roundState: "AWAITING_AUDIT" | "COMMITTED" = "AWAITING_AUDIT";
  private remainingCount = 0;

  constructor(
    private readonly api: AuditApi,
    readonly roundId: string,
    private readonly storage: KeyValueStorage,
    private readonly maxRetries = 3,
  ) {}

  private get storageKey(): string {
    return `auditbench-console:${this.roundId}`;
  }

  /** Fetch the queue and restore any persisted cursor/drafts. */
  async load(): Promise<void> {
    const queue = await this.api.listDisputes(this.roundId);
    this.disputes = queue.disputes;
    this.roundState = queue.state;
    this.remainingCount = queue.remaining;
    const raw = this.storage.getItem(this.storageKey);
    if (raw) {
      try {
        const persisted = JSON.parse(raw) as PersistedState;
        this.cursorIndex = persisted.cursor;
        for (const [disputeId, draft] of Object.entries(persisted.drafts)) {
          // drafts for disputes another session already resolved are stale
          const view = this.disputes.find((d) => d.dispute_id === disputeId);
          if (view && view.status === "open") {
            this.drafts.set(disputeId, draft);
          }
        }
      } catch {
        this.storage.removeItem(this.storageKey);
      }
    }
    this.clampCursor();
    this.persist();
  }

  private persist(): void {
    const state: PersistedState = {
      cursor: this.cursorIndex,
      drafts: Object.fromEntries(this.drafts),
    };
    this.storage.setItem(this.storageKey, JSON.stringify(state));
  }

  private clampCursor(): void {
    if (this.disputes.length === 0) {
      this.cursorIndex = 0;
      return;
    }
    this.cursorIndex = Math.min(Math.max(this.cursorIndex, 0), this.disputes.length - 1);
  }

  // -- read accessors -------------------------------------------------------

  get cursor(): number {
    return this.cursorIndex;
  }

  get committed(): boolean {
    return this.roundState === "COMMITTED";
  }

  get queue(): readonly DisputeView[] {
    return this.disputes;
  }

  current(): DisputeView | undefined {
    return this.disputes[this.cursorIndex];
  }

  progress(): { done: number; total: number; remaining: number } {
    const total = this.disputes.length;
    return { done: total - this.remainingCount, total, remaining: this.remainingCount };
  }

  draftFor(disputeId: string): Draft {
    let draft = this.drafts.get(disputeId);
    if (!draft) {
      draft = { idempotencyKey: freshKey() };
      this.drafts.set(disputeId, draft);
    }
    return draft;
  }

  // -- navigation -------------------------------------------------------------

  next(): void {
    this.moveCursor(+1);
  }

  prev(): void {
    this.moveCursor(-1);
  }

  private moveCursor(step: number): void {
    if (this.disputes.length === 0) return;
    this.cursorIndex =
      (this.cursorIndex + step + this.disputes.length) % this.disputes.length;
    this.persist();
  }

  /** Advance to the next open dispute after the given index, if any. */
  private advanceToOpen(from: number): void {
    const n = this.disputes.length;
    for (let offset = 1; offset <= n; offset += 1) {
      const candidate = this.disputes[(from + offset) % n];
      if (candidate && candidate.status === "open") {
        this.cursorIndex = this.disputes.indexOf(candidate);
        this.persist();
        return;
      }
    }
    this.persist();
  }

  // -- draft edits -------------------------------------------------------------

  private editDraft(mutate: (draft: Draft) => void): void {
    const view = this.current();
    if (!view || view.status !== "open") return;
    const draft = this.draftFor(view.dispute_id);
    mutate(draft);
    this.persist();
  }

  setDecision(decision: Decision): void {
    this.editDraft((draft) => {
      draft.decision = decision;
    });
  }

  setConfidence(confidence: ConfidenceLevel): void {
    this.editDraft((draft) => {
      draft.confidence = confidence;
    });
  }

  setErrorCode(code: string | undefined): void {
    this.editDraft((draft) => {
      draft.errorCode = code;
    });
  }

  setRationale(text: string): void {
    this.editDraft((draft) => {
      draft.rationaleText = text;
    });
  }

  /** Final verdict the pending draft would install. */
  outcomeVerdict(view: DisputeView, draft: Draft): Verdict | undefined {
    if (draft.decision === "ACCEPT") return view.proposal.verdict;
    if (draft.decision === "REJECT") return view.incumbent.verdict;
    return undefined;
  }

  /** Local contract checks mirroring the server's 422 rules. */
  validate(view: DisputeView, draft: Draft): ValidationError | null {
    if (!draft.decision) {
      return new ValidationError("decision", "choose ACCEPT or REJECT first");
    }
    if (!draft.confidence) {
      return new ValidationError("confidence", "choose a confidence level");
    }
    const outcome = this.outcomeVerdict(view, draft);
    if (outcome && UNSUPPORTED.has(outcome) && !draft.errorCode) {
      return new ValidationError(
        "error_code",
        "an Unsupported outcome needs an error category",
      );
    }
    return null;
  }

  // -- submission ---------------------------------------------------------------

  /**
   * Submit the current dispute's draft.  Network failures retry with the
   * same idempotency key; server rejections surface as ApiRequestError
   * (422 keeps the draft for inline fixes, 409 refreshes the queue).
   */
  async submit(): Promise<SubmitOutcome> {
    const view = this.current();
    if (!view) throw new Error("no dispute under cursor");
    if (view.status !== "open") throw new Error("dispute is not open");
    const draft = this.draftFor(view.dispute_id);
    const invalid = this.validate(view, draft);
    if (invalid) throw invalid;

    const submission = {
      decision: draft.decision as Decision,
      confidence: draft.confidence as ConfidenceLevel,
      rationale_text: draft.rationaleText ?? "",
      error_code: draft.errorCode ?? null,
      idempotency_key: draft.idempotencyKey,
    };
    let retries = 0;
    for (;;) {
      try {
        const ack = await this.api.submitDecision(view.dispute_id, submission);
        this.applyAck(view, ack);
        return { ack, retries };
      } catch (error) {
        if (error instanceof ApiRequestError) {
          if (error.status === 409) {
            await this.load(); // another session raced us; resync
          }
          throw error;
        }
        retries += 1; // network-level failure: same key, try again
        if (retries > this.maxRetries) throw error;
      }
    }
  }

  private applyAck(view: DisputeView, ack: DecisionAck): void {
    view.status = "decided";
    this.drafts.delete(view.dispute_id);
    this.remainingCount = ack.remaining;
    if (ack.round_state === "COMMITTED") {
      this.roundState = "COMMITTED";
    }
    this.advanceToOpen(this.disputes.indexOf(view));
  }

  async skip(): Promise<void> {
    const view = this.current();
    if (!view || view.status !== "open") return;
    const ack = await this.api.skipDispute(view.dispute_id);
    view.status = "skipped";
    this.drafts.delete(view.dispute_id);
    this.remainingCount = ack.remaining;
    if (ack.round_state === "COMMITTED") {
      this.roundState = "COMMITTED";
    }
    this.advanceToOpen(this.disputes.indexOf(view));
  }
}
