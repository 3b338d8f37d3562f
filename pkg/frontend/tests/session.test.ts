/** Session state machine tests against an in-memory mock service. */

import { beforeEach, describe, expect, it } from "vitest";
import { ApiRequestError, type AuditApi } from "../src/api.js";
import { actionForKey, handleKey } from "../src/keyboard.js";
import { ConsoleSession, ValidationError } from "../src/session.js";
import type {
  DecisionAck,
  DecisionSubmission,
  DisputeQueue,
  DisputeView,
  Verdict,
} from "../src/types.js";
import { MemoryStorage } from "./helpers.js";

function makeDispute(
  index: number,
  incumbent: Verdict,
  proposed: Verdict,
  total: number,
): DisputeView {
  return {
    dispute_id: `rnd-1~c${index}`,
    claim_id: `c${index}`,
    claim_text: `claim number ${index}`,
    report_id: "r1",
    report_excerpt: `before claim number ${index} after`,
    claim_start: 7,
    claim_end: 7 + `claim number ${index}`.length,
    incumbent: { verdict: incumbent, rationale_text: "old reasoning", evidence_refs: [] },
    proposal: {
      verdict: proposed,
      rationale_text: "new reasoning",
      evidence_refs: ["src://1"],
      challenger: "m",
    },
    position: { index, total },
    status: "open",
    label_definitions: { Supported: "backed by evidence" },
    error_codes: [
      { code: "A-N1", stage: "Analysis", description: "numeric value distorted" },
    ],
  };
}

/** Mock service with full idempotency semantics. */
class MockApi implements AuditApi {
  disputes: DisputeView[];
  acks = new Map<string, DecisionAck>();
  decided = new Set<string>();
  submissions: DecisionSubmission[] = [];

  constructor(disputes: DisputeView[]) {
    this.disputes = disputes;
  }

  private remaining(): number {
    return this.disputes.filter((d) => !this.decided.has(d.dispute_id)).length;
  }

  async listDisputes(): Promise<DisputeQueue> {
    const views = this.disputes.map((d) => ({
      ...d,
      status: this.decided.has(d.dispute_id) ? ("decided" as const) : ("open" as const),
    }));
    return {
      round_id: "rnd-1",
      state: this.remaining() === 0 ? "COMMITTED" : "AWAITING_AUDIT",
      total: views.length,
      remaining: this.remaining(),
      disputes: views,
    };
  }

  async submitDecision(disputeId: string, submission: DecisionSubmission): Promise<DecisionAck> {
    this.submissions.push(submission);
    const existing = this.acks.get(submission.idempotency_key);
    if (existing) return existing;
    if (this.decided.has(disputeId)) {
      throw new ApiRequestError(409, "already_decided", "different key");
    }
    this.decided.add(disputeId);
    const view = this.disputes.find((d) => d.dispute_id === disputeId);
    if (!view) throw new ApiRequestError(404, "not_found", "unknown dispute");
    const ack: DecisionAck = {
      dispute_id: disputeId,
      decision: submission.decision,
      final_verdict:
        submission.decision === "ACCEPT" ? view.proposal.verdict : view.incumbent.verdict,
      remaining: this.remaining(),
      round_state: this.remaining() === 0 ? "COMMITTED" : "AWAITING_AUDIT",
      idempotency_key: submission.idempotency_key,
    };
    this.acks.set(submission.idempotency_key, ack);
    return ack;
  }

  async skipDispute(disputeId: string) {
    this.decided.add(disputeId);
    return {
      remaining: this.remaining(),
      round_state: this.remaining() === 0 ? "COMMITTED" : "AWAITING_AUDIT",
    };
  }

  async roundReport() {
    return { round: 1, challenger: "m", conflicts: 0, audited: 0, accepted: 0, score: null };
  }
}

/** Same mock, but each submission's first response is dropped on the floor. */
class FlakyApi extends MockApi {
  failures = 0;
  private dropNext = true;

  override async submitDecision(disputeId: string, submission: DecisionSubmission) {
    const ack = await super.submitDecision(disputeId, submission);
    if (this.dropNext) {
      this.dropNext = false;
      this.failures += 1;
      throw new TypeError("network dropped");
    }
    return ack;
  }
}

function makeQueue(n = 4): DisputeView[] {
  return Array.from({ length: n }, (_, i) =>
    makeDispute(i, i % 2 === 0 ? "Supported" : "Inconclusive", i % 2 === 0 ? "Contradictory" : "Supported", n),
  );
}

describe("ConsoleSession", () => {
  let api: MockApi;
  let storage: MemoryStorage;
  let session: ConsoleSession;

  beforeEach(async () => {
    api = new MockApi(makeQueue());
    storage = new MemoryStorage();
    session = new ConsoleSession(api, "rnd-1", storage);
    await session.load();
  });

  it("tracks progress from the server queue", () => {
    expect(session.progress()).toEqual({ done: 0, total: 4, remaining: 4 });
  });

  it("blocks submission until the draft is complete", async () => {
    await expect(session.submit()).rejects.toBeInstanceOf(ValidationError);
    session.setDecision("ACCEPT");
    await expect(session.submit()).rejects.toHaveProperty("field", "confidence");
    session.setConfidence("Confident");
    // ACCEPT installs Contradictory -> error code required
    await expect(session.submit()).rejects.toHaveProperty("field", "error_code");
    session.setErrorCode("A-N1");
    const outcome = await session.submit();
    expect(outcome.ack.remaining).toBe(3);
    expect(session.cursor).toBe(1); // advanced to next open dispute
  });

  it("requires no error code when the outcome is Supported", async () => {
    session.next(); // dispute 1: incumbent Inconclusive, proposal Supported
    session.setDecision("ACCEPT");
    session.setConfidence("Certain");
    const outcome = await session.submit();
    expect(outcome.ack.final_verdict).toBe("Supported");
  });

  it("keyboard flow maps keys onto session actions", async () => {
    expect(actionForKey("a")).toBe("accept");
    expect(actionForKey("Enter")).toBe("submit");
    expect(actionForKey("x")).toBe("none");
    await handleKey(session, "a");
    await handleKey(session, "2");
    await handleKey(session, "x");
    session.setErrorCode("A-N1");
    await handleKey(session, "Enter");
    expect(session.progress().remaining).toBe(3);
  });

  it("restores cursor and drafts across a reload", async () => {
    session.next();
    session.setDecision("REJECT");
    session.setConfidence("Uncertain");
    session.setRationale("needs a second look");
    const draftBefore = session.draftFor(session.current()!.dispute_id);

    const reloaded = new ConsoleSession(api, "rnd-1", storage);
    await reloaded.load();
    expect(reloaded.cursor).toBe(1);
    const draftAfter = reloaded.draftFor(reloaded.current()!.dispute_id);
    expect(draftAfter).toEqual(draftBefore); // same content AND same key
  });

  it("drops the draft once the server acknowledges", async () => {
    session.setDecision("REJECT");
    session.setConfidence("Confident");
    const key = session.draftFor(session.current()!.dispute_id).idempotencyKey;
    await session.submit();
    const persisted = JSON.parse(storage.getItem("auditbench-console:rnd-1")!);
    expect(Object.keys(persisted.drafts)).not.toContain("rnd-1~c0");
    // a fresh draft for the same dispute would get a fresh key
    expect(session.draftFor("rnd-1~c0").idempotencyKey).not.toBe(key);
  });

  it("retries a dropped response with the same key and decrements once", async () => {
    const flaky = new FlakyApi(makeQueue(2));
    const flakySession = new ConsoleSession(flaky, "rnd-1", new MemoryStorage());
    await flakySession.load();
    flakySession.setDecision("REJECT");
    flakySession.setConfidence("Confident");
    const outcome = await flakySession.submit();
    expect(outcome.retries).toBe(1);
    expect(flaky.failures).toBe(1);
    expect(flaky.submissions.length).toBe(2);
    expect(new Set(flaky.submissions.map((s) => s.idempotency_key)).size).toBe(1);
    expect(outcome.ack.remaining).toBe(1); // exactly one decrement
    expect(flakySession.progress().remaining).toBe(1);
  });

  it("skip leaves the dispute unaudited and advances", async () => {
    await session.skip();
    expect(session.current()!.claim_id).toBe("c1");
    expect(session.progress().remaining).toBe(3);
  });

  it("marks the session committed when the last dispute resolves", async () => {
    for (let i = 0; i < 4; i += 1) {
      const view = session.current()!;
      session.setDecision("REJECT");
      session.setConfidence("Confident");
      if (view.incumbent.verdict !== "Supported") {
        session.setErrorCode("A-N1");
      }
      await session.submit();
    }
    expect(session.committed).toBe(true);
    expect(session.progress().remaining).toBe(0);
  });
});
