"""Round engine for evolving the benchmark under challenge and audit.

One round: evaluate a challenger against the current version, turn its
disagreements into proposals, audit a sampled fraction of them, materialize
accepted decisions as a changeset, mint the next version, and score the
challenger against it.  Offline counterfactual replay re-simulates a
recorded history at a lower audit fraction, and the maintenance check
enforces drift and stopping policy.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .errors import (
    AuditTimeout,
    InsufficientHistory,
    InvalidInput,
    ProtocolViolation,
)
from .labels import (
    ABSTAIN,
    AuditorKind,
    Confidence,
    VerdictLabel,
    collapse,
    collapsed_match,
    parse_verdict,
)
from .store import (
    BenchmarkStore,
    BenchmarkVersion,
    ChangeRecord,
    ClaimRecord,
    MicroGold,
    Rationale,
    ReportDocument,
)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Proposal:
    """A challenger's disputed verdict, paired with the incumbent it attacks."""

    claim_id: str
    proposed_verdict: VerdictLabel
    proposed_rationale: Rationale
    challenger: str
    incumbent_verdict: VerdictLabel
    incumbent_rationale: Rationale

    def __post_init__(self):
        if self.proposed_verdict == self.incumbent_verdict:
            raise InvalidInput(
                f"claim {self.claim_id!r}: proposal must disagree with the incumbent"
            )

    def to_json(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "proposed_verdict": self.proposed_verdict.value,
            "proposed_rationale": self.proposed_rationale.to_json(),
            "challenger": self.challenger,
            "incumbent_verdict": self.incumbent_verdict.value,
            "incumbent_rationale": self.incumbent_rationale.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Proposal":
        return cls(
            claim_id=obj["claim_id"],
            proposed_verdict=parse_verdict(obj["proposed_verdict"]),
            proposed_rationale=Rationale.from_json(obj["proposed_rationale"]),
            challenger=obj["challenger"],
            incumbent_verdict=parse_verdict(obj["incumbent_verdict"]),
            incumbent_rationale=Rationale.from_json(obj["incumbent_rationale"]),
        )


@dataclass(frozen=True)
class AuditorResponse:
    decision: str  # "ACCEPT" | "REJECT"
    override_rationale: Rationale | None = None
    error_code: str | None = None
    confidence: Confidence | None = None


@dataclass(frozen=True)
class AuditDecision:
    claim_id: str
    decision: str  # "ACCEPT" | "REJECT"
    final_verdict: VerdictLabel
    final_rationale: Rationale
    auditor: str
    auditor_kind: AuditorKind
    confidence: Confidence | None = None
    error_code: str | None = None

    def to_json(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "decision": self.decision,
            "final_verdict": self.final_verdict.value,
            "final_rationale": self.final_rationale.to_json(),
            "auditor": self.auditor,
            "auditor_kind": self.auditor_kind.value,
            "confidence": self.confidence.value if self.confidence else None,
            "error_code": self.error_code,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "AuditDecision":
        return cls(
            claim_id=obj["claim_id"],
            decision=obj["decision"],
            final_verdict=parse_verdict(obj["final_verdict"]),
            final_rationale=Rationale.from_json(obj["final_rationale"]),
            auditor=obj["auditor"],
            auditor_kind=AuditorKind(obj["auditor_kind"]),
            confidence=Confidence(obj["confidence"]) if obj.get("confidence") else None,
            error_code=obj.get("error_code"),
        )


@dataclass(frozen=True)
class StoppingCriteria:
    max_rounds: int | None = None
    microgold_target: float | None = None
    audit_budget: int | None = None

    def to_json(self) -> dict:
        return {
            "max_rounds": self.max_rounds,
            "microgold_target": self.microgold_target,
            "audit_budget": self.audit_budget,
        }


@dataclass(frozen=True)
class RoundConfig:
    audit_fraction: float = 1.0
    strict_mode: bool = False
    seed: int = 0
    stopping: StoppingCriteria = field(default_factory=StoppingCriteria)
    drift_threshold: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.audit_fraction <= 1.0:
            raise InvalidInput("audit_fraction must be in (0, 1]")
        if self.stopping.microgold_target is not None and not (
            0.0 <= self.stopping.microgold_target <= 1.0
        ):
            raise InvalidInput("microgold_target must be in [0, 1]")


@dataclass
class RoundReport:
    round: int
    challenger: str
    predictions: dict[str, str]
    conflicts: int
    audited: int
    accepted: int
    rejected_log: list[dict]
    score: float | None
    n_scoreable: int
    microgold_accuracy: float | None
    cumulative_change_fraction: float

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "challenger": self.challenger,
            "predictions": self.predictions,
            "conflicts": self.conflicts,
            "audited": self.audited,
            "accepted": self.accepted,
            "rejected_log": self.rejected_log,
            "score": self.score,
            "n_scoreable": self.n_scoreable,
            "microgold_accuracy": self.microgold_accuracy,
            "cumulative_change_fraction": self.cumulative_change_fraction,
        }


# ---------------------------------------------------------------------------
# Actors
# ---------------------------------------------------------------------------


class Challenger(Protocol):
    actor_id: str

    def verify(
        self, claim: ClaimRecord, report: ReportDocument
    ) -> tuple[VerdictLabel, Rationale]: ...


class EchoChallenger:
    """Agrees with whatever the benchmark currently says (for smoke tests)."""

    def __init__(self, version: BenchmarkVersion, actor_id: str = "echo"):
        self.actor_id = actor_id
        self._version = version

    def verify(self, claim, report):
        verdict = self._version.verdict_of(claim.claim_id)
        return verdict, Rationale(text="agrees with current consensus", author=self.actor_id)


_FLIP = {
    VerdictLabel.SUPPORTED: VerdictLabel.CONTRADICTORY,
    VerdictLabel.INCONCLUSIVE: VerdictLabel.SUPPORTED,
    VerdictLabel.CONTRADICTORY: VerdictLabel.SUPPORTED,
    VerdictLabel.NONE_VERIFIABLE: VerdictLabel.SUPPORTED,
}


class FlipAllChallenger:
    """Disputes every claim by proposing a different verdict."""

    def __init__(self, version: BenchmarkVersion, actor_id: str = "flip-all"):
        self.actor_id = actor_id
        self._version = version

    def verify(self, claim, report):
        verdict = _FLIP[self._version.verdict_of(claim.claim_id)]
        return verdict, Rationale(
            text=f"disputes the current verdict on {claim.claim_id}",
            author=self.actor_id,
        )


class ScriptedChallenger:
    """Returns verdicts from a fixed table; unlisted claims raise or echo."""

    def __init__(
        self,
        verdicts: Mapping[str, VerdictLabel],
        actor_id: str = "scripted",
        default: BenchmarkVersion | None = None,
        rationale_text: str = "scripted verdict",
        evidence_refs: Sequence[str] = (),
    ):
        self.actor_id = actor_id
        self._verdicts = dict(verdicts)
        self._default = default
        self._rationale_text = rationale_text
        self._evidence_refs = tuple(evidence_refs)

    def verify(self, claim, report):
        if claim.claim_id in self._verdicts:
            verdict = self._verdicts[claim.claim_id]
        elif self._default is not None:
            verdict = self._default.verdict_of(claim.claim_id)
        else:
            raise KeyError(claim.claim_id)
        return verdict, Rationale(
            text=self._rationale_text,
            evidence_refs=self._evidence_refs,
            author=self.actor_id,
        )


class Auditor(Protocol):
    actor_id: str
    kind: AuditorKind

    def review(self, dispute: Proposal) -> AuditorResponse: ...


@dataclass
class ScriptedAuditor:
    """Decides from a fixed table of claim_id -> ACCEPT/REJECT."""

    decisions: Mapping[str, str]
    actor_id: str = "scripted-auditor"
    kind: AuditorKind = AuditorKind.HUMAN
    default: str = "REJECT"

    def review(self, dispute: Proposal) -> AuditorResponse:
        return AuditorResponse(decision=self.decisions.get(dispute.claim_id, self.default))


@dataclass
class AcceptAllAuditor:
    actor_id: str = "accept-all"
    kind: AuditorKind = AuditorKind.AGENT

    def review(self, dispute: Proposal) -> AuditorResponse:
        return AuditorResponse(decision="ACCEPT")


@dataclass
class RejectAllAuditor:
    actor_id: str = "reject-all"
    kind: AuditorKind = AuditorKind.AGENT

    def review(self, dispute: Proposal) -> AuditorResponse:
        return AuditorResponse(decision="REJECT")


class OracleAuditor:
    """Accepts exactly the proposals that match hidden calibration labels.

    Proposals on claims without calibration data are rejected.  Used to
    validate that auditing can only improve micro-gold accuracy.
    """

    def __init__(
        self,
        calibration: Mapping[str, MicroGold],
        actor_id: str = "oracle-auditor",
        kind: AuditorKind = AuditorKind.AGENT,
    ):
        self.actor_id = actor_id
        self.kind = kind
        self._calibration = calibration

    def review(self, dispute: Proposal) -> AuditorResponse:
        gold = self._calibration.get(dispute.claim_id)
        if gold is not None and collapsed_match(dispute.proposed_verdict, gold.gold_label):
            return AuditorResponse(decision="ACCEPT")
        return AuditorResponse(decision="REJECT")


class QueueAuditor:
    """Human auditor whose decisions arrive asynchronously.

    ``review`` parks the dispute and blocks until ``submit`` supplies a
    response (from a console or CLI) or the timeout elapses, in which case
    the dispute stays open and the round cannot commit.
    """

    def __init__(
        self,
        actor_id: str = "human",
        timeout: float | None = None,
    ):
        self.actor_id = actor_id
        self.kind = AuditorKind.HUMAN
        self.timeout = timeout
        self._pending: dict[str, threading.Event] = {}
        self._responses: dict[str, AuditorResponse] = {}
        self._lock = threading.Lock()

    def open_disputes(self) -> list[str]:
        with self._lock:
            return [cid for cid, ev in self._pending.items() if not ev.is_set()]

    def submit(self, claim_id: str, response: AuditorResponse) -> None:
        with self._lock:
            event = self._pending.get(claim_id)
            if event is None:
                event = threading.Event()
                self._pending[claim_id] = event
            self._responses[claim_id] = response
            event.set()

    def review(self, dispute: Proposal) -> AuditorResponse:
        with self._lock:
            event = self._pending.get(dispute.claim_id)
            if event is None:
                event = threading.Event()
                self._pending[dispute.claim_id] = event
        if not event.wait(self.timeout):
            raise AuditTimeout(
                f"no decision for {dispute.claim_id!r} within {self.timeout}s"
            )
        with self._lock:
            return self._responses[dispute.claim_id]


# ---------------------------------------------------------------------------
# Phase 1: evaluate and collect disputes
# ---------------------------------------------------------------------------


def run_evaluation(
    store: BenchmarkStore,
    version: BenchmarkVersion,
    challenger: Challenger,
) -> tuple[dict[str, VerdictLabel | str], list[Proposal]]:
    """Run the challenger over every entry; disagreements become proposals.

    A challenger failure, or a NoneVerifiable verdict on a claim whose
    incumbent label is verifiable, is recorded as Abstain: it never mutates
    consensus and is scored incorrect.
    """
    predictions: dict[str, VerdictLabel | str] = {}
    proposals: list[Proposal] = []
    for claim_id in store.ordered_claim_ids(version):
        entry = version.entries[claim_id]
        claim = store.claim(claim_id)
        report = store.report(claim.report_id)
        try:
            verdict, rationale = challenger.verify(claim, report)
        except Exception:
            predictions[claim_id] = ABSTAIN
            continue
        if (
            verdict is VerdictLabel.NONE_VERIFIABLE
            and entry.verdict is not VerdictLabel.NONE_VERIFIABLE
        ):
            predictions[claim_id] = ABSTAIN
            continue
        predictions[claim_id] = verdict
        if verdict != entry.verdict:
            proposals.append(
                Proposal(
                    claim_id=claim_id,
                    proposed_verdict=verdict,
                    proposed_rationale=rationale,
                    challenger=challenger.actor_id,
                    incumbent_verdict=entry.verdict,
                    incumbent_rationale=entry.rationale,
                )
            )
    return predictions, proposals


def select_disputes(
    proposals: Sequence[Proposal], p: float, seed: int
) -> list[Proposal]:
    """Uniform sample without replacement of round(p * n) proposals."""
    if not 0.0 < p <= 1.0:
        raise InvalidInput("audit fraction p must be in (0, 1]")
    if not proposals:
        return []
    if p == 1.0:
        return list(proposals)
    k = _round_half_up(p * len(proposals))
    if k >= len(proposals):
        return list(proposals)
    rng = np.random.default_rng(seed)
    idx = sorted(rng.permutation(len(proposals))[:k].tolist())
    return [proposals[i] for i in idx]


# ---------------------------------------------------------------------------
# Phase 2: adjudication
# ---------------------------------------------------------------------------


def combine_decisions(
    dispute: Proposal,
    responses: Sequence[tuple[str, AuditorKind, AuditorResponse]],
    strict_mode: bool,
) -> AuditDecision:
    """Collapse per-auditor responses into one decision.

    Non-strict: the first auditor decides.  Strict: ACCEPT only when every
    auditor independently accepts.  An accepted proposal installs the
    proposed verdict; an auditor may override the rationale but never the
    verdict (a third verdict must arrive as a fresh proposal next round).
    """
    if not responses:
        raise InvalidInput("at least one auditor response required")
    if strict_mode:
        if len({kind for _, kind, _ in responses}) < 2:
            raise InvalidInput("strict mode requires auditors of distinct kinds")
        accept = all(r.decision == "ACCEPT" for _, _, r in responses)
    else:
        accept = responses[0][2].decision == "ACCEPT"
    primary_id, primary_kind, primary = responses[0]
    if accept:
        rationale = primary.override_rationale or dispute.proposed_rationale
        final_verdict = dispute.proposed_verdict
    else:
        rationale = dispute.incumbent_rationale
        final_verdict = dispute.incumbent_verdict
    return AuditDecision(
        claim_id=dispute.claim_id,
        decision="ACCEPT" if accept else "REJECT",
        final_verdict=final_verdict,
        final_rationale=rationale,
        auditor=primary_id,
        auditor_kind=primary_kind,
        confidence=primary.confidence,
        error_code=primary.error_code,
    )


def adjudicate(
    dispute: Proposal,
    auditors: Sequence[Auditor],
    strict_mode: bool = False,
) -> AuditDecision:
    """Collect responses from the listed auditors and combine them."""
    if not auditors:
        raise InvalidInput("at least one auditor required")
    if strict_mode and len({a.kind for a in auditors}) < 2:
        raise InvalidInput("strict mode requires >= 2 auditors of distinct kinds")
    consulted = auditors if strict_mode else auditors[:1]
    responses = [(a.actor_id, a.kind, a.review(dispute)) for a in consulted]
    return combine_decisions(dispute, responses, strict_mode)


# ---------------------------------------------------------------------------
# Phases 3-4: evolve and score
# ---------------------------------------------------------------------------


def binary_score(
    predictions: Mapping[str, VerdictLabel | str],
    version: BenchmarkVersion,
) -> tuple[float | None, int]:
    """Exact-match accuracy under the collapse, excluding NoneVerifiable golds."""
    matches = 0
    n = 0
    for claim_id, entry in version.entries.items():
        if collapse(entry.verdict) is None:
            continue
        n += 1
        if collapsed_match(predictions.get(claim_id), entry.verdict):
            matches += 1
    return (matches / n if n else None), n


def evolve_and_score(
    store: BenchmarkStore,
    version: BenchmarkVersion,
    predictions: Mapping[str, VerdictLabel | str],
    decisions: Sequence[AuditDecision],
    audited_claims: Iterable[str],
    conflicts: int,
    challenger: str,
    cumulative_accepted_before: int = 0,
) -> tuple[BenchmarkVersion, RoundReport]:
    """Materialize accepted decisions, mint the next version, and score.

    The challenger's score is computed against the evolved version, never
    the incumbent one.  Decisions on disputes outside the audit set are a
    protocol violation.
    """
    audited = set(audited_claims)
    for decision in decisions:
        if decision.claim_id not in audited:
            raise ProtocolViolation(
                f"decision on unaudited dispute {decision.claim_id!r}"
            )
    changes = []
    rejected_log = []
    for decision in decisions:
        if decision.decision == "ACCEPT":
            changes.append(
                ChangeRecord(
                    claim_id=decision.claim_id,
                    old_verdict=version.verdict_of(decision.claim_id),
                    new_verdict=decision.final_verdict,
                    new_rationale=decision.final_rationale,
                    decided_by=decision.auditor,
                    proposed_by=challenger,
                    round=version.version + 1,
                )
            )
        else:
            rejected_log.append(decision.to_json())
    new_version = store.apply_changeset(version, changes)
    score, n_scoreable = binary_score(predictions, new_version)
    accepted_total = cumulative_accepted_before + len(changes)
    n_entries = len(new_version.entries)
    report = RoundReport(
        round=new_version.version,
        challenger=challenger,
        predictions={
            cid: (v.value if isinstance(v, VerdictLabel) else str(v))
            for cid, v in predictions.items()
        },
        conflicts=conflicts,
        audited=len(decisions),
        accepted=len(changes),
        rejected_log=rejected_log,
        score=score,
        n_scoreable=n_scoreable,
        microgold_accuracy=store.microgold_accuracy(new_version),
        cumulative_change_fraction=(accepted_total / n_entries) if n_entries else 0.0,
    )
    return new_version, report


# ---------------------------------------------------------------------------
# Round history, counterfactual replay, maintenance policy
# ---------------------------------------------------------------------------


@dataclass
class RoundRecord:
    round: int
    challenger: str
    proposals: list[Proposal]
    decisions: dict[str, AuditDecision]
    audited_claims: list[str]
    microgold_accuracy: float | None
    score: float | None
    accepted: int
    cumulative_change_fraction: float

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "challenger": self.challenger,
            "proposals": [p.to_json() for p in self.proposals],
            "decisions": {cid: d.to_json() for cid, d in self.decisions.items()},
            "audited_claims": self.audited_claims,
            "microgold_accuracy": self.microgold_accuracy,
            "score": self.score,
            "accepted": self.accepted,
            "cumulative_change_fraction": self.cumulative_change_fraction,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "RoundRecord":
        return cls(
            round=int(obj["round"]),
            challenger=obj["challenger"],
            proposals=[Proposal.from_json(p) for p in obj["proposals"]],
            decisions={
                cid: AuditDecision.from_json(d) for cid, d in obj["decisions"].items()
            },
            audited_claims=list(obj["audited_claims"]),
            microgold_accuracy=obj.get("microgold_accuracy"),
            score=obj.get("score"),
            accepted=int(obj.get("accepted", 0)),
            cumulative_change_fraction=float(obj.get("cumulative_change_fraction", 0.0)),
        )


@dataclass
class RoundHistory:
    """Everything needed to audit, replay, and govern a benchmark's evolution."""

    benchmark_id: str
    entry_count: int
    initial_verdicts: dict[str, VerdictLabel]
    calibration_golds: dict[str, VerdictLabel]
    initial_microgold_accuracy: float | None
    rounds: list[RoundRecord] = field(default_factory=list)
    accepted_since_calibration: int = 0
    expert_calibrations: list[int] = field(default_factory=list)

    @classmethod
    def from_store(cls, store: BenchmarkStore) -> "RoundHistory":
        version = store.version(0)
        return cls(
            benchmark_id=store.benchmark_id,
            entry_count=len(version.entries),
            initial_verdicts={
                cid: e.verdict for cid, e in version.entries.items()
            },
            calibration_golds={
                cid: mg.gold_label for cid, mg in store.calibration.items()
            },
            initial_microgold_accuracy=store.microgold_accuracy(version),
        )

    def record_round(self, record: RoundRecord) -> None:
        self.rounds.append(record)
        self.accepted_since_calibration += record.accepted

    def mark_expert_calibration(self, version: int) -> None:
        self.expert_calibrations.append(version)
        self.accepted_since_calibration = 0

    def total_audited(self) -> int:
        return sum(len(r.audited_claims) for r in self.rounds)

    def microgold_trajectory(self) -> list[float | None]:
        return [r.microgold_accuracy for r in self.rounds]

    def to_json(self) -> dict:
        return {
            "benchmark_id": self.benchmark_id,
            "entry_count": self.entry_count,
            "initial_verdicts": {
                cid: v.value for cid, v in self.initial_verdicts.items()
            },
            "calibration_golds": {
                cid: v.value for cid, v in self.calibration_golds.items()
            },
            "initial_microgold_accuracy": self.initial_microgold_accuracy,
            "rounds": [r.to_json() for r in self.rounds],
            "accepted_since_calibration": self.accepted_since_calibration,
            "expert_calibrations": self.expert_calibrations,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "RoundHistory":
        return cls(
            benchmark_id=obj["benchmark_id"],
            entry_count=int(obj["entry_count"]),
            initial_verdicts={
                cid: parse_verdict(v) for cid, v in obj["initial_verdicts"].items()
            },
            calibration_golds={
                cid: parse_verdict(v) for cid, v in obj["calibration_golds"].items()
            },
            initial_microgold_accuracy=obj.get("initial_microgold_accuracy"),
            rounds=[RoundRecord.from_json(r) for r in obj["rounds"]],
            accepted_since_calibration=int(obj.get("accepted_since_calibration", 0)),
            expert_calibrations=list(obj.get("expert_calibrations", [])),
        )

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1), "utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "RoundHistory":
        return cls.from_json(json.loads(Path(path).read_text("utf-8")))


def replay_counterfactual(
    history: RoundHistory, p: float, seed: int
) -> list[float]:
    """Re-simulate a recorded history auditing only a p-fraction per round.

    Each round samples round(p * conflicts) of the recorded proposals
    uniformly without replacement and replays the recorded full-audit
    decision for each sampled one; unaudited conflicts leave the benchmark
    unchanged.  Returns micro-gold accuracy after each round.  p = 1
    reproduces the recorded trajectory exactly.
    """
    if not 0.0 < p <= 1.0:
        raise InvalidInput("p must be in (0, 1]")
    if not history.calibration_golds:
        raise InsufficientHistory("history carries no calibration data")
    for record in history.rounds:
        for proposal in record.proposals:
            if proposal.claim_id not in record.decisions:
                raise InsufficientHistory(
                    f"round {record.round} lacks a full-audit decision "
                    f"for {proposal.claim_id!r}"
                )
    golds = {cid: collapse(v) for cid, v in history.calibration_golds.items()}
    state = {
        cid: history.initial_verdicts[cid]
        for cid in golds
        if cid in history.initial_verdicts
    }
    if not state:
        raise InsufficientHistory("no calibration claim appears in the benchmark")
    rng = np.random.default_rng(seed)
    trajectory: list[float] = []
    for record in history.rounds:
        n = len(record.proposals)
        if n:
            if p == 1.0:
                selected = range(n)
            else:
                k = _round_half_up(p * n)
                selected = rng.permutation(n)[:k]
            for i in selected:
                proposal = record.proposals[int(i)]
                decision = record.decisions[proposal.claim_id]
                if (
                    decision.decision == "ACCEPT"
                    and proposal.claim_id in state
                ):
                    state[proposal.claim_id] = decision.final_verdict
        correct = sum(
            1
            for cid, verdict in state.items()
            if collapse(verdict) is not None and collapse(verdict) == golds[cid]
        )
        trajectory.append(correct / len(state))
    return trajectory


@dataclass(frozen=True)
class MaintenanceDecision:
    action: str  # "continue" | "stop" | "expert_recalibration_required"
    reason: str | None = None

    def to_json(self) -> dict:
        return {"action": self.action, "reason": self.reason}


def maintenance_check(
    history: RoundHistory, config: RoundConfig
) -> MaintenanceDecision:
    """Drift guard and stopping policy over a recorded history.

    Expert recalibration fires once cumulative accepted changes since the
    last calibration exceed the drift threshold (5% of entries by default);
    it takes precedence over stopping so that drift is corrected before the
    benchmark freezes.
    """
    if history.entry_count > 0:
        fraction = history.accepted_since_calibration / history.entry_count
        if fraction > config.drift_threshold:
            return MaintenanceDecision(
                "expert_recalibration_required",
                f"cumulative accepted changes {history.accepted_since_calibration}"
                f"/{history.entry_count} = {fraction:.2%} exceed "
                f"{config.drift_threshold:.0%}",
            )
    stopping = config.stopping
    if stopping.audit_budget is not None and history.total_audited() >= stopping.audit_budget:
        return MaintenanceDecision("stop", "audit_budget")
    if stopping.microgold_target is not None:
        accs = [
            r.microgold_accuracy
            for r in history.rounds
            if r.microgold_accuracy is not None
        ]
        if len(accs) >= 2 and all(a >= stopping.microgold_target for a in accs[-2:]):
            return MaintenanceDecision("stop", "microgold_target")
    if stopping.max_rounds is not None and len(history.rounds) >= stopping.max_rounds:
        return MaintenanceDecision("stop", "max_rounds")
    return MaintenanceDecision("continue")


# ---------------------------------------------------------------------------
# Round orchestration
# ---------------------------------------------------------------------------


class RoundEngine:
    """Drives complete rounds against a store and accumulates history."""

    def __init__(self, store: BenchmarkStore):
        self.store = store
        self.history = RoundHistory.from_store(store)

    def run_round(
        self,
        challenger: Challenger,
        auditors: Sequence[Auditor],
        config: RoundConfig,
    ) -> tuple[BenchmarkVersion, RoundReport]:
        version = self.store.head()
        predictions, proposals = run_evaluation(self.store, version, challenger)
        disputes = select_disputes(proposals, config.audit_fraction, config.seed)
        decisions = [
            adjudicate(dispute, auditors, config.strict_mode) for dispute in disputes
        ]
        new_version, report = evolve_and_score(
            self.store,
            version,
            predictions,
            decisions,
            audited_claims=[d.claim_id for d in disputes],
            conflicts=len(proposals),
            challenger=challenger.actor_id,
            cumulative_accepted_before=self.history.accepted_since_calibration,
        )
        self.history.record_round(
            RoundRecord(
                round=new_version.version,
                challenger=challenger.actor_id,
                proposals=proposals,
                decisions={d.claim_id: d for d in decisions},
                audited_claims=[d.claim_id for d in disputes],
                microgold_accuracy=report.microgold_accuracy,
                score=report.score,
                accepted=report.accepted,
                cumulative_change_fraction=report.cumulative_change_fraction,
            )
        )
        return new_version, report

    def maintenance(self, config: RoundConfig) -> MaintenanceDecision:
        return maintenance_check(self.history, config)
