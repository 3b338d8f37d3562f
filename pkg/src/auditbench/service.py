"""HTTP service exposing benchmark versions, the round lifecycle, the human
audit queue, and score exports.

The service wraps the single-writer store: round creation runs the
challenger and materializes a dispute queue; auditors resolve disputes one
decision at a time; the round auto-commits when the last dispute is decided
or skipped.  Every decision is durably logged (fsync) before it is
acknowledged, so a crash mid-round loses nothing.

Auditor-facing responses never carry calibration (micro-gold) fields; the
aggregate micro-gold figures appear only for callers holding the
calibration role.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from fastapi import Body, Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse

from .errors import AuditBenchError, NotFound
from .labels import (
    ABSTAIN,
    ERROR_CODE_CATALOG,
    LABEL_DEFINITIONS,
    AuditorKind,
    BinaryLabel,
    Confidence,
    VerdictLabel,
    collapse,
    error_code_listing,
    parse_verdict,
)
from .metrics import FORCED_INCORRECT, compute_metrics
from .protocol import (
    AcceptAllAuditor,
    AuditorResponse,
    EchoChallenger,
    FlipAllChallenger,
    Proposal,
    RejectAllAuditor,
    RoundConfig,
    RoundHistory,
    RoundRecord,
    ScriptedAuditor,
    ScriptedChallenger,
    StoppingCriteria,
    combine_decisions,
    evolve_and_score,
    run_evaluation,
    select_disputes,
)
from .store import BenchmarkStore, Rationale


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


# ---------------------------------------------------------------------------
# Challenger / agent-auditor specs (wire form)
# ---------------------------------------------------------------------------


def build_challenger(spec: Mapping, store: BenchmarkStore):
    kind = spec.get("kind")
    head = store.head()
    if kind == "echo":
        return EchoChallenger(head, actor_id=spec.get("actor_id", "echo"))
    if kind == "flip_all":
        return FlipAllChallenger(head, actor_id=spec.get("actor_id", "flip-all"))
    if kind == "scripted":
        verdicts = {cid: parse_verdict(v) for cid, v in spec.get("verdicts", {}).items()}
        return ScriptedChallenger(
            verdicts,
            actor_id=spec.get("actor_id", "scripted"),
            default=head,
            rationale_text=spec.get("rationale_text", "scripted verdict"),
            evidence_refs=tuple(spec.get("evidence_refs", ())),
        )
    raise ApiError(422, "invalid_challenger", f"unknown challenger kind {kind!r}")


def build_agent_auditor(spec: Mapping | None):
    if not spec:
        return None
    kind = spec.get("kind")
    if kind == "accept_all":
        return AcceptAllAuditor(actor_id=spec.get("actor_id", "agent-auditor"))
    if kind == "reject_all":
        return RejectAllAuditor(actor_id=spec.get("actor_id", "agent-auditor"))
    if kind == "scripted":
        return ScriptedAuditor(
            dict(spec.get("decisions", {})),
            actor_id=spec.get("actor_id", "agent-auditor"),
            kind=AuditorKind.AGENT,
            default=spec.get("default", "REJECT"),
        )
    raise ApiError(422, "invalid_auditor", f"unknown agent auditor kind {kind!r}")


# ---------------------------------------------------------------------------
# Round state
# ---------------------------------------------------------------------------


@dataclass
class DisputeState:
    dispute_id: str
    claim_id: str
    proposal: Proposal
    index: int
    status: str = "open"  # open | decided | skipped
    submission: dict | None = None
    ack: dict | None = None


@dataclass
class OpenRound:
    round_id: str
    benchmark_id: str
    base_version: int
    config: RoundConfig
    agent_auditor_spec: dict | None
    challenger_id: str
    predictions: dict[str, str]
    proposals: list[Proposal]
    disputes: dict[str, DisputeState]
    order: list[str]
    state: str = "AWAITING_AUDIT"
    report: dict | None = None
    idempotency: dict[str, dict] = field(default_factory=dict)

    def remaining(self) -> int:
        return sum(1 for d in self.disputes.values() if d.status == "open")


def _fsync_append(path: Path, obj: dict) -> None:
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, ensure_ascii=False))
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())


class BenchmarkService:
    """All mutable service state for one data directory."""

    def __init__(
        self,
        data_dir: Path | str,
        token_file: Path | str | None = None,
        price_table_path: Path | str | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.stores: dict[str, BenchmarkStore] = {}
        self.histories: dict[str, RoundHistory] = {}
        self.rounds: dict[str, OpenRound] = {}
        self.tokens: dict[str, dict] = {}
        self.price_table: dict | None = None
        self._token_file = Path(token_file) if token_file else None
        if price_table_path:
            self.price_table = json.loads(Path(price_table_path).read_text("utf-8"))
        self._lock = threading.RLock()
        self._load()

    # -- persistence --------------------------------------------------------

    def _bench_dir(self, benchmark_id: str) -> Path:
        return self.data_dir / "benchmarks" / benchmark_id

    def _round_dir(self, benchmark_id: str, round_id: str) -> Path:
        return self._bench_dir(benchmark_id) / "rounds" / round_id

    def _load(self) -> None:
        token_file = self._token_file or (self.data_dir / "tokens.json")
        if token_file.exists():
            self.tokens = json.loads(token_file.read_text("utf-8"))
        bench_root = self.data_dir / "benchmarks"
        if not bench_root.exists():
            return
        for bench_dir in sorted(bench_root.iterdir()):
            if not (bench_dir / "meta.json").exists():
                continue
            store = BenchmarkStore.load(bench_dir)
            self.stores[store.benchmark_id] = store
            history_path = bench_dir / "history.json"
            if history_path.exists():
                self.histories[store.benchmark_id] = RoundHistory.load(history_path)
            else:
                self.histories[store.benchmark_id] = RoundHistory.from_store(store)
            rounds_dir = bench_dir / "rounds"
            if rounds_dir.exists():
                for round_dir in sorted(rounds_dir.iterdir()):
                    self._load_round(store.benchmark_id, round_dir)

    def _load_round(self, benchmark_id: str, round_dir: Path) -> None:
        meta_path = round_dir / "round.json"
        if not meta_path.exists():
            return
        meta = json.loads(meta_path.read_text("utf-8"))
        proposals = [Proposal.from_json(p) for p in meta["proposals"]]
        by_claim = {p.claim_id: p for p in proposals if p.claim_id in set(meta["queue"])}
        rnd = OpenRound(
            round_id=meta["round_id"],
            benchmark_id=benchmark_id,
            base_version=meta["base_version"],
            config=RoundConfig(
                audit_fraction=meta["config"]["audit_fraction"],
                strict_mode=meta["config"]["strict_mode"],
                seed=meta["config"]["seed"],
            ),
            agent_auditor_spec=meta.get("agent_auditor"),
            challenger_id=meta["challenger_id"],
            predictions=meta["predictions"],
            proposals=proposals,
            disputes={},
            order=[],
        )
        for index, claim_id in enumerate(meta["queue"]):
            dispute_id = f"{meta['round_id']}~{claim_id}"
            rnd.disputes[dispute_id] = DisputeState(
                dispute_id=dispute_id,
                claim_id=claim_id,
                proposal=by_claim[claim_id],
                index=index,
            )
            rnd.order.append(dispute_id)
        log_path = round_dir / "decisions.jsonl"
        if log_path.exists():
            for line in log_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                event = json.loads(line)
                dispute = rnd.disputes.get(event["dispute_id"])
                if dispute is None:
                    continue
                if event["type"] == "skip":
                    dispute.status = "skipped"
                else:
                    dispute.status = "decided"
                    dispute.submission = event["submission"]
                    dispute.ack = event["ack"]
                    rnd.idempotency[event["submission"]["idempotency_key"]] = event["ack"]
        self.rounds[rnd.round_id] = rnd
        report_path = round_dir / "report.json"
        if report_path.exists():
            rnd.state = "COMMITTED"
            rnd.report = json.loads(report_path.read_text("utf-8"))
        elif rnd.remaining() == 0:
            # crashed after the last decision, before the commit finished
            self._recover_commit(rnd)

    def _recover_commit(self, rnd: OpenRound) -> None:
        """Finish a commit interrupted by a crash, without double-applying.

        If the store and history already carry the round (crash fell between
        persisting them and writing report.json), only the report is rebuilt;
        otherwise the commit runs normally.
        """
        store = self.stores[rnd.benchmark_id]
        history = self.histories[rnd.benchmark_id]
        already = next(
            (r for r in history.rounds if r.round == rnd.base_version + 1), None
        )
        if already is None or store.head().version <= rnd.base_version:
            self._commit(rnd)
            return
        from .protocol import RoundReport, binary_score

        predictions = {
            cid: (parse_verdict(v) if v != ABSTAIN else ABSTAIN)
            for cid, v in rnd.predictions.items()
        }
        score, n_scoreable = binary_score(predictions, store.head())
        report = RoundReport(
            round=already.round,
            challenger=already.challenger,
            predictions=rnd.predictions,
            conflicts=len(rnd.proposals),
            audited=len(already.audited_claims),
            accepted=already.accepted,
            rejected_log=[
                d.to_json() for d in already.decisions.values() if d.decision == "REJECT"
            ],
            score=score,
            n_scoreable=n_scoreable,
            microgold_accuracy=already.microgold_accuracy,
            cumulative_change_fraction=already.cumulative_change_fraction,
        )
        rnd.state = "COMMITTED"
        rnd.report = report.to_json()
        (self._round_dir(rnd.benchmark_id, rnd.round_id) / "report.json").write_text(
            json.dumps(rnd.report, ensure_ascii=False), "utf-8"
        )

    def _persist_benchmark(self, benchmark_id: str) -> None:
        bench_dir = self._bench_dir(benchmark_id)
        bench_dir.mkdir(parents=True, exist_ok=True)
        self.stores[benchmark_id].save(bench_dir)
        self.histories[benchmark_id].save(bench_dir / "history.json")

    # -- benchmark lifecycle (used by the CLI seeding path) ------------------

    def add_benchmark(self, store: BenchmarkStore) -> None:
        with self._lock:
            self.stores[store.benchmark_id] = store
            self.histories[store.benchmark_id] = RoundHistory.from_store(store)
            self._persist_benchmark(store.benchmark_id)

    def store(self, benchmark_id: str) -> BenchmarkStore:
        store = self.stores.get(benchmark_id)
        if store is None:
            raise ApiError(404, "not_found", f"unknown benchmark {benchmark_id!r}")
        return store

    # -- rounds ---------------------------------------------------------------

    def open_round_for(self, benchmark_id: str) -> OpenRound | None:
        for rnd in self.rounds.values():
            if rnd.benchmark_id == benchmark_id and rnd.state == "AWAITING_AUDIT":
                return rnd
        return None

    def create_round(
        self, benchmark_id: str, config_obj: Mapping, challenger_spec: Mapping
    ) -> OpenRound:
        with self._lock:
            store = self.store(benchmark_id)
            if self.open_round_for(benchmark_id) is not None:
                raise ApiError(409, "round_open", "an open round already exists")
            stopping = config_obj.get("stopping", {})
            config = RoundConfig(
                audit_fraction=float(config_obj.get("audit_fraction", 1.0)),
                strict_mode=bool(config_obj.get("strict_mode", False)),
                seed=int(config_obj.get("seed", 0)),
                stopping=StoppingCriteria(
                    max_rounds=stopping.get("max_rounds"),
                    microgold_target=stopping.get("microgold_target"),
                    audit_budget=stopping.get("audit_budget"),
                ),
            )
            agent_spec = config_obj.get("agent_auditor")
            if config.strict_mode and not agent_spec:
                raise ApiError(
                    422, "invalid_config", "strict_mode requires an agent_auditor spec"
                )
            build_agent_auditor(agent_spec)  # validate eagerly
            challenger = build_challenger(challenger_spec, store)
            head = store.head()
            predictions, proposals = run_evaluation(store, head, challenger)
            disputes = select_disputes(proposals, config.audit_fraction, config.seed)
            disputes = sorted(disputes, key=lambda p: store.claim_position_key(p.claim_id))
            round_id = f"rnd-{uuid.uuid4().hex[:8]}"
            rnd = OpenRound(
                round_id=round_id,
                benchmark_id=benchmark_id,
                base_version=head.version,
                config=config,
                agent_auditor_spec=dict(agent_spec) if agent_spec else None,
                challenger_id=challenger.actor_id,
                predictions={
                    cid: (v.value if isinstance(v, VerdictLabel) else str(v))
                    for cid, v in predictions.items()
                },
                proposals=proposals,
                disputes={},
                order=[],
            )
            for index, proposal in enumerate(disputes):
                dispute_id = f"{round_id}~{proposal.claim_id}"
                rnd.disputes[dispute_id] = DisputeState(
                    dispute_id=dispute_id,
                    claim_id=proposal.claim_id,
                    proposal=proposal,
                    index=index,
                )
                rnd.order.append(dispute_id)
            round_dir = self._round_dir(benchmark_id, round_id)
            round_dir.mkdir(parents=True, exist_ok=True)
            (round_dir / "round.json").write_text(
                json.dumps(
                    {
                        "round_id": round_id,
                        "base_version": head.version,
                        "config": {
                            "audit_fraction": config.audit_fraction,
                            "strict_mode": config.strict_mode,
                            "seed": config.seed,
                        },
                        "agent_auditor": rnd.agent_auditor_spec,
                        "challenger_id": rnd.challenger_id,
                        "predictions": rnd.predictions,
                        "proposals": [p.to_json() for p in proposals],
                        "queue": [p.claim_id for p in disputes],
                    },
                    ensure_ascii=False,
                ),
                "utf-8",
            )
            self.rounds[round_id] = rnd
            if rnd.remaining() == 0:
                self._commit(rnd)
            return rnd

    def round(self, round_id: str) -> OpenRound:
        rnd = self.rounds.get(round_id)
        if rnd is None:
            raise ApiError(404, "not_found", f"unknown round {round_id!r}")
        return rnd

    def _dispute(self, dispute_id: str) -> tuple[OpenRound, DisputeState]:
        round_id, _, _ = dispute_id.partition("~")
        rnd = self.rounds.get(round_id)
        if rnd is None or dispute_id not in rnd.disputes:
            raise ApiError(404, "not_found", f"unknown dispute {dispute_id!r}")
        return rnd, rnd.disputes[dispute_id]

    # -- decisions -------------------------------------------------------------

    def submit_decision(self, dispute_id: str, payload: Mapping, actor: str) -> dict:
        with self._lock:
            rnd, dispute = self._dispute(dispute_id)
            key = payload.get("idempotency_key")
            if not key:
                raise ApiError(422, "missing_field", "idempotency_key is required")
            if key in rnd.idempotency:
                return rnd.idempotency[key]
            if rnd.state != "AWAITING_AUDIT":
                raise ApiError(409, "round_closed", "round already committed")
            if dispute.status == "decided":
                raise ApiError(
                    409, "already_decided", "dispute decided under a different key"
                )
            if dispute.status == "skipped":
                raise ApiError(409, "already_skipped", "dispute was skipped")
            decision_word = payload.get("decision")
            if decision_word not in ("ACCEPT", "REJECT"):
                raise ApiError(422, "invalid_decision", "decision must be ACCEPT or REJECT")
            confidence_raw = payload.get("confidence")
            try:
                confidence = Confidence(confidence_raw)
            except ValueError:
                raise ApiError(
                    422, "invalid_confidence",
                    "confidence must be one of Certain, Confident, Uncertain",
                ) from None
            proposal = dispute.proposal
            final_verdict = (
                proposal.proposed_verdict
                if decision_word == "ACCEPT"
                else proposal.incumbent_verdict
            )
            error_code = payload.get("error_code")
            if error_code is not None and error_code not in ERROR_CODE_CATALOG:
                raise ApiError(422, "invalid_error_code", f"unknown error code {error_code!r}")
            if collapse(final_verdict) is BinaryLabel.UNSUPPORTED and not error_code:
                raise ApiError(
                    422, "missing_error_code",
                    "an Unsupported outcome requires an error_code",
                )
            rationale_text = payload.get("rationale_text") or ""
            override = (
                Rationale(text=rationale_text, author=actor)
                if (decision_word == "ACCEPT" and rationale_text)
                else None
            )
            human = AuditorResponse(
                decision=decision_word,
                override_rationale=override,
                error_code=error_code,
                confidence=confidence,
            )
            responses = [(actor, AuditorKind.HUMAN, human)]
            if rnd.config.strict_mode:
                agent = build_agent_auditor(rnd.agent_auditor_spec)
                responses.append((agent.actor_id, agent.kind, agent.review(proposal)))
            combined = combine_decisions(proposal, responses, rnd.config.strict_mode)
            dispute.status = "decided"
            dispute.submission = {
                "dispute_id": dispute_id,
                "decision": decision_word,
                "rationale_text": rationale_text,
                "error_code": error_code,
                "confidence": confidence.value,
                "idempotency_key": key,
                "actor": actor,
            }
            ack = {
                "dispute_id": dispute_id,
                "decision": combined.decision,
                "final_verdict": combined.final_verdict.value,
                "remaining": rnd.remaining(),
                "round_state": rnd.state,
                "idempotency_key": key,
            }
            dispute.ack = ack
            rnd.idempotency[key] = ack
            log_path = self._round_dir(rnd.benchmark_id, rnd.round_id) / "decisions.jsonl"
            _fsync_append(
                log_path,
                {
                    "type": "decision",
                    "dispute_id": dispute_id,
                    "submission": dispute.submission,
                    "combined": combined.to_json(),
                    "ack": ack,
                },
            )
            if rnd.remaining() == 0:
                self._commit(rnd)
                ack = dict(ack)
                ack["round_state"] = rnd.state
                rnd.idempotency[key] = ack
                dispute.ack = ack
            return ack

    def skip_dispute(self, dispute_id: str) -> dict:
        with self._lock:
            rnd, dispute = self._dispute(dispute_id)
            if rnd.state != "AWAITING_AUDIT":
                raise ApiError(409, "round_closed", "round already committed")
            if dispute.status == "decided":
                raise ApiError(409, "already_decided", "dispute already decided")
            if dispute.status != "skipped":
                dispute.status = "skipped"
                log_path = self._round_dir(rnd.benchmark_id, rnd.round_id) / "decisions.jsonl"
                _fsync_append(log_path, {"type": "skip", "dispute_id": dispute_id})
            ack = {
                "dispute_id": dispute_id,
                "skipped": True,
                "remaining": rnd.remaining(),
                "round_state": rnd.state,
            }
            if rnd.remaining() == 0:
                self._commit(rnd)
                ack["round_state"] = rnd.state
            return ack

    # -- commit ---------------------------------------------------------------

    def _combined_decision(self, rnd: OpenRound, dispute: DisputeState):
        submission = dispute.submission
        override = None
        if submission["decision"] == "ACCEPT" and submission.get("rationale_text"):
            override = Rationale(
                text=submission["rationale_text"], author=submission["actor"]
            )
        human = AuditorResponse(
            decision=submission["decision"],
            override_rationale=override,
            error_code=submission.get("error_code"),
            confidence=Confidence(submission["confidence"]),
        )
        responses = [(submission["actor"], AuditorKind.HUMAN, human)]
        if rnd.config.strict_mode:
            agent = build_agent_auditor(rnd.agent_auditor_spec)
            responses.append((agent.actor_id, agent.kind, agent.review(dispute.proposal)))
        return combine_decisions(dispute.proposal, responses, rnd.config.strict_mode)

    def _commit(self, rnd: OpenRound) -> None:
        store = self.stores[rnd.benchmark_id]
        history = self.histories[rnd.benchmark_id]
        decided = [d for d in rnd.disputes.values() if d.status == "decided"]
        decided.sort(key=lambda d: d.index)
        decisions = [self._combined_decision(rnd, d) for d in decided]
        predictions = {
            cid: (parse_verdict(v) if v != ABSTAIN else ABSTAIN)
            for cid, v in rnd.predictions.items()
        }
        version = store.head()
        new_version, report = evolve_and_score(
            store,
            version,
            predictions,
            decisions,
            audited_claims=[d.claim_id for d in decided],
            conflicts=len(rnd.proposals),
            challenger=rnd.challenger_id,
            cumulative_accepted_before=history.accepted_since_calibration,
        )
        history.record_round(
            RoundRecord(
                round=new_version.version,
                challenger=rnd.challenger_id,
                proposals=rnd.proposals,
                decisions={d.claim_id: d for d in decisions},
                audited_claims=[d.claim_id for d in decided],
                microgold_accuracy=report.microgold_accuracy,
                score=report.score,
                accepted=report.accepted,
                cumulative_change_fraction=report.cumulative_change_fraction,
            )
        )
        rnd.state = "COMMITTED"
        rnd.report = report.to_json()
        self._persist_benchmark(rnd.benchmark_id)
        (self._round_dir(rnd.benchmark_id, rnd.round_id) / "report.json").write_text(
            json.dumps(rnd.report, ensure_ascii=False), "utf-8"
        )

    # -- views ------------------------------------------------------------------

    def dispute_view(self, rnd: OpenRound, dispute: DisputeState) -> dict:
        store = self.stores[rnd.benchmark_id]
        claim = store.claim(dispute.claim_id)
        doc = store.report(claim.report_id)
        span = doc.span_of(claim.sentence_id)
        proposal = dispute.proposal
        return {
            "dispute_id": dispute.dispute_id,
            "claim_id": dispute.claim_id,
            "claim_text": claim.text,
            "report_id": claim.report_id,
            "report_excerpt": doc.body,
            "claim_start": span.start,
            "claim_end": span.end,
            "incumbent": {
                "verdict": proposal.incumbent_verdict.value,
                "rationale_text": proposal.incumbent_rationale.text,
                "evidence_refs": list(proposal.incumbent_rationale.evidence_refs),
            },
            "proposal": {
                "verdict": proposal.proposed_verdict.value,
                "rationale_text": proposal.proposed_rationale.text,
                "evidence_refs": list(proposal.proposed_rationale.evidence_refs),
                "challenger": proposal.challenger,
            },
            "position": {"index": dispute.index, "total": len(rnd.disputes)},
            "status": dispute.status,
            "label_definitions": LABEL_DEFINITIONS,
            "error_codes": error_code_listing(),
        }


# ---------------------------------------------------------------------------
# FastAPI wiring
# ---------------------------------------------------------------------------


def create_app(
    data_dir: Path | str,
    service: BenchmarkService | None = None,
    token_file: Path | str | None = None,
    price_table_path: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="auditbench", docs_url=None, redoc_url=None)
    state = service or BenchmarkService(
        data_dir, token_file=token_file, price_table_path=price_table_path
    )
    app.state.service = state

    def authenticate(authorization: str | None) -> dict:
        if not authorization or not authorization.startswith("Bearer "):
            raise ApiError(401, "unauthorized", "missing bearer token")
        token = authorization[len("Bearer ") :].strip()
        entry = state.tokens.get(token)
        if entry is None:
            raise ApiError(401, "unauthorized", "unknown token")
        return entry

    def require(role: str):
        def dependency(authorization: str | None = Header(default=None)) -> dict:
            entry = authenticate(authorization)
            if role not in entry.get("roles", ()):
                raise ApiError(403, "forbidden", f"requires role {role!r}")
            return entry

        return dependency

    @app.exception_handler(ApiError)
    async def on_api_error(_request: Request, exc: ApiError):
        return _error(exc.status, exc.code, exc.message)

    @app.exception_handler(AuditBenchError)
    async def on_engine_error(_request: Request, exc: AuditBenchError):
        status = 404 if isinstance(exc, NotFound) else 422
        return _error(status, exc.code, exc.message)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/prices")
    def get_prices(actor: dict = Depends(require("auditor"))):
        if state.price_table is None:
            raise ApiError(404, "not_found", "no price table configured")
        return state.price_table

    @app.get("/benchmarks/{benchmark_id}/versions/{t}")
    def get_version(benchmark_id: str, t: int, actor: dict = Depends(require("auditor"))):
        store = state.store(benchmark_id)
        version = store.version(t)
        return {
            "benchmark_id": benchmark_id,
            "version": version.version,
            "parent": version.parent,
            "snapshot_digest": version.snapshot_digest,
            "entries": [version.entries[cid].canonical() for cid in sorted(version.entries)],
        }

    @app.post("/benchmarks/{benchmark_id}/rounds", status_code=201)
    def post_round(
        benchmark_id: str,
        payload: dict = Body(...),
        actor: dict = Depends(require("admin")),
    ):
        rnd = state.create_round(
            benchmark_id, payload.get("config", {}), payload.get("challenger", {})
        )
        return {
            "round_id": rnd.round_id,
            "state": rnd.state,
            "disputes": len(rnd.disputes),
            "conflicts": len(rnd.proposals),
        }

    @app.get("/benchmarks/{benchmark_id}/rounds")
    def list_rounds(benchmark_id: str, actor: dict = Depends(require("auditor"))):
        state.store(benchmark_id)
        return {
            "rounds": [
                {
                    "round_id": rnd.round_id,
                    "state": rnd.state,
                    "disputes": len(rnd.disputes),
                    "remaining": rnd.remaining(),
                }
                for rnd in state.rounds.values()
                if rnd.benchmark_id == benchmark_id
            ]
        }

    @app.get("/rounds/{round_id}/disputes")
    def get_disputes(
        round_id: str,
        actor_filter: str | None = Query(default=None, alias="actor"),
        actor: dict = Depends(require("auditor")),
    ):
        rnd = state.round(round_id)
        views = [
            state.dispute_view(rnd, rnd.disputes[dispute_id]) for dispute_id in rnd.order
        ]
        return {
            "round_id": round_id,
            "state": rnd.state,
            "total": len(views),
            "remaining": rnd.remaining(),
            "disputes": views,
        }

    @app.post("/disputes/{dispute_id}/decision")
    def post_decision(
        dispute_id: str,
        payload: dict = Body(...),
        actor: dict = Depends(require("auditor")),
    ):
        return state.submit_decision(dispute_id, payload, actor.get("actor", "auditor"))

    @app.post("/disputes/{dispute_id}/skip")
    def post_skip(dispute_id: str, actor: dict = Depends(require("auditor"))):
        return state.skip_dispute(dispute_id)

    @app.get("/rounds/{round_id}/report")
    def get_report(round_id: str, actor: dict = Depends(require("auditor"))):
        rnd = state.round(round_id)
        if rnd.state != "COMMITTED" or rnd.report is None:
            raise ApiError(409, "round_open", "round has not committed yet")
        report = dict(rnd.report)
        if "calibration" not in actor.get("roles", ()):
            report.pop("microgold_accuracy", None)
        return report

    @app.get("/benchmarks/{benchmark_id}/scores")
    def get_scores(
        benchmark_id: str,
        version: int = Query(default=-1),
        actor: dict = Depends(require("auditor")),
    ):
        store = state.store(benchmark_id)
        target = store.version(version if version >= 0 else store.head().version)
        gold = {
            cid: collapse(entry.verdict)
            for cid, entry in target.entries.items()
        }
        scoreable = {cid for cid, g in gold.items() if g is not None}
        rows = []
        for record in state.histories[benchmark_id].rounds:
            rnd = next(
                (
                    r
                    for r in state.rounds.values()
                    if r.benchmark_id == benchmark_id and r.state == "COMMITTED"
                    and r.report and r.report.get("round") == record.round
                ),
                None,
            )
            predictions_raw = rnd.predictions if rnd else None
            if predictions_raw is None:
                continue
            preds = {}
            for cid in scoreable:
                raw = predictions_raw.get(cid, ABSTAIN)
                if raw == ABSTAIN:
                    preds[cid] = FORCED_INCORRECT
                else:
                    binary = collapse(parse_verdict(raw))
                    preds[cid] = binary if binary is not None else FORCED_INCORRECT
            metrics = compute_metrics(preds, {cid: gold[cid] for cid in scoreable})
            rows.append(
                {
                    "round": record.round,
                    "challenger": record.challenger,
                    "metrics": metrics.to_json(),
                }
            )
        out = {
            "benchmark_id": benchmark_id,
            "version": target.version,
            "snapshot_digest": target.snapshot_digest,
            "scores": rows,
            "changelog": [
                r.to_json() for r in store.changelog if r.round <= target.version
            ],
        }
        if "calibration" in actor.get("roles", ()):
            acc = store.microgold_accuracy(target)
            out["microgold_summary"] = {
                "accuracy": acc,
                "n_items": len(store.calibration),
            }
        return out

    return app


def seed_demo(
    data_dir: Path | str,
    benchmark_id: str = "demo",
    n_claims: int = 8,
    tokens: Mapping[str, dict] | None = None,
) -> dict:
    """Create a small benchmark plus auth tokens for demos and e2e tests."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    store = BenchmarkStore(benchmark_id=benchmark_id)
    body = " ".join(
        f"Demo claim {i} states that metric {i} improved by {i + 1} points." for i in range(n_claims)
    )
    store.ingest_report(body, "demo-report", "demo")
    doc = store.report("demo-report")
    entries = []
    for i, span in enumerate(doc.sentences):
        claim = store.claim_from_sentence("demo-report", span.sentence_id, claim_id=f"c{i:03d}")
        verdict = VerdictLabel.SUPPORTED if i % 2 == 0 else VerdictLabel.INCONCLUSIVE
        entries.append(
            (
                claim,
                verdict,
                Rationale(text=f"seed rationale for claim {i}", author="expert"),
            )
        )
    store.init_benchmark(entries)
    token_map = dict(tokens) if tokens else {
        "admin-" + secrets.token_hex(4): {
            "actor": "admin",
            "roles": ["admin", "auditor", "calibration"],
        },
        "auditor-" + secrets.token_hex(4): {"actor": "aud1", "roles": ["auditor"]},
        "calib-" + secrets.token_hex(4): {
            "actor": "calib1",
            "roles": ["auditor", "calibration"],
        },
    }
    (data_dir / "tokens.json").write_text(json.dumps(token_map, indent=1), "utf-8")
    service = BenchmarkService(data_dir)
    service.tokens = token_map
    service.add_benchmark(store)
    return {
        "benchmark_id": benchmark_id,
        "claims": n_claims,
        "tokens": token_map,
        "data_dir": str(data_dir),
    }
