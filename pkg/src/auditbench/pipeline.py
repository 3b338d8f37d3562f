"""Document-level claim verification pipeline.

Stages: (0) context extraction over the full report, (1) breadth-oriented
query planning, (2) document search and summarization, (3) depth-oriented
detail questioning per document, (4) sufficiency judgment, iterating while
evidence is insufficient and step budget remains, then a final verdict
grounded in the retained documents.  A grouped variant verifies a window of
adjacent claims in one pass to amortize shared context.

Hard budgets (steps, queries per step, retained sources, completion tokens
per call) are enforced by the pipeline itself, never delegated to
providers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InvalidInput, PreconditionViolation, ProviderError
from .labels import VerdictLabel
from .metrics import TokenLedger
from .providers import (
    CLAIM_MARKER,
    DOCUMENT_MARKER,
    REPORT_MARKER,
    SECTION_MARKER,
    Completion,
    Providers,
    SearchHit,
)
from .store import ClaimRecord, Rationale, ReportDocument


@dataclass(frozen=True)
class PipelineBudget:
    max_steps: int = 2
    max_queries_per_step: int = 5
    max_sources: int = 40
    max_completion_tokens: int = 8192

    def __post_init__(self):
        for name in ("max_steps", "max_queries_per_step", "max_sources", "max_completion_tokens"):
            if getattr(self, name) < 1:
                raise InvalidInput(f"{name} must be >= 1")

    def to_json(self) -> dict:
        return {
            "max_steps": self.max_steps,
            "max_queries_per_step": self.max_queries_per_step,
            "max_sources": self.max_sources,
            "max_completion_tokens": self.max_completion_tokens,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "PipelineBudget":
        return cls(
            max_steps=int(obj.get("max_steps", 2)),
            max_queries_per_step=int(obj.get("max_queries_per_step", 5)),
            max_sources=int(obj.get("max_sources", 40)),
            max_completion_tokens=int(obj.get("max_completion_tokens", 8192)),
        )


@dataclass
class EvidenceDoc:
    source_id: str
    url: str
    raw_excerpt_digest: str
    summary: str
    depth_qa: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "source_id": self.source_id,
            "url": self.url,
            "raw_excerpt_digest": self.raw_excerpt_digest,
            "summary": self.summary,
            "depth_qa": [list(qa) for qa in self.depth_qa],
        }


@dataclass
class StepTrace:
    step: int
    queries: list[str]
    docs_retained: list[str]
    depth_questions: int
    sufficient: bool
    sufficiency_reason: str

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "queries": self.queries,
            "docs_retained": self.docs_retained,
            "depth_questions": self.depth_questions,
            "sufficient": self.sufficient,
            "sufficiency_reason": self.sufficiency_reason,
        }


@dataclass
class VerificationTrace:
    claim_ids: tuple[str, ...]
    context: str
    steps: list[StepTrace]
    evidence: dict[str, EvidenceDoc]
    verdicts: dict[str, str]
    rationales: dict[str, str]
    evidence_refs: list[str]
    ledger: TokenLedger

    @property
    def claim_id(self) -> str:
        return self.claim_ids[0]

    def to_json(self) -> dict:
        return {
            "claim_ids": list(self.claim_ids),
            "context": self.context,
            "steps": [s.to_json() for s in self.steps],
            "evidence": {sid: d.to_json() for sid, d in self.evidence.items()},
            "verdicts": self.verdicts,
            "rationales": self.rationales,
            "evidence_refs": self.evidence_refs,
            "ledger": self.ledger.to_json(),
        }


# ---------------------------------------------------------------------------
# Provider call plumbing
# ---------------------------------------------------------------------------


def _call(
    providers: Providers,
    ledger: TokenLedger,
    budget: PipelineBudget,
    prompt: str,
    *,
    purpose: str,
    step: int,
    key: str,
    model: str | None = None,
) -> str:
    cap = budget.max_completion_tokens
    try:
        completion: Completion = providers.text_model.complete(
            prompt, cap, purpose=purpose, step=step, key=key
        )
    except Exception as exc:  # provider contract: any failure is terminal
        raise ProviderError(f"text model failed on {purpose} ({key}): {exc}") from exc
    # the request cap is authoritative even if a provider over-reports
    ledger.add(
        model or providers.model,
        completion.input_tokens,
        min(completion.output_tokens, cap),
        stage=purpose,
    )
    return completion.text


def _search(providers: Providers, query: str) -> Sequence[SearchHit]:
    try:
        return providers.search.search(query)
    except Exception as exc:
        raise ProviderError(f"search failed on {query!r}: {exc}") from exc


def _enclosing_section(report: ReportDocument, start: int, end: int) -> str:
    """Paragraph (blank-line delimited) around a character span."""
    body = report.body
    lo = body.rfind("\n\n", 0, start)
    lo = 0 if lo == -1 else lo + 2
    hi = body.find("\n\n", end)
    hi = len(body) if hi == -1 else hi
    return body[lo:hi].strip()


def _parse_queries(text: str, cap: int) -> list[str]:
    queries = [line.strip() for line in text.splitlines() if line.strip()]
    return queries[:cap]


def _parse_sufficiency(text: str) -> tuple[bool, str]:
    head, _, reason = text.strip().partition(":")
    return head.strip().lower().startswith("yes"), reason.strip()


def _parse_depth_qa(text: str) -> list[tuple[str, str]]:
    pairs = []
    question = None
    for line in text.splitlines():
        line = line.strip()
        if line.lower().startswith("q:"):
            question = line[2:].strip()
        elif line.lower().startswith("a:") and question is not None:
            pairs.append((question, line[2:].strip()))
            question = None
    return pairs


def _parse_refs(line: str) -> list[str]:
    return [ref.strip() for ref in line.split(",") if ref.strip()]


_VERDICT_NAMES = {v.value.lower(): v for v in VerdictLabel}


def _parse_verdict_block(text: str) -> tuple[VerdictLabel, str, list[str]]:
    """Parse ``Verdict\nrationale: ...\nrefs: a,b`` completions."""
    verdict = VerdictLabel.INCONCLUSIVE
    rationale_lines: list[str] = []
    refs: list[str] = []
    first_content = True
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        lower = stripped.lower()
        if first_content and lower in _VERDICT_NAMES:
            verdict = _VERDICT_NAMES[lower]
        elif lower.startswith("rationale:"):
            rationale_lines.append(stripped[len("rationale:") :].strip())
        elif lower.startswith("refs:"):
            refs = _parse_refs(stripped[len("refs:") :])
        else:
            rationale_lines.append(stripped)
        first_content = False
    return verdict, " ".join(rationale_lines).strip(), refs


# ---------------------------------------------------------------------------
# Stage 0: context extraction
# ---------------------------------------------------------------------------


def _context_prompt(report: ReportDocument, claims: Sequence[ClaimRecord]) -> str:
    sections = []
    for claim in claims:
        span = report.span_of(claim.sentence_id)
        sections.append(_enclosing_section(report, span.start, span.end))
    claim_block = "\n".join(c.text for c in claims)
    section_block = "\n".join(dict.fromkeys(sections))  # dedupe, keep order
    return (
        f"{CLAIM_MARKER}\n{claim_block}\n{SECTION_MARKER}\n{section_block}\n"
        f"{REPORT_MARKER}\n{report.body}"
    )


def extract_context(
    report: ReportDocument,
    claim: ClaimRecord,
    providers: Providers,
    budget: PipelineBudget | None = None,
    ledger: TokenLedger | None = None,
) -> str:
    """Distill the report-wide context a claim needs for verification."""
    if claim.report_id != report.report_id:
        raise PreconditionViolation(
            f"claim {claim.claim_id!r} does not belong to report {report.report_id!r}"
        )
    if claim.text != report.sentence_text(claim.sentence_id):
        raise PreconditionViolation(
            f"claim {claim.claim_id!r} text does not match its report slice"
        )
    budget = budget or PipelineBudget()
    ledger = ledger if ledger is not None else TokenLedger()
    prompt = _context_prompt(report, [claim])
    return _call(
        providers, ledger, budget, prompt, purpose="context", step=0, key=claim.claim_id
    )


# ---------------------------------------------------------------------------
# The iterative pipeline
# ---------------------------------------------------------------------------


def _run_pipeline(
    claims: Sequence[ClaimRecord],
    report: ReportDocument,
    budget: PipelineBudget,
    providers: Providers,
) -> VerificationTrace:
    for claim in claims:
        if claim.report_id != report.report_id:
            raise PreconditionViolation(
                f"claim {claim.claim_id!r} does not belong to report {report.report_id!r}"
            )
    key = claims[0].claim_id
    ledger = TokenLedger()
    context = _call(
        providers,
        ledger,
        budget,
        _context_prompt(report, claims),
        purpose="context",
        step=0,
        key=key,
    )
    evidence: dict[str, EvidenceDoc] = {}
    steps: list[StepTrace] = []
    sufficient = False
    for step_no in range(1, budget.max_steps + 1):
        query_text = _call(
            providers,
            ledger,
            budget,
            f"context:\n{context}\nplan search queries, one per line",
            purpose="queries",
            step=step_no,
            key=key,
        )
        queries = _parse_queries(query_text, budget.max_queries_per_step)
        retained_now: list[str] = []
        for query in queries:
            for hit in _search(providers, query):
                if hit.source_id in evidence:
                    continue
                if len(evidence) >= budget.max_sources:
                    break
                summary = _call(
                    providers,
                    ledger,
                    budget,
                    f"summarize for the claim context\n{DOCUMENT_MARKER}\n{hit.text}",
                    purpose="summary",
                    step=step_no,
                    key=hit.source_id,
                    model=providers.summary_model,
                )
                evidence[hit.source_id] = EvidenceDoc(
                    source_id=hit.source_id,
                    url=hit.url,
                    raw_excerpt_digest=hashlib.sha256(hit.text.encode("utf-8")).hexdigest()[:16],
                    summary=summary or f"summary of {hit.source_id}",
                )
                retained_now.append(hit.source_id)
        depth_count = 0
        for source_id in retained_now:
            doc = evidence[source_id]
            depth_text = _call(
                providers,
                ledger,
                budget,
                f"ask claim-critical detail questions\n{DOCUMENT_MARKER}\n{doc.summary}",
                purpose="depth",
                step=step_no,
                key=source_id,
            )
            doc.depth_qa.extend(_parse_depth_qa(depth_text))
            depth_count += len(doc.depth_qa)
        sufficiency_text = _call(
            providers,
            ledger,
            budget,
            "is the collected evidence sufficient? answer yes/no: reason",
            purpose="sufficiency",
            step=step_no,
            key=key,
        )
        sufficient, reason = _parse_sufficiency(sufficiency_text)
        steps.append(
            StepTrace(
                step=step_no,
                queries=queries,
                docs_retained=retained_now,
                depth_questions=depth_count,
                sufficient=sufficient,
                sufficiency_reason=reason,
            )
        )
        if sufficient:
            break
    verdict_text = _call(
        providers,
        ledger,
        budget,
        "final verdict grounded in retained evidence",
        purpose="verdict",
        step=len(steps),
        key=key,
    )
    verdicts: dict[str, str] = {}
    rationales: dict[str, str] = {}
    refs: list[str] = []
    if len(claims) == 1:
        verdict, rationale, raw_refs = _parse_verdict_block(verdict_text)
        verdicts[key] = verdict.value
        rationales[key] = rationale or "no rationale produced"
        refs = raw_refs
    else:
        by_claim: dict[str, str] = {}
        for line in verdict_text.splitlines():
            stripped = line.strip()
            if stripped.lower().startswith("refs:"):
                refs = _parse_refs(stripped[len("refs:") :])
                continue
            cid, sep, rest = stripped.partition(":")
            if sep and cid.strip():
                by_claim[cid.strip()] = rest.strip()
        for claim in claims:
            raw = by_claim.get(claim.claim_id, "")
            label, _, rationale = raw.partition("|")
            verdict = _VERDICT_NAMES.get(label.strip().lower(), VerdictLabel.INCONCLUSIVE)
            verdicts[claim.claim_id] = verdict.value
            rationales[claim.claim_id] = (
                rationale.strip() or "group verification did not elaborate"
            )
    grounded_refs = [r for r in refs if r in evidence]  # cite retained docs only
    return VerificationTrace(
        claim_ids=tuple(c.claim_id for c in claims),
        context=context,
        steps=steps,
        evidence=evidence,
        verdicts=verdicts,
        rationales=rationales,
        evidence_refs=grounded_refs,
        ledger=ledger,
    )


def verify_claim(
    claim: ClaimRecord,
    report: ReportDocument,
    budget: PipelineBudget | None = None,
    providers: Providers | None = None,
) -> tuple[VerdictLabel, Rationale, VerificationTrace]:
    """Run the full pipeline for one claim."""
    if providers is None:
        raise InvalidInput("providers are required")
    budget = budget or PipelineBudget()
    trace = _run_pipeline([claim], report, budget, providers)
    verdict = VerdictLabel(trace.verdicts[claim.claim_id])
    rationale = Rationale(
        text=trace.rationales[claim.claim_id],
        evidence_refs=tuple(trace.evidence_refs),
        author=f"pipeline:{providers.model}",
    )
    return verdict, rationale, trace


@dataclass
class GroupResult:
    verdicts: dict[str, tuple[VerdictLabel, Rationale]]
    traces: list[VerificationTrace]

    @property
    def pipeline_runs(self) -> int:
        return len(self.traces)


def verify_group(
    claims: Sequence[ClaimRecord],
    report: ReportDocument,
    group_size: int,
    budget: PipelineBudget | None = None,
    providers: Providers | None = None,
) -> GroupResult:
    """Verify claims in consecutive windows of at most ``group_size``.

    Window size 1 degenerates to per-claim verification; otherwise each
    window runs one pipeline pass that yields a verdict per member.
    """
    if group_size < 1:
        raise InvalidInput("group_size must be >= 1")
    if providers is None:
        raise InvalidInput("providers are required")
    budget = budget or PipelineBudget()
    result = GroupResult(verdicts={}, traces=[])
    if group_size == 1:
        for claim in claims:
            verdict, rationale, trace = verify_claim(claim, report, budget, providers)
            result.verdicts[claim.claim_id] = (verdict, rationale)
            result.traces.append(trace)
        return result
    for lo in range(0, len(claims), group_size):
        window = claims[lo : lo + group_size]
        trace = _run_pipeline(window, report, budget, providers)
        result.traces.append(trace)
        for claim in window:
            verdict = VerdictLabel(trace.verdicts[claim.claim_id])
            rationale = Rationale(
                text=trace.rationales[claim.claim_id],
                evidence_refs=tuple(trace.evidence_refs),
                author=f"pipeline:{providers.model}",
            )
            result.verdicts[claim.claim_id] = (verdict, rationale)
    return result


class PipelineChallenger:
    """Adapter exposing the pipeline as a round challenger."""

    def __init__(
        self,
        providers: Providers,
        budget: PipelineBudget | None = None,
        actor_id: str = "pipeline",
    ):
        self.actor_id = actor_id
        self.providers = providers
        self.budget = budget or PipelineBudget()
        self.traces: list[VerificationTrace] = []

    def verify(self, claim: ClaimRecord, report: ReportDocument):
        verdict, rationale, trace = verify_claim(claim, report, self.budget, self.providers)
        self.traces.append(trace)
        return verdict, rationale
