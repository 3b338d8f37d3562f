"""Shared corpus builders for the test suite."""

from __future__ import annotations

import itertools

import pytest

from auditbench.labels import MicroGoldConstruction, RiskTag, VerdictLabel
from auditbench.labels import ErrorCode
from auditbench.store import BenchmarkStore, MicroGold, Rationale


def report_body(n_sentences: int, stem: str = "Finding") -> str:
    sentences = [
        f"{stem} {i} reports outcome number {i} for trial {i}." for i in range(n_sentences)
    ]
    return " ".join(sentences)


def seed_rationale(author: str = "expert") -> Rationale:
    return Rationale(text="seed annotation", evidence_refs=("src://seed",), author=author)


_ERROR_CODES = itertools.cycle(["A-N1", "C-AU", "G-H1", "A-S1", "C-PV", "G-C1"])


def build_corpus(
    n_reports: int = 5,
    sentences_per_report: int = 10,
    n_microgold: int = 10,
    wrong_microgold: int = 4,
    benchmark_id: str = "bench",
):
    """A synthetic benchmark: one claim per sentence, micro-golds up front.

    The first two micro-golds are citation-validated (gold Supported); the
    rest are adversarial (gold Contradictory/Inconclusive alternating).
    ``wrong_microgold`` of them are seeded with a benchmark verdict on the
    wrong side of the binary collapse, every other claim starts correct.
    Returns (store, wrong_ids, microgold_ids).
    """
    store = BenchmarkStore(benchmark_id=benchmark_id)
    claim_specs = []
    for r in range(n_reports):
        report_id = f"r{r}"
        store.ingest_report(report_body(sentences_per_report), report_id, domain=f"field-{r}")
        doc = store.report(report_id)
        for span in doc.sentences:
            claim_specs.append((report_id, span.sentence_id))

    microgold_ids = []
    wrong_ids = []
    entries = []
    verdict_cycle = itertools.cycle(
        [VerdictLabel.SUPPORTED, VerdictLabel.INCONCLUSIVE, VerdictLabel.CONTRADICTORY]
    )
    for i, (report_id, sentence_id) in enumerate(claim_specs):
        claim_id = f"c{i:03d}"
        microgold = None
        if i < n_microgold:
            if i < 2:
                microgold = MicroGold(
                    gold_label=VerdictLabel.SUPPORTED,
                    construction=MicroGoldConstruction.VALIDATED_SUPPORTED,
                    manually_confirmed=True,
                )
            else:
                gold = (
                    VerdictLabel.CONTRADICTORY if i % 2 == 0 else VerdictLabel.INCONCLUSIVE
                )
                microgold = MicroGold(
                    gold_label=gold,
                    construction=MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED,
                    error_code=ErrorCode(next(_ERROR_CODES)),
                    manually_confirmed=True,
                )
            microgold_ids.append(claim_id)
            # seed the first `wrong_microgold` of them on the wrong side
            if len(wrong_ids) < wrong_microgold and i % 2 == 0:
                wrong_ids.append(claim_id)
                verdict = (
                    VerdictLabel.CONTRADICTORY
                    if microgold.gold_label is VerdictLabel.SUPPORTED
                    else VerdictLabel.SUPPORTED
                )
            else:
                verdict = microgold.gold_label
        else:
            verdict = next(verdict_cycle)
        claim = store.claim_from_sentence(
            report_id,
            sentence_id,
            claim_id=claim_id,
            importance=(i % 5) + 1,
            risk_tag=(
                RiskTag.FLAGGED_BY_EVALUATOR if i % 3 == 0 else RiskTag.SUPPORTED_BY_EVALUATOR
            ),
            microgold=microgold,
        )
        entries.append((claim, verdict, seed_rationale()))
    store.init_benchmark(entries)
    return store, wrong_ids, microgold_ids


@pytest.fixture
def corpus():
    return build_corpus()


def run_oracle_simulation(store, wrong_ids, coverage=(2, 3, 4), noise_per_round=3, p=1.0):
    """Three rounds of increasingly capable scripted challengers against an
    oracle auditor that accepts exactly gold-matching proposals.

    Returns (engine, reports).  Each round's challenger proposes the gold
    verdict for the first ``coverage[t]`` seeded-wrong micro-golds plus flip
    noise on a few ordinary claims; the oracle rejects all noise.
    """
    from auditbench.protocol import (
        OracleAuditor,
        RoundConfig,
        RoundEngine,
        ScriptedChallenger,
    )

    engine = RoundEngine(store)
    auditor = OracleAuditor(store.calibration)
    reports = []
    plain = [cid for cid in sorted(store.head().entries) if cid not in store.calibration]
    flip = {
        VerdictLabel.SUPPORTED: VerdictLabel.CONTRADICTORY,
        VerdictLabel.INCONCLUSIVE: VerdictLabel.SUPPORTED,
        VerdictLabel.CONTRADICTORY: VerdictLabel.SUPPORTED,
        VerdictLabel.NONE_VERIFIABLE: VerdictLabel.SUPPORTED,
    }
    for round_no, covered in enumerate(coverage, start=1):
        head = store.head()
        verdicts = {
            cid: store.calibration[cid].gold_label for cid in wrong_ids[:covered]
        }
        noise_claims = plain[
            (round_no - 1) * noise_per_round : round_no * noise_per_round
        ]
        for cid in noise_claims:
            verdicts[cid] = flip[head.entries[cid].verdict]
        challenger = ScriptedChallenger(
            verdicts, actor_id=f"agent{round_no}", default=head
        )
        config = RoundConfig(audit_fraction=p, seed=round_no)
        _, report = engine.run_round(challenger, [auditor], config)
        reports.append(report)
    return engine, reports
