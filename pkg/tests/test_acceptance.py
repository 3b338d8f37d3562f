"""Acceptance suite.

One test per criterion, each printing a PASS line with its runtime when its
assertions hold.  Tolerances are pinned here and nowhere else.
"""

from __future__ import annotations

import itertools
import time
from decimal import Decimal

import numpy as np
import pytest

from auditbench.labels import RiskTag, VerdictLabel
from auditbench.metrics import (
    FlowTable,
    PriceTable,
    TokenLedger,
    aggregate_sentence,
    cost_estimate,
    flow_marginals,
    paired_cluster_bootstrap,
)
from auditbench.pipeline import PipelineBudget, verify_claim, verify_group
from auditbench.protocol import (
    RoundConfig,
    RoundHistory,
    maintenance_check,
    replay_counterfactual,
)
from auditbench.providers import FixtureSearch, FixtureTextModel, Providers
from auditbench.sampling import allocate_quotas, sample_claims
from auditbench.store import BenchmarkStore

from conftest import build_corpus, run_oracle_simulation

S, I, C, N = (
    VerdictLabel.SUPPORTED,
    VerdictLabel.INCONCLUSIVE,
    VerdictLabel.CONTRADICTORY,
    VerdictLabel.NONE_VERIFIABLE,
)


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False


def _report(n, description, timer, limit=None):
    line = f"PASS criterion {n}: {description} ({timer.elapsed:.2f}s)"
    print(line)
    if limit is not None:
        assert timer.elapsed < limit, f"criterion {n} exceeded {limit}s budget"


# -- 1 ----------------------------------------------------------------------

COST_ROWS = [
    ("deep-researcher", 52.3, 9.0, "0.18"),
    ("deep-researcher-plus", 83.3, 13.9, "0.28"),
    ("react-agent", 294.4, 3.4, "0.62"),
    ("document-verifier", 516.9, 18.6, "1.16"),
    ("document-verifier-g5", 131.4, 4.9, "0.30"),
    ("document-verifier-g10", 93.5, 3.5, "0.21"),
]


def test_criterion_1_cost_table_reproduction():
    prices = PriceTable(
        {"primary": {"input_usd_per_million": 2.00, "output_usd_per_million": 8.00}}
    )
    with _Timer() as t:
        for name, input_k, output_k, printed in COST_ROWS:
            ledger = TokenLedger()
            ledger.add("primary", int(input_k * 1000), int(output_k * 1000))
            est = cost_estimate(ledger, prices, normalize_to="primary")
            delta = abs(est.usd_per_claim - Decimal(printed))
            assert delta <= Decimal("0.03"), (name, est.usd_per_claim, printed)
    _report(1, "six printed cost rows reproduced within $0.03", t, limit=1.0)


# -- 2 ----------------------------------------------------------------------


def test_criterion_2_quota_example_and_conservation():
    proportions = {5: 0.40, 4: 0.35, 3: 0.20, 2: 0.05, 1: 0.0}
    with _Timer() as t:
        quotas = allocate_quotas(40, proportions, {lv: 10_000 for lv in proportions})
        assert quotas == {5: 16, 4: 14, 3: 8, 2: 2, 1: 0}
        rng = np.random.default_rng(2202)
        for _ in range(1000):
            N = int(rng.integers(1, 200))
            available = {lv: int(rng.integers(0, 90)) for lv in proportions}
            out = allocate_quotas(N, proportions, available)
            assert sum(out.values()) == min(N, sum(available.values()))
            assert all(0 <= out[lv] <= available[lv] for lv in proportions)
    _report(2, "worked quota example exact; conservation on 1000 random vectors", t, limit=5.0)


# -- 3 ----------------------------------------------------------------------


def test_criterion_3_first_draw_sampling_law():
    with _Timer() as t:
        trials = 100_000
        for rho in (2.0, 3.0, 5.0):
            bucket = {
                5: [("plain", RiskTag.SUPPORTED_BY_EVALUATOR),
                    ("risky", RiskTag.FLAGGED_BY_EVALUATOR)]
            }
            expected = rho / (1.0 + rho)
            hits = 0
            for seed in range(trials):
                hits += sample_claims(bucket, {5: 1}, rho, seed)[0] == "risky"
            assert abs(hits / trials - expected) < 0.02, rho
    _report(3, "first-draw frequencies match w/sum(w) within 0.02 for rho in {2,3,5}", t, limit=30.0)


# -- 4 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def oracle_run():
    store, wrong_ids, microgold_ids = build_corpus(
        n_reports=5, sentences_per_report=10, n_microgold=10, wrong_microgold=4
    )
    engine, reports = run_oracle_simulation(store, wrong_ids, coverage=(2, 3, 4), p=1.0)
    return store, engine, reports


def test_criterion_4_oracle_simulation(oracle_run):
    with _Timer() as t:
        store, engine, reports = oracle_run
        assert len(store.version(0).entries) == 50
        assert len(store.calibration) == 10
        assert store.microgold_accuracy(store.version(0)) == pytest.approx(0.6)
        trajectory = [r.microgold_accuracy for r in reports]
        assert trajectory[-1] == pytest.approx(1.0)
        assert all(b >= a for a, b in zip(trajectory, trajectory[1:]))
        assert len(trajectory) <= 3
        # unaudited-conflict preservation: every claim outside the audit set
        # keeps its verdict across the round it was not audited in
        for record in engine.history.rounds:
            before = store.version(record.round - 1)
            after = store.version(record.round)
            audited = set(record.audited_claims)
            for claim_id in before.entries:
                if claim_id not in audited:
                    assert (
                        before.entries[claim_id].verdict
                        == after.entries[claim_id].verdict
                    )
        # changelog replay reproduces every snapshot digest
        assert store.verify_replay()
        rebuilt = store.version(0)
        for t_no in range(1, len(store.versions)):
            group = [r for r in store.changelog if r.round == t_no]
            rebuilt = store.replay_changelog(group, rebuilt)
            assert rebuilt.snapshot_digest == store.version(t_no).snapshot_digest
    _report(4, "oracle auditing is monotone to 1.0 in 3 rounds; replay digests exact", t, limit=10.0)


# -- 5 ----------------------------------------------------------------------


def test_criterion_5_audit_fraction_replay(oracle_run):
    store, engine, reports = oracle_run
    with _Timer() as t:
        recorded = [r.microgold_accuracy for r in reports]
        assert replay_counterfactual(engine.history, 1.0, seed=7) == pytest.approx(recorded)
        n_seeds = 10_000
        means = []
        for p in (0.25, 0.5, 0.75, 1.0):
            total = 0.0
            for seed in range(n_seeds):
                total += replay_counterfactual(engine.history, p, seed)[-1]
            means.append(total / n_seeds)
        assert all(b >= a - 1e-12 for a, b in zip(means, means[1:])), means
        assert means[-1] == pytest.approx(1.0)
    _report(5, f"replay identity at p=1; mean final accuracy non-decreasing in p {means}", t, limit=60.0)


# -- 6 ----------------------------------------------------------------------


def _strict_vs_single_round(state, proposals, human, agent, strict):
    """Apply one round of a decision table to a correctness state."""
    out = dict(state)
    for claim, (proposes_fix, h_accept, a_accept) in proposals.items():
        accept = (h_accept and a_accept) if strict else h_accept
        if accept:
            out[claim] = proposes_fix
    return out


def test_criterion_6_strict_gating_subset_and_mixed_effect():
    with _Timer() as t:
        rng = np.random.default_rng(66)
        pattern_found = 0
        for _ in range(1000):
            n = 12
            state = {f"c{j}": bool(rng.random() < 0.5) for j in range(n)}
            accs_single, accs_strict = [], []
            state_single, state_strict = dict(state), dict(state)
            for _round in range(2):
                proposals = {}
                for j in range(n):
                    if rng.random() < 0.5:
                        proposals[f"c{j}"] = (
                            bool(rng.random() < 0.5),   # proposal fixes vs corrupts
                            bool(rng.random() < 0.7),   # human accepts
                            bool(rng.random() < 0.5),   # agent accepts
                        )
                accepted_single = {c for c, (_, h, _a) in proposals.items() if h}
                accepted_strict = {c for c, (_, h, a) in proposals.items() if h and a}
                assert accepted_strict <= accepted_single
                state_single = _strict_vs_single_round(
                    state_single, proposals, None, None, strict=False
                )
                state_strict = _strict_vs_single_round(
                    state_strict, proposals, None, None, strict=True
                )
                accs_single.append(sum(state_single.values()) / n)
                accs_strict.append(sum(state_strict.values()) / n)
            helped = [s > g for s, g in zip(accs_strict, accs_single)]
            hurt = [s < g for s, g in zip(accs_strict, accs_single)]
            if (helped[0] and hurt[1]) or (hurt[0] and helped[1]):
                pattern_found += 1
        assert pattern_found >= 1, "no round where strictness helped then hurt"
    _report(
        6,
        f"strict accepts are subsets (1000 tables); mixed help/hurt pattern in {pattern_found}",
        t,
    )


# -- 7 ----------------------------------------------------------------------


def test_criterion_7_aggregation_oracle():
    def oracle(atomic):
        for target in (C, I, S):
            if any(label is target for label in atomic):
                return target
        return N

    with _Timer() as t:
        checked = 0
        for size in range(0, 4):
            for combo in itertools.product((S, I, C, N), repeat=size):
                assert aggregate_sentence(list(combo)) is oracle(combo)
                checked += 1
        assert checked == 85
    _report(7, "sentence aggregation equals brute-force rule on all 85 inputs", t)


# -- 8 ----------------------------------------------------------------------


def test_criterion_8_flow_marginals():
    flows = {
        (0, 1, 1): 22.4, (0, 0, 1): 0.0, (1, 1, 1): 44.8, (1, 0, 1): 13.3,
        (0, 1, 0): 5.6, (0, 0, 0): 11.2, (1, 0, 0): 2.8, (1, 1, 0): 0.0,
    }
    with _Timer() as t:
        # published proportions are rounded to 0.1% (they sum to 100.1%), so
        # the sum check runs at percent-rounding tolerance
        marginals = flow_marginals(FlowTable.from_percentages(flows), tol=0.005)
        assert marginals["acc_H"] == pytest.approx(0.609, abs=1e-12)
        assert marginals["acc_A"] == pytest.approx(0.728, abs=1e-12)
        assert marginals["acc_Hprime"] == pytest.approx(0.805, abs=1e-12)
        assert abs(marginals["acc_H"] - 0.608) <= 0.002
    _report(8, "decision-flow marginals are 60.9 / 72.8 / 80.5 as summed", t)


# -- 9 ----------------------------------------------------------------------


def test_criterion_9_bootstrap():
    with _Timer() as t:
        corr_a = {"r1": {"x": True}, "r2": {"y": False}}
        corr_b = {"r1": {"x": False}, "r2": {"y": True}}
        result, diffs = paired_cluster_bootstrap(
            corr_a, corr_b, replicates=20_000, seed=99, return_diffs=True
        )
        assert abs(float(np.mean(diffs == 1.0)) - 0.25) < 0.01
        assert abs(float(np.mean(diffs == 0.0)) - 0.50) < 0.01
        assert abs(float(np.mean(diffs == -1.0)) - 0.25) < 0.01
        identical = paired_cluster_bootstrap(corr_a, corr_a, replicates=20_000, seed=1)
        assert (identical.mean_diff, identical.ci95_low, identical.ci95_high) == (0.0, 0.0, 0.0)
        serial = paired_cluster_bootstrap(corr_a, corr_b, replicates=20_000, seed=99)
        serial_again = paired_cluster_bootstrap(corr_a, corr_b, replicates=20_000, seed=99)
        parallel = paired_cluster_bootstrap(
            corr_a, corr_b, replicates=20_000, seed=99, workers=4
        )
        assert serial == serial_again == parallel == result
    _report(9, "two-report enumeration within 0.01; identical CI [0,0]; bit-identical at any worker count", t)


# -- 10 ---------------------------------------------------------------------


def _fixture_providers(responses=None, results=None):
    return Providers(
        text_model=FixtureTextModel(responses or {}),
        search=FixtureSearch(results or {}),
        model="primary",
        summary_model="auxiliary",
    )


def test_criterion_10_pipeline_budgets_and_grouping():
    with _Timer() as t:
        budget = PipelineBudget(
            max_steps=2, max_queries_per_step=5, max_sources=40, max_completion_tokens=8192
        )
        store = BenchmarkStore()
        body = " ".join(f"Pipeline claim {i} states point {i}." for i in range(10))
        store.ingest_report(body, "rp", "t")
        doc = store.report("rp")
        claims = [
            store.claim_from_sentence("rp", span.sentence_id, claim_id=f"p{i}")
            for i, span in enumerate(doc.sentences)
        ]
        rng = np.random.default_rng(1010)
        for trial in range(40):
            n_queries = int(rng.integers(0, 10))
            queries = "\n".join(f"q{trial}-{i}" for i in range(n_queries))
            results = {
                f"q{trial}-{i}": [
                    {"source_id": f"t{trial}q{i}d{k}", "url": "u", "snippet": "s", "text": "x"}
                    for k in range(int(rng.integers(0, 40)))
                ]
                for i in range(n_queries)
            }
            responses = {
                "queries": queries,
                "sufficiency": "no: keep digging" if rng.random() < 0.6 else "yes: done",
                "verdict:p0": {
                    "text": "Supported\nrationale: ok",
                    "output_tokens": int(rng.integers(1, 30_000)),
                },
            }
            _, _, trace = verify_claim(
                claims[0], doc, budget, _fixture_providers(responses, results)
            )
            assert len(trace.steps) <= 2
            assert all(len(s.queries) <= 5 for s in trace.steps)
            assert len(trace.evidence) <= 40
            assert all(r.output_tokens <= 8192 for r in trace.ledger.records)

        group_lines = "\n".join(f"p{i}: Supported | grouped" for i in range(10))
        grouped = verify_group(
            claims, doc, group_size=10, budget=budget,
            providers=_fixture_providers({"sufficiency": "yes: ok", "verdict:p0": group_lines}),
        )
        assert grouped.pipeline_runs == 1

        shared = {
            "queries": "shared",
            "sufficiency": "yes: ok",
            **{f"verdict:p{i}": f"{'Supported' if i % 2 else 'Contradictory'}\nrationale: r{i}"
               for i in range(10)},
        }
        results = {"shared": [{"source_id": "d0", "url": "u", "snippet": "s", "text": "x"}]}
        singles = verify_group(
            claims, doc, group_size=1, budget=budget,
            providers=_fixture_providers(shared, results),
        )
        assert singles.pipeline_runs == 10
        for claim in claims:
            verdict, _, _ = verify_claim(
                claim, doc, budget, _fixture_providers(shared, results)
            )
            assert singles.verdicts[claim.claim_id][0] is verdict
    _report(10, "budgets hold on randomized schedules; G=10 is one pass; G=1 equals per-claim", t)


# -- 11 ---------------------------------------------------------------------


def test_criterion_11_drift_guard_threshold():
    with _Timer() as t:
        history = RoundHistory(
            benchmark_id="b",
            entry_count=944,
            initial_verdicts={},
            calibration_golds={},
            initial_microgold_accuracy=None,
        )
        config = RoundConfig()
        history.accepted_since_calibration = 47
        assert maintenance_check(history, config).action == "continue"
        history.accepted_since_calibration = 48
        assert maintenance_check(history, config).action == "expert_recalibration_required"
    _report(11, "944-entry drift guard fires at the 48th change (5.08%), not the 47th (4.98%)", t)
