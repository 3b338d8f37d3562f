"""Command-line interface.

Maintainer tooling for the benchmark lifecycle: ingest reports, seed a
benchmark, sample claims, plan micro-gold injection, run and replay audit
rounds, score predictions, estimate costs, render report figures, and serve
the HTTP API the audit console consumes.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import AuditBenchError
from .labels import ABSTAIN, MicroGoldConstruction, RiskTag, parse_verdict
from .metrics import (
    FORCED_INCORRECT,
    PriceTable,
    TokenLedger,
    compute_metrics,
    cost_estimate,
    paired_cluster_bootstrap,
)
from .pipeline import PipelineBudget, verify_group
from .protocol import (
    AcceptAllAuditor,
    OracleAuditor,
    RejectAllAuditor,
    RoundConfig,
    RoundEngine,
    RoundHistory,
    ScriptedAuditor,
    StoppingCriteria,
    maintenance_check,
    replay_counterfactual,
)
from .providers import load_fixture_providers
from .sampling import (
    SamplingPlan,
    allocate_quotas,
    plan_microgold_injection,
    sample_claims,
    score_annotator,
)
from .store import BenchmarkStore, ClaimRecord, MicroGold, Rationale, ReportDocument


def _read_json(path: str | Path):
    return json.loads(Path(path).read_text("utf-8"))


def _read_jsonl(path: str | Path):
    return [
        json.loads(line)
        for line in Path(path).read_text("utf-8").splitlines()
        if line.strip()
    ]


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1, ensure_ascii=False, default=str)
    if out:
        Path(out).write_text(text + "\n", "utf-8")
    else:
        click.echo(text)


def _bench_dir(data_dir: str, benchmark: str) -> Path:
    return Path(data_dir) / "benchmarks" / benchmark


def _load_bench(data_dir: str, benchmark: str) -> tuple[BenchmarkStore, RoundHistory]:
    bench_dir = _bench_dir(data_dir, benchmark)
    store = BenchmarkStore.load(bench_dir)
    history_path = bench_dir / "history.json"
    history = (
        RoundHistory.load(history_path)
        if history_path.exists()
        else RoundHistory.from_store(store)
    )
    return store, history


def _save_bench(data_dir: str, store: BenchmarkStore, history: RoundHistory) -> None:
    bench_dir = _bench_dir(data_dir, store.benchmark_id)
    bench_dir.mkdir(parents=True, exist_ok=True)
    store.save(bench_dir)
    history.save(bench_dir / "history.json")


@click.group()
def main():
    """Evolving claim-factuality benchmark engine."""


# ---------------------------------------------------------------------------
# Store commands
# ---------------------------------------------------------------------------


@main.command()
@click.option("--body-file", required=True, type=click.Path(exists=True))
@click.option("--report-id", required=True)
@click.option("--domain", default="")
@click.option("--out", default=None, help="Write the report JSON here instead of stdout.")
def ingest(body_file, report_id, domain, out):
    """Segment a report body into sentence spans."""
    store = BenchmarkStore()
    doc = store.ingest_report(Path(body_file).read_text("utf-8"), report_id, domain)
    _emit(doc.to_json(), out)


@main.group()
def bench():
    """Benchmark lifecycle."""


@bench.command("init")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--benchmark", default="bench")
@click.option("--reports", multiple=True, type=click.Path(exists=True),
              help="Report JSON files (from `ingest`).")
@click.option("--seed-file", required=True, type=click.Path(exists=True),
              help="JSONL: {claim: {...}, verdict, rationale: {...}} per line.")
def bench_init(data_dir, benchmark, reports, seed_file):
    """Create version 0 from seed annotations."""
    store = BenchmarkStore(benchmark_id=benchmark)
    for path in reports:
        store.add_report(ReportDocument.from_json(_read_json(path)))
    entries = []
    for row in _read_jsonl(seed_file):
        claim = ClaimRecord.from_json(row["claim"])
        entries.append(
            (claim, parse_verdict(row["verdict"]), Rationale.from_json(row["rationale"]))
        )
    version = store.init_benchmark(entries)
    history = RoundHistory.from_store(store)
    _save_bench(data_dir, store, history)
    click.echo(
        json.dumps(
            {
                "benchmark_id": benchmark,
                "version": version.version,
                "entries": len(version.entries),
                "snapshot_digest": version.snapshot_digest,
            }
        )
    )


@bench.command("show")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--benchmark", default="bench")
@click.option("--version", "version_no", default=-1, type=int)
@click.option("--snapshot-out", default=None, type=click.Path())
def bench_show(data_dir, benchmark, version_no, snapshot_out):
    """Print a version summary; optionally export its snapshot file."""
    store, history = _load_bench(data_dir, benchmark)
    version = store.version(version_no if version_no >= 0 else store.head().version)
    if snapshot_out:
        store.write_snapshot(version, snapshot_out)
    click.echo(
        json.dumps(
            {
                "benchmark_id": benchmark,
                "version": version.version,
                "entries": len(version.entries),
                "snapshot_digest": version.snapshot_digest,
                "changelog_records": len(store.changelog),
                "rounds": len(history.rounds),
            }
        )
    )


# ---------------------------------------------------------------------------
# Sampling commands
# ---------------------------------------------------------------------------


@main.command()
@click.option("--plan", "plan_file", required=True, type=click.Path(exists=True))
@click.option("--claims", "claims_file", required=True, type=click.Path(exists=True),
              help="JSONL: {claim_id, importance, risk_tag} per line.")
@click.option("--seed", default=None, type=int, help="Overrides the plan's seed.")
@click.option("--out", default=None)
def sample(plan_file, claims_file, seed, out):
    """Importance/risk-stratified sampling without replacement."""
    plan = SamplingPlan.from_json(_read_json(plan_file))
    buckets: dict[int, list] = {level: [] for level in plan.proportions}
    for row in _read_jsonl(claims_file):
        level = int(row["importance"])
        buckets.setdefault(level, []).append((row["claim_id"], RiskTag(row["risk_tag"])))
    available = {level: len(items) for level, items in buckets.items()}
    quotas = allocate_quotas(plan.N, plan.proportions, available)
    chosen = sample_claims(
        buckets, quotas, plan.rho, plan.seed if seed is None else seed
    )
    _emit({"quotas": {str(k): v for k, v in quotas.items()}, "selected": chosen}, out)


@main.command()
@click.option("--batch", "batch_file", required=True, type=click.Path(exists=True),
              help="JSON list of real claim ids.")
@click.option("--pool", "pool_file", required=True, type=click.Path(exists=True),
              help="JSONL: {claim_id, construction} per line.")
@click.option("--share", default=0.25, type=float)
@click.option("--ratio", default="1:4", help="supported:unsupported integer ratio")
@click.option("--seed", default=0, type=int)
@click.option("--out", default=None, help="Full plan (maintainer-facing).")
@click.option("--annotator-out", default=None, help="Redacted annotator-facing batch.")
def inject(batch_file, pool_file, share, ratio, seed, out, annotator_out):
    """Plan hidden micro-gold injection into an annotation batch."""
    batch = _read_json(batch_file)
    pool = [
        (row["claim_id"], MicroGoldConstruction(row["construction"]))
        for row in _read_jsonl(pool_file)
    ]
    s_part, _, u_part = ratio.partition(":")
    plan = plan_microgold_injection(
        batch, pool, share=share, ratio=(int(s_part), int(u_part)), seed=seed
    )
    _emit(plan.to_json(), out)
    if annotator_out:
        Path(annotator_out).write_text(
            json.dumps(plan.annotator_view(), indent=1) + "\n", "utf-8"
        )


@main.command()
@click.option("--responses", "responses_file", required=True, type=click.Path(exists=True))
@click.option("--calibration", "calibration_file", required=True, type=click.Path(exists=True),
              help="JSON: claim_id -> gold verdict, or claim_id -> {gold_label, construction}.")
@click.option("--out", default=None)
def reliability(responses_file, calibration_file, out):
    """Score an annotator against hidden calibration claims."""
    responses = {k: parse_verdict(v) for k, v in _read_json(responses_file).items()}
    raw = _read_json(calibration_file)
    calibration = {}
    constructions = {}
    for claim_id, value in raw.items():
        if isinstance(value, dict):
            calibration[claim_id] = parse_verdict(value["gold_label"])
            if value.get("construction"):
                constructions[claim_id] = MicroGoldConstruction(value["construction"])
        else:
            calibration[claim_id] = parse_verdict(value)
    report = score_annotator(responses, calibration, constructions or None)
    _emit(report.to_json(), out)


# ---------------------------------------------------------------------------
# Rounds
# ---------------------------------------------------------------------------


def _build_auditor(spec: dict, store: BenchmarkStore):
    kind = spec.get("kind", "accept_all")
    if kind == "accept_all":
        return AcceptAllAuditor(actor_id=spec.get("actor_id", "accept-all"))
    if kind == "reject_all":
        return RejectAllAuditor(actor_id=spec.get("actor_id", "reject-all"))
    if kind == "oracle":
        return OracleAuditor(store.calibration, actor_id=spec.get("actor_id", "oracle"))
    if kind == "scripted":
        return ScriptedAuditor(
            dict(spec.get("decisions", {})),
            actor_id=spec.get("actor_id", "scripted"),
            default=spec.get("default", "REJECT"),
        )
    raise click.UsageError(f"unknown auditor kind {kind!r}")


@main.group("round")
def round_group():
    """Run or replay audit rounds."""


@round_group.command("run")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--benchmark", default="bench")
@click.option("--challenger", "challenger_file", required=True, type=click.Path(exists=True),
              help="Challenger spec JSON (kind: echo | flip_all | scripted | pipeline).")
@click.option("--audit-fraction", default=1.0, type=float)
@click.option("--strict", is_flag=True, default=False)
@click.option("--seed", default=0, type=int)
@click.option("--auditor", "auditor_json", default='{"kind": "accept_all"}',
              help="Auditor spec JSON string or @file.")
@click.option("--agent-auditor", "agent_json", default=None,
              help="Second (agent) auditor spec for --strict.")
@click.option("--report-out", default=None)
def round_run(data_dir, benchmark, challenger_file, audit_fraction, strict, seed,
              auditor_json, agent_json, report_out):
    """Run one complete round: evaluate, audit, evolve, score."""
    from .service import build_challenger

    store, history = _load_bench(data_dir, benchmark)
    engine = RoundEngine(store)
    engine.history = history
    spec = _read_json(challenger_file)
    if spec.get("kind") == "pipeline":
        from .pipeline import PipelineChallenger

        providers = load_fixture_providers(spec["providers"])
        budget = PipelineBudget.from_json(spec.get("budget", {}))
        challenger = PipelineChallenger(providers, budget, actor_id=spec.get("actor_id", "pipeline"))
    else:
        challenger = build_challenger(spec, store)

    def parse_spec(text):
        return _read_json(text[1:]) if text.startswith("@") else json.loads(text)

    auditors = [_build_auditor(parse_spec(auditor_json), store)]
    if agent_json:
        auditors.append(_build_auditor(parse_spec(agent_json), store))
    config = RoundConfig(audit_fraction=audit_fraction, strict_mode=strict, seed=seed)
    version, report = engine.run_round(challenger, auditors, config)
    _save_bench(data_dir, store, engine.history)
    payload = report.to_json()
    payload["snapshot_digest"] = version.snapshot_digest
    _emit(payload, report_out)


@round_group.command("replay")
@click.option("--history", "history_file", required=True, type=click.Path(exists=True))
@click.option("--p", "fraction", required=True, type=float)
@click.option("--seed", default=0, type=int)
@click.option("--seeds", "n_seeds", default=1, type=int,
              help="Average the trajectory over this many seeds.")
@click.option("--out", default=None)
def round_replay(history_file, fraction, seed, n_seeds, out):
    """Counterfactually replay a recorded history at audit fraction p."""
    history = RoundHistory.load(history_file)
    trajectories = [
        replay_counterfactual(history, fraction, seed + i) for i in range(n_seeds)
    ]
    mean = [sum(col) / len(col) for col in zip(*trajectories)]
    _emit(
        {
            "p": fraction,
            "seeds": n_seeds,
            "mean_trajectory": mean,
            "recorded_trajectory": history.microgold_trajectory(),
        },
        out,
    )


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--benchmark", default="bench")
@click.option("--respond-to", type=click.Choice(["maintenance"]), default=None,
              help="Only recalibrate when the drift guard demands it.")
@click.option("--max-rounds", default=None, type=int)
@click.option("--microgold-target", default=None, type=float)
@click.option("--audit-budget", default=None, type=int)
def calibrate(data_dir, benchmark, respond_to, max_rounds, microgold_target, audit_budget):
    """Record an expert recalibration, resetting the drift counter."""
    store, history = _load_bench(data_dir, benchmark)
    config = RoundConfig(
        stopping=StoppingCriteria(
            max_rounds=max_rounds,
            microgold_target=microgold_target,
            audit_budget=audit_budget,
        )
    )
    decision = maintenance_check(history, config)
    if respond_to == "maintenance" and decision.action != "expert_recalibration_required":
        click.echo(json.dumps({"calibrated": False, "maintenance": decision.to_json()}))
        return
    history.mark_expert_calibration(store.head().version)
    _save_bench(data_dir, store, history)
    click.echo(json.dumps({"calibrated": True, "at_version": store.head().version,
                           "maintenance": decision.to_json()}))


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--benchmark", default="bench")
@click.option("--max-rounds", default=None, type=int)
@click.option("--microgold-target", default=None, type=float)
@click.option("--audit-budget", default=None, type=int)
def maintenance(data_dir, benchmark, max_rounds, microgold_target, audit_budget):
    """Evaluate the drift guard and stopping criteria."""
    _, history = _load_bench(data_dir, benchmark)
    config = RoundConfig(
        stopping=StoppingCriteria(
            max_rounds=max_rounds,
            microgold_target=microgold_target,
            audit_budget=audit_budget,
        )
    )
    click.echo(json.dumps(maintenance_check(history, config).to_json()))


# ---------------------------------------------------------------------------
# Scoring / statistics
# ---------------------------------------------------------------------------


@main.command()
@click.option("--predictions", "predictions_file", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_file", required=True, type=click.Path(exists=True))
@click.option("--out", default=None)
def score(predictions_file, gold_file, out):
    """Binary-collapse metrics of predictions against gold verdicts."""
    from .labels import collapse

    raw_preds = _read_json(predictions_file)
    raw_gold = _read_json(gold_file)
    gold = {}
    for claim_id, verdict in raw_gold.items():
        binary = collapse(parse_verdict(verdict))
        if binary is not None:  # NoneVerifiable gold is excluded from scoring
            gold[claim_id] = binary
    preds = {}
    for claim_id in gold:
        raw = raw_preds.get(claim_id, ABSTAIN)
        if raw == ABSTAIN:
            preds[claim_id] = FORCED_INCORRECT
        else:
            binary = collapse(parse_verdict(raw))
            preds[claim_id] = binary if binary is not None else FORCED_INCORRECT
    _emit(compute_metrics(preds, gold).to_json(), out)


@main.command()
@click.option("--correct-a", "a_file", required=True, type=click.Path(exists=True),
              help="JSON: report_id -> {claim_id: bool}.")
@click.option("--correct-b", "b_file", required=True, type=click.Path(exists=True))
@click.option("--replicates", default=20_000, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--workers", default=1, type=int)
@click.option("--out", default=None)
@click.option("--figures-dir", default=None, help="Also render histogram + CSV here.")
def bootstrap(a_file, b_file, replicates, seed, workers, out, figures_dir):
    """Report-level paired cluster bootstrap of accuracy(A) - accuracy(B)."""
    corr_a = _read_json(a_file)
    corr_b = _read_json(b_file)
    result, diffs = paired_cluster_bootstrap(
        corr_a, corr_b, replicates=replicates, seed=seed, workers=workers, return_diffs=True
    )
    payload = result.to_json()
    if figures_dir:
        from .figures import render_bootstrap

        paths = render_bootstrap(diffs, result, figures_dir)
        payload["figures"] = {k: str(v) for k, v in paths.items()}
    _emit(payload, out)


@main.command()
@click.option("--ledger", "ledger_file", required=True, type=click.Path(exists=True))
@click.option("--prices", "prices_file", required=True, type=click.Path(exists=True))
@click.option("--normalize-to", required=True)
@click.option("--claims", "n_claims", default=1, type=int)
@click.option("--out", default=None)
def cost(ledger_file, prices_file, normalize_to, n_claims, out):
    """Estimate USD cost per claim for a token ledger."""
    ledger = TokenLedger.from_json(_read_json(ledger_file))
    prices = PriceTable(_read_json(prices_file))
    _emit(cost_estimate(ledger, prices, normalize_to, n_claims).to_json(), out)


# ---------------------------------------------------------------------------
# Verification pipeline
# ---------------------------------------------------------------------------


@main.command()
@click.option("--claims", "claims_file", required=True, type=click.Path(exists=True),
              help="JSONL of claim records.")
@click.option("--report", "report_file", required=True, type=click.Path(exists=True))
@click.option("--group", "group_size", default=1, type=int)
@click.option("--budget", "budget_file", default=None, type=click.Path(exists=True))
@click.option("--providers", "providers_file", required=True, type=click.Path(exists=True),
              help="Fixture script JSON.")
@click.option("--out", default=None)
@click.option("--traces-out", default=None)
def verify(claims_file, report_file, group_size, budget_file, providers_file, out, traces_out):
    """Run the verification pipeline over claims from one report."""
    report = ReportDocument.from_json(_read_json(report_file))
    claims = [ClaimRecord.from_json(row) for row in _read_jsonl(claims_file)]
    budget = PipelineBudget.from_json(_read_json(budget_file)) if budget_file else PipelineBudget()
    providers = load_fixture_providers(providers_file)
    result = verify_group(claims, report, group_size, budget, providers)
    rows = [
        {
            "claim_id": claim_id,
            "verdict": verdict.value,
            "rationale_text": rationale.text,
            "evidence_refs": list(rationale.evidence_refs),
        }
        for claim_id, (verdict, rationale) in result.verdicts.items()
    ]
    _emit({"results": rows, "pipeline_runs": result.pipeline_runs}, out)
    if traces_out:
        with Path(traces_out).open("w", encoding="utf-8") as fh:
            for trace in result.traces:
                fh.write(json.dumps(trace.to_json(), ensure_ascii=False))
                fh.write("\n")


# ---------------------------------------------------------------------------
# Reports and service
# ---------------------------------------------------------------------------


@main.command()
@click.option("--history", "history_file", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--replay-fractions", default="0.25,0.5,0.75,1.0")
@click.option("--replay-seeds", default=200, type=int)
@click.option("--seed", default=0, type=int)
def report(history_file, out_dir, replay_fractions, replay_seeds, seed):
    """Render trajectory and replay figures plus CSVs from a round history."""
    from .figures import render_replay, render_trajectory

    history = RoundHistory.load(history_file)
    paths = render_trajectory(history, out_dir)
    fractions = tuple(float(x) for x in replay_fractions.split(",") if x)
    if history.rounds and history.calibration_golds:
        replay_paths = render_replay(
            history, out_dir, fractions=fractions, n_seeds=replay_seeds, seed=seed
        )
        paths.update({f"replay_{k}": v for k, v in replay_paths.items()})
    click.echo(json.dumps({k: str(v) for k, v in paths.items()}))


@main.command("seed-demo")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--claims", "n_claims", default=8, type=int)
@click.option("--benchmark", default="demo")
@click.option("--token-file", default=None, type=click.Path(exists=True),
              help="Use these tokens instead of generating fresh ones.")
def seed_demo_cmd(data_dir, n_claims, benchmark, token_file):
    """Seed a small demo benchmark plus auth tokens."""
    from .service import seed_demo

    tokens = _read_json(token_file) if token_file else None
    summary = seed_demo(data_dir, benchmark_id=benchmark, n_claims=n_claims, tokens=tokens)
    click.echo(json.dumps(summary, indent=1))


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8470, type=int)
@click.option("--token-file", default=None, type=click.Path(exists=True),
              help="Defaults to <data-dir>/tokens.json.")
@click.option("--price-table", default=None, type=click.Path(exists=True),
              help="Expose this price table at GET /prices.")
def serve(data_dir, host, port, token_file, price_table):
    """Serve the HTTP API for the audit console and CLI clients."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, token_file=token_file, price_table_path=price_table)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def run():
    try:
        main(standalone_mode=True)
    except AuditBenchError as exc:
        click.echo(json.dumps({"code": exc.code, "message": exc.message}), err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
