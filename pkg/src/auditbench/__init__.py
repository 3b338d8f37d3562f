"""auditbench: an engine for evolving claim-level factuality benchmarks.

Maintains a versioned consensus of claim verdicts with an auditable
changelog, runs challenger/auditor rounds that revise it, calibrates
quality against hidden known-answer claims, and scores verifiers against
the post-revision consensus.
"""

from .labels import (
    ABSTAIN,
    AuditorKind,
    BinaryLabel,
    Confidence,
    ErrorCode,
    MicroGoldConstruction,
    RiskTag,
    VerdictLabel,
    collapse,
)
from .metrics import (
    FlowTable,
    LabelScheme,
    PriceTable,
    TokenLedger,
    aggregate_sentence,
    compute_metrics,
    cost_estimate,
    flow_marginals,
    map_and_collapse,
    paired_cluster_bootstrap,
)
from .pipeline import (
    PipelineBudget,
    PipelineChallenger,
    VerificationTrace,
    extract_context,
    verify_claim,
    verify_group,
)
from .protocol import (
    AuditDecision,
    Proposal,
    RoundConfig,
    RoundEngine,
    RoundHistory,
    RoundReport,
    adjudicate,
    evolve_and_score,
    maintenance_check,
    replay_counterfactual,
    run_evaluation,
    select_disputes,
)
from .providers import Providers, load_fixture_providers
from .sampling import (
    InjectionPlan,
    SamplingPlan,
    allocate_quotas,
    plan_microgold_injection,
    sample_claims,
    score_annotator,
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

__version__ = "0.1.0"
