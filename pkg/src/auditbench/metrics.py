"""Scoring metrics and statistics.

Covers sentence-level verdict aggregation, mapping of external labeling
schemes into the binary scoring space, accuracy/precision/recall/F1,
report-level paired cluster bootstrap, human-agent decision-flow marginals,
and token-cost estimation.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInput, InvalidLabel, MissingPrice, TooFewClusters
from .labels import BinaryLabel, VerdictLabel, collapse


class SpecialOutcome(enum.Enum):
    """Non-binary scoring outcomes."""

    #: Scored as an incorrect prediction regardless of the gold label.
    FORCED_INCORRECT = "ForcedIncorrect"
    #: Not scored at all (non-verifiable gold).
    EXCLUDED = "Excluded"


FORCED_INCORRECT = SpecialOutcome.FORCED_INCORRECT
EXCLUDED = SpecialOutcome.EXCLUDED


class LabelScheme(str, enum.Enum):
    CANONICAL = "Canonical"
    FIRE_OR_FACTCHECKGPT = "FireOrFactcheckGPT"
    SAFE = "Safe"


# ---------------------------------------------------------------------------
# Label algebra
# ---------------------------------------------------------------------------


def aggregate_sentence(atomic: Sequence[VerdictLabel]) -> VerdictLabel:
    """Aggregate atomic-claim verdicts into one sentence verdict.

    Any Contradictory dominates; otherwise any Inconclusive; otherwise any
    Supported; a sentence with no verifiable atomic content (or no atomics
    at all) is NoneVerifiable.
    """
    labels = set(atomic)
    if VerdictLabel.CONTRADICTORY in labels:
        return VerdictLabel.CONTRADICTORY
    if VerdictLabel.INCONCLUSIVE in labels:
        return VerdictLabel.INCONCLUSIVE
    if VerdictLabel.SUPPORTED in labels:
        return VerdictLabel.SUPPORTED
    return VerdictLabel.NONE_VERIFIABLE


_FIRE_MAP = {
    "true": VerdictLabel.SUPPORTED,
    "not-enough-evidence": VerdictLabel.INCONCLUSIVE,
    "false": VerdictLabel.CONTRADICTORY,
}

_SAFE_ATOMIC = {"supported", "not supported", "irrelevant"}


def map_and_collapse(scheme: LabelScheme, label) -> BinaryLabel | SpecialOutcome:
    """Map an external scheme's label(s) into the binary scoring space.

    Canonical takes a VerdictLabel; FIRE/FactCheck-GPT take one atomic string
    from {true, not-enough-evidence, false}; SAFE takes the sentence's list of
    atomic labels from {supported, not supported, irrelevant}.
    """
    if scheme is LabelScheme.CANONICAL:
        if isinstance(label, (BinaryLabel, SpecialOutcome)):
            return label  # already collapsed: idempotent
        if label is None:
            return EXCLUDED
        if not isinstance(label, VerdictLabel):
            raise InvalidLabel(f"Canonical scheme expects a VerdictLabel, got {label!r}")
        binary = collapse(label)
        return binary if binary is not None else EXCLUDED

    if scheme is LabelScheme.FIRE_OR_FACTCHECKGPT:
        mapped = _FIRE_MAP.get(str(label))
        if mapped is None:
            raise InvalidLabel(f"unknown FIRE/FactCheck-GPT label: {label!r}")
        binary = collapse(mapped)
        assert binary is not None
        return binary

    if scheme is LabelScheme.SAFE:
        atomics = [str(a) for a in label]
        for a in atomics:
            if a not in _SAFE_ATOMIC:
                raise InvalidLabel(f"unknown SAFE atomic label: {a!r}")
        if atomics and all(a == "irrelevant" for a in atomics):
            return FORCED_INCORRECT
        if any(a == "not supported" for a in atomics):
            return BinaryLabel.UNSUPPORTED
        if any(a == "supported" for a in atomics):
            return BinaryLabel.SUPPORTED
        return FORCED_INCORRECT  # empty atomic list carries no prediction

    raise InvalidLabel(f"unknown scheme: {scheme!r}")


# ---------------------------------------------------------------------------
# Classification metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricsResult:
    accuracy: float
    precision: float
    recall: float
    f1: float
    n: int

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n": self.n,
        }


def compute_metrics(
    predictions: Mapping[str, BinaryLabel | SpecialOutcome],
    gold: Mapping[str, BinaryLabel],
) -> MetricsResult:
    """Accuracy plus precision/recall/F1 for the Supported class.

    A ForcedIncorrect prediction never matches and never counts as a
    predicted Supported.  Degenerate denominators yield 0.
    """
    if set(predictions) != set(gold):
        raise InvalidInput("prediction and gold key sets differ")
    if not gold:
        raise InvalidInput("no claims to score")
    matches = 0
    tp = fp = fn = 0
    for claim_id, g in gold.items():
        p = predictions[claim_id]
        if p == g:
            matches += 1
        if p is BinaryLabel.SUPPORTED:
            if g is BinaryLabel.SUPPORTED:
                tp += 1
            else:
                fp += 1
        elif g is BinaryLabel.SUPPORTED:
            fn += 1
    n = len(gold)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsResult(matches / n, precision, recall, f1, n)


# ---------------------------------------------------------------------------
# Paired cluster bootstrap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapResult:
    mean_diff: float
    ci95_low: float
    ci95_high: float
    replicates: int
    significant: bool

    def to_json(self) -> dict:
        return {
            "mean_diff": self.mean_diff,
            "ci95_low": self.ci95_low,
            "ci95_high": self.ci95_high,
            "replicates": self.replicates,
            "significant": self.significant,
        }


def _nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    rank = max(1, math.ceil(q * len(sorted_values)))
    return float(sorted_values[rank - 1])


def paired_cluster_bootstrap(
    correctness_a: Mapping[str, Mapping[str, bool]],
    correctness_b: Mapping[str, Mapping[str, bool]],
    replicates: int = 20_000,
    seed: int = 0,
    workers: int = 1,
    return_diffs: bool = False,
):
    """Report-level paired cluster bootstrap of the accuracy difference A-B.

    Inputs map report_id -> claim_id -> correctness, and must cover identical
    claims.  Each replicate resamples reports with replacement, pools their
    claims with multiplicity, and records the micro-accuracy difference on
    the identical resample.  The CI is the empirical 2.5/97.5 percentile
    (nearest rank).  Each replicate draws from its own seed stream, so the
    result is bit-identical at any ``workers`` level.
    """
    if set(correctness_a) != set(correctness_b):
        raise InvalidInput("methods cover different report sets")
    report_ids = sorted(correctness_a)
    if len(report_ids) < 2:
        raise TooFewClusters("paired cluster bootstrap needs at least 2 reports")
    if replicates < 1:
        raise InvalidInput("replicates must be >= 1")
    correct_a = np.empty(len(report_ids), dtype=np.float64)
    correct_b = np.empty(len(report_ids), dtype=np.float64)
    counts = np.empty(len(report_ids), dtype=np.float64)
    for i, rid in enumerate(report_ids):
        claims_a, claims_b = correctness_a[rid], correctness_b[rid]
        if set(claims_a) != set(claims_b):
            raise InvalidInput(f"report {rid!r}: methods cover different claims")
        if not claims_a:
            raise InvalidInput(f"report {rid!r} has no claims")
        correct_a[i] = sum(bool(v) for v in claims_a.values())
        correct_b[i] = sum(bool(v) for v in claims_b.values())
        counts[i] = len(claims_a)

    n_reports = len(report_ids)
    children = np.random.SeedSequence(seed).spawn(replicates)
    diffs = np.empty(replicates, dtype=np.float64)

    def run_range(lo: int, hi: int) -> None:
        for r in range(lo, hi):
            rng = np.random.Generator(np.random.PCG64(children[r]))
            idx = rng.integers(0, n_reports, size=n_reports)
            total = counts[idx].sum()
            diffs[r] = (correct_a[idx].sum() - correct_b[idx].sum()) / total

    if workers <= 1:
        run_range(0, replicates)
    else:
        chunk = math.ceil(replicates / workers)
        bounds = [(i, min(i + chunk, replicates)) for i in range(0, replicates, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: run_range(*b), bounds))

    ordered = np.sort(diffs)
    low = _nearest_rank(ordered, 0.025)
    high = _nearest_rank(ordered, 0.975)
    result = BootstrapResult(
        mean_diff=float(diffs.mean()),
        ci95_low=low,
        ci95_high=high,
        replicates=replicates,
        significant=bool(low > 0.0 or high < 0.0),
    )
    if return_diffs:
        return result, diffs
    return result


# ---------------------------------------------------------------------------
# Decision-flow marginals
# ---------------------------------------------------------------------------

FlowKey = tuple[int, int, int]  # (H, A, H') correctness bits

_ALL_FLOWS: tuple[FlowKey, ...] = tuple(
    (h, a, hp) for h in (0, 1) for a in (0, 1) for hp in (0, 1)
)


@dataclass(frozen=True)
class FlowTable:
    """Proportions of the eight (H, A, H') correctness transitions."""

    proportions: Mapping[FlowKey, float]

    def __post_init__(self):
        for key in self.proportions:
            if key not in _ALL_FLOWS:
                raise InvalidInput(f"invalid flow key {key!r}")
        if any(v < 0 for v in self.proportions.values()):
            raise InvalidInput("flow proportions must be non-negative")

    @classmethod
    def from_percentages(cls, table: Mapping[FlowKey, float]) -> "FlowTable":
        return cls({k: v / 100.0 for k, v in table.items()})

    def total(self) -> float:
        return sum(self.proportions.values())


def flow_marginals(table: FlowTable, tol: float = 1e-6) -> dict[str, float]:
    """Marginal accuracies implied by a decision-flow table.

    ``tol`` bounds the allowed deviation of the proportion sum from 1;
    published tables rounded to 0.1% need a looser tolerance than the exact
    default.
    """
    total = table.total()
    if abs(total - 1.0) > tol:
        raise InvalidInput(f"flow proportions sum to {total}, not 1 (tol {tol})")
    get = lambda h, a, hp: table.proportions.get((h, a, hp), 0.0)
    return {
        "acc_H": sum(get(1, a, hp) for a in (0, 1) for hp in (0, 1)),
        "acc_A": sum(get(h, 1, hp) for h in (0, 1) for hp in (0, 1)),
        "acc_Hprime": sum(get(h, a, 1) for h in (0, 1) for a in (0, 1)),
    }


# ---------------------------------------------------------------------------
# Token cost estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelPrice:
    input_usd_per_million: Decimal
    output_usd_per_million: Decimal

    def __post_init__(self):
        if self.input_usd_per_million <= 0 or self.output_usd_per_million <= 0:
            raise InvalidInput("prices must be positive")


class PriceTable:
    """Per-model token prices in USD per million tokens."""

    def __init__(self, prices: Mapping[str, Mapping[str, float | str]]):
        self.models: dict[str, ModelPrice] = {}
        for model, spec in prices.items():
            self.models[model] = ModelPrice(
                input_usd_per_million=Decimal(str(spec["input_usd_per_million"])),
                output_usd_per_million=Decimal(str(spec["output_usd_per_million"])),
            )

    def price(self, model: str) -> ModelPrice:
        try:
            return self.models[model]
        except KeyError:
            raise MissingPrice(f"no price for model {model!r}") from None

    def to_json(self) -> dict:
        return {
            m: {
                "input_usd_per_million": float(p.input_usd_per_million),
                "output_usd_per_million": float(p.output_usd_per_million),
            }
            for m, p in self.models.items()
        }


@dataclass(frozen=True)
class TokenRecord:
    model: str
    input_tokens: int
    output_tokens: int
    stage: str = ""


@dataclass
class TokenLedger:
    """Append-only token usage records with per-model totals."""

    records: list[TokenRecord] = field(default_factory=list)

    def add(self, model: str, input_tokens: int, output_tokens: int, stage: str = "") -> None:
        if input_tokens < 0 or output_tokens < 0:
            raise InvalidInput("token counts must be non-negative")
        self.records.append(TokenRecord(model, input_tokens, output_tokens, stage))

    def merge(self, other: "TokenLedger") -> None:
        self.records.extend(other.records)

    def totals(self) -> dict[str, tuple[int, int]]:
        out: dict[str, tuple[int, int]] = {}
        for rec in self.records:
            i, o = out.get(rec.model, (0, 0))
            out[rec.model] = (i + rec.input_tokens, o + rec.output_tokens)
        return out

    def to_json(self) -> dict:
        return {
            "records": [
                {
                    "model": r.model,
                    "input_tokens": r.input_tokens,
                    "output_tokens": r.output_tokens,
                    "stage": r.stage,
                }
                for r in self.records
            ],
            "totals": {m: {"input": i, "output": o} for m, (i, o) in self.totals().items()},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "TokenLedger":
        ledger = cls()
        for r in obj.get("records", []):
            ledger.add(r["model"], r["input_tokens"], r["output_tokens"], r.get("stage", ""))
        return ledger


@dataclass(frozen=True)
class CostEstimate:
    usd_total: Decimal
    usd_per_claim: Decimal
    normalized_input_tokens: float
    normalized_output_tokens: float

    def per_claim_display(self) -> str:
        """Dollar figure rounded half-up to cents (display only)."""
        return str(self.usd_per_claim.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))

    def to_json(self) -> dict:
        return {
            "usd_total": float(self.usd_total),
            "usd_per_claim": float(self.usd_per_claim),
            "usd_per_claim_display": self.per_claim_display(),
            "normalized_input_tokens": self.normalized_input_tokens,
            "normalized_output_tokens": self.normalized_output_tokens,
        }


_MILLION = Decimal(1_000_000)


def cost_estimate(
    ledger: TokenLedger,
    prices: PriceTable,
    normalize_to: str,
    n_claims: int = 1,
) -> CostEstimate:
    """USD cost of a ledger, reported per claim.

    Auxiliary-model tokens are converted into ``normalize_to`` equivalents by
    price ratio for the normalized token totals; the conversion is exactly
    cost-neutral, so dollars are the plain sum of per-model token prices.
    Internal arithmetic is exact decimal over micro-dollars.
    """
    if n_claims < 1:
        raise InvalidInput("n_claims must be >= 1")
    base = prices.price(normalize_to)
    total = Decimal(0)
    norm_in = Decimal(0)
    norm_out = Decimal(0)
    for model, (in_tokens, out_tokens) in ledger.totals().items():
        p = prices.price(model)
        total += (Decimal(in_tokens) * p.input_usd_per_million) / _MILLION
        total += (Decimal(out_tokens) * p.output_usd_per_million) / _MILLION
        norm_in += Decimal(in_tokens) * p.input_usd_per_million / base.input_usd_per_million
        norm_out += Decimal(out_tokens) * p.output_usd_per_million / base.output_usd_per_million
    return CostEstimate(
        usd_total=total,
        usd_per_claim=total / Decimal(n_claims),
        normalized_input_tokens=float(norm_in),
        normalized_output_tokens=float(norm_out),
    )
