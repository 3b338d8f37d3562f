"""Importance/risk-stratified claim sampling, micro-gold injection planning,
and annotator reliability scoring.

Quota allocation floors the proportional shares and tops up by largest
remainder; sparse buckets shed their deficit proportionally to the surplus
capacity of the others.  Within a bucket, claims are drawn without
replacement with per-draw probability w / sum(remaining w), where flagged
claims carry weight rho > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ImpossibleQuota, InsufficientPool, InvalidInput
from .labels import MicroGoldConstruction, RiskTag, VerdictLabel, collapse

IMPORTANCE_LEVELS = (5, 4, 3, 2, 1)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SamplingPlan:
    """Target batch size, per-level proportions, risk multiplier, and seed."""

    N: int
    proportions: Mapping[int, float]
    rho: float
    seed: int

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInput("N must be >= 1")
        if abs(sum(self.proportions.values()) - 1.0) > 1e-9:
            raise InvalidInput("proportions must sum to 1")
        if not self.rho > 1.0:
            raise InvalidInput("rho must be > 1")

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "proportions": {str(k): v for k, v in self.proportions.items()},
            "rho": self.rho,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SamplingPlan":
        return cls(
            N=int(obj["N"]),
            proportions={int(k): float(v) for k, v in obj["proportions"].items()},
            rho=float(obj["rho"]),
            seed=int(obj["seed"]),
        )


def _largest_remainder(
    targets: Mapping[int, float], total: int, caps: Mapping[int, int] | None = None
) -> dict[int, int]:
    """Integer shares of ``total`` proportional to ``targets``.

    Floors each share, then distributes the leftover by largest fractional
    remainder (ties to the higher importance level).  ``caps`` bounds each
    share; capped units are simply not assigned here (the caller re-loops).
    """
    shares = {}
    remainders = []
    assigned = 0
    for level, target in targets.items():
        shares[level] = int(math.floor(target))
        assigned += shares[level]
        remainders.append((-(target - shares[level]), -level))
    leftover = total - assigned
    for neg_rem, neg_level in sorted(remainders):
        if leftover <= 0:
            break
        level = -neg_level
        if caps is not None and shares[level] >= caps.get(level, 0):
            continue
        shares[level] += 1
        leftover -= 1
    return shares


def allocate_quotas(
    N: int,
    proportions: Mapping[int, float],
    available: Mapping[int, int],
) -> dict[int, int]:
    """Per-bucket quotas summing to min(N, total availability).

    Base quotas are floor(N * p_i) topped up by largest remainder so they
    sum to N; quotas above a bucket's availability are capped and the
    deficit is redistributed proportionally to the remaining surplus
    capacity, iterating until no deficit or no capacity remains.
    """
    if N < 1:
        raise InvalidInput("N must be >= 1")
    if any(v < 0 for v in available.values()):
        raise InvalidInput("availability counts must be >= 0")
    levels = list(proportions)
    base = _largest_remainder({lv: N * proportions[lv] for lv in levels}, N)
    quotas = {lv: min(base[lv], available.get(lv, 0)) for lv in levels}
    deficit = N - sum(quotas.values())
    while deficit > 0:
        surplus = {
            lv: available.get(lv, 0) - quotas[lv]
            for lv in levels
            if available.get(lv, 0) > quotas[lv]
        }
        capacity = sum(surplus.values())
        if capacity == 0:
            break
        grant = min(deficit, capacity)
        extras = _largest_remainder(
            {lv: grant * surplus[lv] / capacity for lv in surplus}, grant, caps=surplus
        )
        taken = 0
        for lv, extra in extras.items():
            take = min(extra, surplus[lv])
            quotas[lv] += take
            taken += take
        if taken == 0:  # all shares capped at zero; cannot make progress
            break
        deficit -= taken
    return quotas


def sample_claims(
    buckets: Mapping[int, Sequence[tuple[str, RiskTag]]],
    quotas: Mapping[int, int],
    rho: float,
    seed: int,
) -> list[str]:
    """Risk-weighted sampling without replacement within each bucket.

    Each draw selects item j with probability w_j / sum of remaining weights,
    where w is 1 for evaluator-supported claims and rho for flagged ones.
    Buckets are processed from importance 5 down to 1; output order is draw
    order.  Deterministic given the seed.
    """
    if not rho > 1.0:
        raise InvalidInput("rho must be > 1")
    rng = np.random.default_rng(seed)
    chosen: list[str] = []
    for level in sorted(buckets, reverse=True):
        items = list(buckets[level])
        quota = quotas.get(level, 0)
        if quota > len(items):
            raise ImpossibleQuota(
                f"bucket {level} holds {len(items)} claims, quota is {quota}"
            )
        weights = [
            rho if tag is RiskTag.FLAGGED_BY_EVALUATOR else 1.0 for _, tag in items
        ]
        for _ in range(quota):
            total = sum(weights)
            gas = rng.random() * total
            pick = 0
            acc = weights[0]
            while acc < gas and pick < len(items) - 1:
                pick += 1
                acc += weights[pick]
            chosen.append(items[pick][0])
            del items[pick]
            del weights[pick]
    return chosen


# ---------------------------------------------------------------------------
# Micro-gold injection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InjectionAssignment:
    position: int
    claim_id: str
    is_microgold: bool


@dataclass(frozen=True)
class InjectionPlan:
    """Batch layout mixing real claims with hidden calibration items."""

    batch_size: int
    microgold_share: float
    supported_to_unsupported: tuple[int, int]
    assignments: tuple[InjectionAssignment, ...]

    def microgold_positions(self) -> list[int]:
        return [a.position for a in self.assignments if a.is_microgold]

    def annotator_view(self) -> list[dict]:
        """Redacted, order-preserving view: no hidden flags of any kind."""
        return [
            {"position": a.position, "claim_id": a.claim_id}
            for a in sorted(self.assignments, key=lambda a: a.position)
        ]

    def to_json(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "microgold_share": self.microgold_share,
            "supported_to_unsupported": list(self.supported_to_unsupported),
            "assignments": [
                {
                    "position": a.position,
                    "claim_id": a.claim_id,
                    "is_microgold": a.is_microgold,
                }
                for a in self.assignments
            ],
        }


def _microgold_count(n_real: int, share: float) -> int:
    """Smallest m with m == round_half_up((n_real + m) * share)."""
    if share <= 0:
        return 0
    if share >= 1:
        raise InvalidInput("microgold share must be < 1")
    m = _round_half_up(share * n_real / (1.0 - share))
    for _ in range(4):  # fixed-point iteration; share < 1 contracts
        wanted = _round_half_up((n_real + m) * share)
        if wanted == m:
            return m
        m = wanted
    return m


def _split_by_ratio(m: int, ratio: tuple[int, int]) -> tuple[int, int]:
    """Largest-remainder split of m into (supported, unsupported) counts."""
    s_part, u_part = ratio
    total = s_part + u_part
    if total <= 0:
        raise InvalidInput("ratio parts must sum to a positive number")
    exact_s = m * s_part / total
    exact_u = m * u_part / total
    s, u = int(math.floor(exact_s)), int(math.floor(exact_u))
    leftover = m - s - u
    rem = [(exact_u - u, "u"), (exact_s - s, "s")]  # ties favor unsupported
    for _, which in sorted(rem, reverse=True):
        if leftover <= 0:
            break
        if which == "s":
            s += 1
        else:
            u += 1
        leftover -= 1
    return s, u


def plan_microgold_injection(
    batch: Sequence[str],
    pool: Iterable[tuple[str, MicroGoldConstruction]],
    share: float = 0.25,
    ratio: tuple[int, int] = (1, 4),
    seed: int = 0,
) -> InjectionPlan:
    """Hide calibration claims at seeded-random positions within a batch.

    The batch is padded so micro-golds make up ``share`` of the total, with
    constructions split supported:unsupported per ``ratio`` (largest
    remainder).  Raises InsufficientPool with the missing counts when the
    pool cannot cover the split.
    """
    if not 0 <= share < 1:
        raise InvalidInput("share must be in [0, 1)")
    n_real = len(batch)
    m = _microgold_count(n_real, share)
    need_s, need_u = _split_by_ratio(m, ratio)
    by_kind: dict[MicroGoldConstruction, list[str]] = {
        MicroGoldConstruction.VALIDATED_SUPPORTED: [],
        MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED: [],
    }
    for claim_id, construction in pool:
        by_kind[MicroGoldConstruction(construction)].append(claim_id)
    missing = {}
    if len(by_kind[MicroGoldConstruction.VALIDATED_SUPPORTED]) < need_s:
        missing["supported"] = need_s - len(by_kind[MicroGoldConstruction.VALIDATED_SUPPORTED])
    if len(by_kind[MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED]) < need_u:
        missing["unsupported"] = need_u - len(
            by_kind[MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED]
        )
    if missing:
        raise InsufficientPool(
            f"micro-gold pool short by {missing}", missing=missing
        )
    rng = np.random.default_rng(seed)
    picked_s = [
        by_kind[MicroGoldConstruction.VALIDATED_SUPPORTED][i]
        for i in rng.permutation(len(by_kind[MicroGoldConstruction.VALIDATED_SUPPORTED]))[:need_s]
    ]
    picked_u = [
        by_kind[MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED][i]
        for i in rng.permutation(len(by_kind[MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED]))[:need_u]
    ]
    golds = picked_s + picked_u
    total = n_real + m
    gold_positions = sorted(int(p) for p in rng.permutation(total)[:m])
    gold_at = dict(zip(gold_positions, golds))
    assignments = []
    real_iter = iter(batch)
    for pos in range(total):
        if pos in gold_at:
            assignments.append(InjectionAssignment(pos, gold_at[pos], True))
        else:
            assignments.append(InjectionAssignment(pos, next(real_iter), False))
    return InjectionPlan(
        batch_size=total,
        microgold_share=share,
        supported_to_unsupported=ratio,
        assignments=tuple(assignments),
    )


# ---------------------------------------------------------------------------
# Reliability scoring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionBreakdown:
    n: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.n if self.n else 0.0


@dataclass(frozen=True)
class ReliabilityReport:
    n_items: int
    n_correct: int
    n_missing: int
    accuracy: float
    by_construction: Mapping[str, ConstructionBreakdown]

    def to_json(self) -> dict:
        return {
            "n_items": self.n_items,
            "n_correct": self.n_correct,
            "n_missing": self.n_missing,
            "accuracy": self.accuracy,
            "by_construction": {
                k: {"n": b.n, "correct": b.correct, "accuracy": b.accuracy}
                for k, b in self.by_construction.items()
            },
        }


def score_annotator(
    responses: Mapping[str, VerdictLabel],
    calibration: Mapping[str, VerdictLabel],
    constructions: Mapping[str, MicroGoldConstruction] | None = None,
) -> ReliabilityReport:
    """Accuracy on hidden calibration items under the binary collapse.

    A missing response fails its hidden check and counts incorrect.  When
    ``constructions`` is given, a per-construction-type breakdown is
    included.
    """
    if not calibration:
        raise InvalidInput("calibration set is empty")
    correct = 0
    missing = 0
    by_kind: dict[str, list[bool]] = {}
    for claim_id, gold in calibration.items():
        response = responses.get(claim_id)
        if response is None:
            missing += 1
            hit = False
        else:
            got = collapse(response)
            hit = got is not None and got == collapse(gold)
        correct += hit
        if constructions and claim_id in constructions:
            by_kind.setdefault(constructions[claim_id].value, []).append(hit)
    return ReliabilityReport(
        n_items=len(calibration),
        n_correct=correct,
        n_missing=missing,
        accuracy=correct / len(calibration),
        by_construction={
            kind: ConstructionBreakdown(len(hits), sum(hits))
            for kind, hits in by_kind.items()
        },
    )
