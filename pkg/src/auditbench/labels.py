"""Label algebra: the four-way verdict space, its binary collapse, and the
error-code taxonomy attached to unsupported claims."""

from __future__ import annotations

import enum

from .errors import InvalidLabel


class VerdictLabel(str, enum.Enum):
    """Claim-level factuality verdict."""

    SUPPORTED = "Supported"
    INCONCLUSIVE = "Inconclusive"
    CONTRADICTORY = "Contradictory"
    NONE_VERIFIABLE = "NoneVerifiable"

    def __str__(self) -> str:  # wire form
        return self.value


class BinaryLabel(str, enum.Enum):
    """Two-way scoring label; NoneVerifiable collapses to neither."""

    SUPPORTED = "Supported"
    UNSUPPORTED = "Unsupported"

    def __str__(self) -> str:
        return self.value


class RiskTag(str, enum.Enum):
    """Automatic-evaluator risk tag used for sampling weights."""

    SUPPORTED_BY_EVALUATOR = "SupportedByEvaluator"
    FLAGGED_BY_EVALUATOR = "FlaggedByEvaluator"


class MicroGoldConstruction(str, enum.Enum):
    """How a hidden calibration claim was built."""

    ADVERSARIAL_UNSUPPORTED = "AdversarialUnsupported"
    VALIDATED_SUPPORTED = "ValidatedSupported"


class Confidence(str, enum.Enum):
    """Auditor self-reported confidence on a decision."""

    CERTAIN = "Certain"
    CONFIDENT = "Confident"
    UNCERTAIN = "Uncertain"


class AuditorKind(str, enum.Enum):
    HUMAN = "Human"
    AGENT = "Agent"


#: Sentinel prediction for a challenger that failed or declined to label a
#: claim.  Never a benchmark verdict; always scored incorrect.
ABSTAIN = "Abstain"


def parse_verdict(value: str) -> VerdictLabel:
    try:
        return VerdictLabel(value)
    except ValueError:
        raise InvalidLabel(f"unknown verdict label: {value!r}") from None


def collapse(verdict: VerdictLabel) -> BinaryLabel | None:
    """Collapse a four-way verdict to the binary scoring space.

    Contradictory and Inconclusive both become Unsupported; NoneVerifiable
    maps to neither and returns None (excluded from scoring).
    """
    if verdict is VerdictLabel.SUPPORTED:
        return BinaryLabel.SUPPORTED
    if verdict in (VerdictLabel.INCONCLUSIVE, VerdictLabel.CONTRADICTORY):
        return BinaryLabel.UNSUPPORTED
    return None


def collapsed_match(a: VerdictLabel | str | None, b: VerdictLabel | str | None) -> bool:
    """True when both labels collapse to the same binary label.

    Abstain, None, and NoneVerifiable never match anything.
    """
    if not isinstance(a, VerdictLabel) or not isinstance(b, VerdictLabel):
        return False
    ca, cb = collapse(a), collapse(b)
    return ca is not None and ca == cb


#: Short label definitions embedded in auditor-facing views.
LABEL_DEFINITIONS: dict[str, str] = {
    VerdictLabel.SUPPORTED.value: (
        "Every factual assertion in the sentence is backed by at least one "
        "credible source and no equally credible source refutes any part."
    ),
    VerdictLabel.INCONCLUSIVE.value: (
        "At least one factual assertion lacks sufficient support, none is "
        "credibly refuted, and available evidence cannot settle the sentence."
    ),
    VerdictLabel.CONTRADICTORY.value: (
        "At least one factual assertion is refuted by credible evidence that "
        "is not outweighed by equally strong support."
    ),
    VerdictLabel.NONE_VERIFIABLE.value: (
        "The sentence carries no checkable factual assertion (framing, "
        "opinion, speculation, or rhetoric); it is excluded from scoring."
    ),
}


class ErrorStage(str, enum.Enum):
    COLLECTION = "Collection"
    ANALYSIS = "Analysis"
    GENERALIZATION = "Generalization"


_STAGE_BY_PREFIX = {
    "C": ErrorStage.COLLECTION,
    "A": ErrorStage.ANALYSIS,
    "G": ErrorStage.GENERALIZATION,
}

#: code -> short description, grouped by the cognitive stage the code prefix
#: encodes (C- collection, A- analysis, G- generalization).
ERROR_CODE_CATALOG: dict[str, str] = {
    "C-AU": "cited source does not exist",
    "C-PV": "evidence attributed to the wrong source",
    "C-CP": "accessible counter-evidence omitted",
    "C-CU": "outdated or retracted source relied on",
    "C-RE": "unrepresentative evidence sample",
    "C-CX": "evidence drawn from a mismatched domain or task",
    "A-N1": "numeric value distorted",
    "A-S1": "similar but non-equivalent term substituted",
    "A-P1": "causality asserted from correlation or reversed",
    "A-X1": "findings from separate studies conflated",
    "A-B1": "supportive evidence cherry-picked",
    "A-T1": "incompatible timeframes compared",
    "A-O1": "incompatible metrics aggregated into one number",
    "A-C1": "contradictory findings presented as agreeing",
    "A-L1": "unjustified intermediate reasoning step",
    "G-O1": "generalized beyond the evidence's scope",
    "G-H1": "conditional finding stated as an absolute",
    "G-T1": "category scheme oversimplified or incomplete",
    "G-C1": "necessary qualifier dropped",
    "G-R1": "recent trend projected without evidence",
    "G-B1": "relative gain reported ignoring the base rate",
    "G-S1": "general claim drawn from a single study",
}


class ErrorCode:
    """A taxonomy code such as ``A-N1`` plus its derived stage."""

    __slots__ = ("code", "stage")

    def __init__(self, code: str):
        if code not in ERROR_CODE_CATALOG:
            raise InvalidLabel(f"unknown error code: {code!r}")
        self.code = code
        self.stage = _STAGE_BY_PREFIX[code[0]]

    def __eq__(self, other) -> bool:
        return isinstance(other, ErrorCode) and other.code == self.code

    def __hash__(self) -> int:
        return hash(self.code)

    def __repr__(self) -> str:
        return f"ErrorCode({self.code!r})"

    @property
    def description(self) -> str:
        return ERROR_CODE_CATALOG[self.code]


def error_code_listing() -> list[dict[str, str]]:
    """Catalog in wire form, for embedding in auditor-facing views."""
    return [
        {"code": code, "stage": _STAGE_BY_PREFIX[code[0]].value, "description": desc}
        for code, desc in ERROR_CODE_CATALOG.items()
    ]
