"""Exception types shared across the engine.

Every error carries a machine-readable ``code`` so the HTTP layer and CLI
can map failures without string matching.
"""

from __future__ import annotations


class AuditBenchError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details


class InvalidInput(AuditBenchError):
    code = "invalid_input"


class InvalidLabel(InvalidInput):
    code = "invalid_label"


class NotFound(AuditBenchError):
    code = "not_found"


class Conflict(AuditBenchError):
    code = "conflict"


class ConcurrentModification(Conflict):
    code = "concurrent_modification"


class CorruptLog(AuditBenchError):
    code = "corrupt_log"


class ImpossibleQuota(AuditBenchError):
    code = "impossible_quota"


class InsufficientPool(AuditBenchError):
    """Micro-gold pool cannot satisfy an injection plan.

    ``details["missing"]`` maps construction type to the shortfall count.
    """

    code = "insufficient_pool"


class ProtocolViolation(AuditBenchError):
    code = "protocol_violation"


class InsufficientHistory(AuditBenchError):
    code = "insufficient_history"


class TooFewClusters(InvalidInput):
    code = "too_few_clusters"


class MissingPrice(AuditBenchError):
    code = "missing_price"


class ProviderError(AuditBenchError):
    code = "provider_error"


class PreconditionViolation(AuditBenchError):
    code = "precondition_violation"


class AuditTimeout(AuditBenchError):
    code = "audit_timeout"
