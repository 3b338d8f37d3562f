"""Versioned benchmark store.

Holds reports, claims, and the benchmark's consensus state as a chain of
immutable versions plus an append-only changelog.  Version 0 is the seed;
every later version is produced by applying one round's accepted changes.
Replaying the changelog over the seed reproduces every snapshot digest
bit-exactly.

Hidden calibration data (gold labels of micro-gold claims) is stripped from
claims at registration time and kept in a separate calibration map so that
no claim- or benchmark-facing serialization can leak it.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    ConcurrentModification,
    Conflict,
    CorruptLog,
    InvalidInput,
    NotFound,
)
from .labels import (
    ErrorCode,
    MicroGoldConstruction,
    RiskTag,
    VerdictLabel,
    collapse,
    parse_verdict,
)
from .segment import segment_sentences


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SentenceSpan:
    sentence_id: str
    start: int
    end: int


@dataclass(frozen=True)
class ReportDocument:
    """A source report with its deterministic sentence segmentation."""

    report_id: str
    domain: str
    body: str
    sentences: tuple[SentenceSpan, ...]

    def __post_init__(self):
        prev_end = -1
        seen: set[str] = set()
        for span in self.sentences:
            if span.sentence_id in seen:
                raise InvalidInput(f"duplicate sentence_id {span.sentence_id!r}")
            seen.add(span.sentence_id)
            if not (0 <= span.start < span.end <= len(self.body)):
                raise InvalidInput(f"span out of range: {span}")
            if span.start < prev_end:
                raise InvalidInput("sentence spans overlap or are unsorted")
            prev_end = span.end

    def sentence_text(self, sentence_id: str) -> str:
        for span in self.sentences:
            if span.sentence_id == sentence_id:
                return self.body[span.start : span.end]
        raise NotFound(f"sentence {sentence_id!r} not in report {self.report_id!r}")

    def span_of(self, sentence_id: str) -> SentenceSpan:
        for span in self.sentences:
            if span.sentence_id == sentence_id:
                return span
        raise NotFound(f"sentence {sentence_id!r} not in report {self.report_id!r}")

    def to_json(self) -> dict:
        return {
            "report_id": self.report_id,
            "domain": self.domain,
            "body": self.body,
            "sentences": [
                {"sentence_id": s.sentence_id, "start": s.start, "end": s.end}
                for s in self.sentences
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ReportDocument":
        return cls(
            report_id=obj["report_id"],
            domain=obj["domain"],
            body=obj["body"],
            sentences=tuple(
                SentenceSpan(s["sentence_id"], s["start"], s["end"])
                for s in obj["sentences"]
            ),
        )


@dataclass(frozen=True)
class MicroGold:
    """Hidden calibration record for a claim.

    Adversarially constructed claims carry an unsupported gold label and the
    taxonomy code of the injected error; citation-validated claims are gold
    Supported and carry no code.
    """

    gold_label: VerdictLabel
    construction: MicroGoldConstruction
    error_code: ErrorCode | None = None
    manually_confirmed: bool = False

    def __post_init__(self):
        if self.construction is MicroGoldConstruction.ADVERSARIAL_UNSUPPORTED:
            if self.gold_label not in (
                VerdictLabel.INCONCLUSIVE,
                VerdictLabel.CONTRADICTORY,
            ):
                raise InvalidInput(
                    "adversarial micro-gold must be Inconclusive or Contradictory"
                )
            if self.error_code is None:
                raise InvalidInput("adversarial micro-gold requires an error_code")
        else:
            if self.gold_label is not VerdictLabel.SUPPORTED:
                raise InvalidInput("validated micro-gold must be Supported")
            if self.error_code is not None:
                raise InvalidInput("validated micro-gold carries no error_code")

    def to_json(self) -> dict:
        return {
            "gold_label": self.gold_label.value,
            "construction": self.construction.value,
            "error_code": self.error_code.code if self.error_code else None,
            "manually_confirmed": self.manually_confirmed,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "MicroGold":
        return cls(
            gold_label=parse_verdict(obj["gold_label"]),
            construction=MicroGoldConstruction(obj["construction"]),
            error_code=ErrorCode(obj["error_code"]) if obj.get("error_code") else None,
            manually_confirmed=bool(obj.get("manually_confirmed", False)),
        )


@dataclass(frozen=True)
class ClaimRecord:
    """A verbatim report sentence under verification."""

    claim_id: str
    report_id: str
    sentence_id: str
    text: str
    importance: int
    risk_tag: RiskTag
    microgold: MicroGold | None = None

    def __post_init__(self):
        if self.importance not in (1, 2, 3, 4, 5):
            raise InvalidInput(f"importance must be 1-5, got {self.importance}")

    def to_json(self) -> dict:
        # Never serializes the hidden calibration record.
        return {
            "claim_id": self.claim_id,
            "report_id": self.report_id,
            "sentence_id": self.sentence_id,
            "text": self.text,
            "importance": self.importance,
            "risk_tag": self.risk_tag.value,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ClaimRecord":
        mg = obj.get("microgold")
        return cls(
            claim_id=obj["claim_id"],
            report_id=obj["report_id"],
            sentence_id=obj["sentence_id"],
            text=obj["text"],
            importance=int(obj["importance"]),
            risk_tag=RiskTag(obj["risk_tag"]),
            microgold=MicroGold.from_json(mg) if mg else None,
        )


@dataclass(frozen=True)
class Rationale:
    """Evidence-bearing justification for a verdict."""

    text: str
    evidence_refs: tuple[str, ...] = ()
    author: str = ""
    created_at: str = ""

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "evidence_refs": list(self.evidence_refs),
            "author": self.author,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Rationale":
        return cls(
            text=obj.get("text", ""),
            evidence_refs=tuple(obj.get("evidence_refs", ())),
            author=obj.get("author", ""),
            created_at=obj.get("created_at", ""),
        )


@dataclass(frozen=True)
class BenchmarkEntry:
    claim_id: str
    verdict: VerdictLabel
    rationale: Rationale
    introduced_in: int

    def canonical(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "verdict": self.verdict.value,
            "rationale_text": self.rationale.text,
            "evidence_refs": list(self.rationale.evidence_refs),
            "introduced_in": self.introduced_in,
        }


@dataclass(frozen=True)
class ChangeRecord:
    """One accepted revision; the only event the changelog stores."""

    claim_id: str
    old_verdict: VerdictLabel
    new_verdict: VerdictLabel
    new_rationale: Rationale
    decided_by: str
    proposed_by: str
    round: int
    seq: int | None = None
    decision: str = "ACCEPT"
    timestamp: str = ""

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "claim_id": self.claim_id,
            "old_verdict": self.old_verdict.value,
            "new_verdict": self.new_verdict.value,
            "new_rationale": self.new_rationale.to_json(),
            "decided_by": self.decided_by,
            "proposed_by": self.proposed_by,
            "round": self.round,
            "decision": self.decision,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChangeRecord":
        return cls(
            seq=obj.get("seq"),
            claim_id=obj["claim_id"],
            old_verdict=parse_verdict(obj["old_verdict"]),
            new_verdict=parse_verdict(obj["new_verdict"]),
            new_rationale=Rationale.from_json(obj["new_rationale"]),
            decided_by=obj["decided_by"],
            proposed_by=obj["proposed_by"],
            round=int(obj["round"]),
            decision=obj.get("decision", "ACCEPT"),
            timestamp=obj.get("timestamp", ""),
        )


def canonical_entry_line(entry: BenchmarkEntry) -> str:
    return json.dumps(
        entry.canonical(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def entries_digest(entries: Mapping[str, BenchmarkEntry]) -> str:
    """SHA-256 over the canonical line-delimited serialization of entries."""
    h = hashlib.sha256()
    for claim_id in sorted(entries):
        h.update(canonical_entry_line(entries[claim_id]).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@dataclass(frozen=True)
class BenchmarkVersion:
    """Immutable consensus state at one point in the benchmark's history."""

    version: int
    parent: int | None
    entries: Mapping[str, BenchmarkEntry]
    snapshot_digest: str

    @classmethod
    def create(
        cls, version: int, parent: int | None, entries: Mapping[str, BenchmarkEntry]
    ) -> "BenchmarkVersion":
        frozen = dict(entries)
        return cls(
            version=version,
            parent=parent,
            entries=frozen,
            snapshot_digest=entries_digest(frozen),
        )

    def canonical_bytes(self) -> bytes:
        lines = [canonical_entry_line(self.entries[cid]) for cid in sorted(self.entries)]
        return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")

    def verdict_of(self, claim_id: str) -> VerdictLabel:
        try:
            return self.entries[claim_id].verdict
        except KeyError:
            raise NotFound(f"claim {claim_id!r} not in benchmark") from None


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


def _next_sentence_id(index: int) -> str:
    return f"s{index + 1:04d}"


class BenchmarkStore:
    """Single-writer store for one benchmark.

    All mutations are serialized through an internal lock; versions are
    immutable once created and safe to share across threads.
    """

    def __init__(self, benchmark_id: str = "bench"):
        self.benchmark_id = benchmark_id
        self.reports: dict[str, ReportDocument] = {}
        self.report_order: list[str] = []
        self.claims: dict[str, ClaimRecord] = {}
        self.claim_order: list[str] = []
        self.calibration: dict[str, MicroGold] = {}
        self.versions: list[BenchmarkVersion] = []
        self.changelog: list[ChangeRecord] = []
        self._lock = threading.RLock()

    # -- reports ------------------------------------------------------------

    def ingest_report(self, body: str, report_id: str, domain: str) -> ReportDocument:
        """Segment ``body`` into sentences and register the report."""
        if not body or not body.strip():
            raise InvalidInput("report body is empty")
        with self._lock:
            if report_id in self.reports:
                raise Conflict(f"report {report_id!r} already ingested")
            spans = segment_sentences(body)
            doc = ReportDocument(
                report_id=report_id,
                domain=domain,
                body=body,
                sentences=tuple(
                    SentenceSpan(_next_sentence_id(i), start, end)
                    for i, (start, end) in enumerate(spans)
                ),
            )
            self.reports[report_id] = doc
            self.report_order.append(report_id)
            return doc

    def add_report(self, doc: ReportDocument) -> None:
        """Register a pre-segmented report (load path)."""
        with self._lock:
            if doc.report_id in self.reports:
                raise Conflict(f"report {doc.report_id!r} already ingested")
            self.reports[doc.report_id] = doc
            self.report_order.append(doc.report_id)

    def report(self, report_id: str) -> ReportDocument:
        try:
            return self.reports[report_id]
        except KeyError:
            raise NotFound(f"report {report_id!r} not ingested") from None

    def claim_from_sentence(
        self,
        report_id: str,
        sentence_id: str,
        claim_id: str | None = None,
        importance: int = 3,
        risk_tag: RiskTag = RiskTag.SUPPORTED_BY_EVALUATOR,
        microgold: MicroGold | None = None,
    ) -> ClaimRecord:
        """Build a claim whose text is the exact report slice."""
        doc = self.report(report_id)
        return ClaimRecord(
            claim_id=claim_id or f"{report_id}/{sentence_id}",
            report_id=report_id,
            sentence_id=sentence_id,
            text=doc.sentence_text(sentence_id),
            importance=importance,
            risk_tag=risk_tag,
            microgold=microgold,
        )

    def claim(self, claim_id: str) -> ClaimRecord:
        try:
            return self.claims[claim_id]
        except KeyError:
            raise NotFound(f"claim {claim_id!r} not registered") from None

    # -- versions -----------------------------------------------------------

    def init_benchmark(
        self, entries: Iterable[tuple[ClaimRecord, VerdictLabel, Rationale]]
    ) -> BenchmarkVersion:
        """Create version 0 from seed annotations; the changelog starts empty."""
        with self._lock:
            if self.versions:
                raise Conflict("benchmark already initialized")
            built: dict[str, BenchmarkEntry] = {}
            new_claims: dict[str, ClaimRecord] = {}
            new_calibration: dict[str, MicroGold] = {}
            for claim, verdict, rationale in entries:
                if claim.claim_id in built:
                    raise Conflict(f"duplicate claim_id {claim.claim_id!r}")
                doc = self.reports.get(claim.report_id)
                if doc is None:
                    raise NotFound(f"report {claim.report_id!r} not ingested")
                if claim.text != doc.sentence_text(claim.sentence_id):
                    raise InvalidInput(
                        f"claim {claim.claim_id!r} text does not match its report slice"
                    )
                if claim.microgold is not None:
                    new_calibration[claim.claim_id] = claim.microgold
                    claim = replace(claim, microgold=None)
                new_claims[claim.claim_id] = claim
                built[claim.claim_id] = BenchmarkEntry(
                    claim_id=claim.claim_id,
                    verdict=verdict,
                    rationale=rationale,
                    introduced_in=0,
                )
            # all-or-nothing: mutate only after full validation
            self.calibration.update(new_calibration)
            self.claims.update(new_claims)
            self.claim_order.extend(new_claims)
            version = BenchmarkVersion.create(0, None, built)
            self.versions.append(version)
            return version

    def head(self) -> BenchmarkVersion:
        if not self.versions:
            raise NotFound("benchmark not initialized")
        return self.versions[-1]

    def version(self, t: int) -> BenchmarkVersion:
        if not self.versions or not (0 <= t < len(self.versions)):
            raise NotFound(f"version {t} does not exist")
        return self.versions[t]

    def apply_changeset(
        self, version: BenchmarkVersion, changes: Sequence[ChangeRecord]
    ) -> BenchmarkVersion:
        """Apply one round's accepted changes, minting version t+1.

        An empty changeset still mints a new version with identical entries,
        keeping round and version numbering one-to-one.
        """
        with self._lock:
            head = self.head()
            if version.version != head.version:
                raise ConcurrentModification(
                    f"changeset targets version {version.version}, head is {head.version}"
                )
            new_round = head.version + 1
            entries = dict(head.entries)
            seen: set[str] = set()
            assigned: list[ChangeRecord] = []
            next_seq = len(self.changelog) + 1
            for record in changes:
                if record.claim_id in seen:
                    raise InvalidInput(
                        f"claim {record.claim_id!r} appears twice in one changeset"
                    )
                seen.add(record.claim_id)
                current = entries.get(record.claim_id)
                if current is None:
                    raise NotFound(f"claim {record.claim_id!r} not in benchmark")
                if current.verdict != record.old_verdict:
                    raise ConcurrentModification(
                        f"claim {record.claim_id!r}: old_verdict "
                        f"{record.old_verdict.value} is stale "
                        f"(current {current.verdict.value})"
                    )
                if record.seq is not None and record.seq != next_seq:
                    raise CorruptLog(
                        f"expected seq {next_seq}, got {record.seq}"
                    )
                record = replace(
                    record,
                    seq=next_seq,
                    round=new_round,
                    timestamp=record.timestamp or utc_now(),
                )
                next_seq += 1
                assigned.append(record)
                entries[record.claim_id] = BenchmarkEntry(
                    claim_id=record.claim_id,
                    verdict=record.new_verdict,
                    rationale=record.new_rationale,
                    introduced_in=new_round,
                )
            new_version = BenchmarkVersion.create(new_round, head.version, entries)
            self.versions.append(new_version)
            self.changelog.extend(assigned)
            return new_version

    # -- replay ---------------------------------------------------------------

    def replay_changelog(
        self,
        records: Sequence[ChangeRecord],
        seed_version: BenchmarkVersion,
        n_versions: int | None = None,
    ) -> BenchmarkVersion:
        """Rebuild the head version from ``records`` over ``seed_version``.

        Records must be gap-free in ``seq`` and grouped by non-decreasing
        round.  ``n_versions`` mints trailing empty versions for rounds that
        accepted nothing (their changesets leave no records).
        """
        expected_seq = 1 if seed_version.version == 0 else None
        prev_round = seed_version.version
        for record in records:
            if record.seq is None:
                raise CorruptLog("replay requires assigned seq numbers")
            if expected_seq is not None and record.seq != expected_seq:
                raise CorruptLog(f"expected seq {expected_seq}, got {record.seq}")
            expected_seq = record.seq + 1
            if record.round < max(prev_round, seed_version.version + 1):
                raise CorruptLog(
                    f"round {record.round} out of order at seq {record.seq}"
                )
            prev_round = record.round

        current = seed_version
        entries = dict(seed_version.entries)
        i = 0
        last_round = prev_round if records else seed_version.version
        target = max(last_round, (n_versions - 1) if n_versions else 0)
        for round_no in range(seed_version.version + 1, target + 1):
            group: list[ChangeRecord] = []
            while i < len(records) and records[i].round == round_no:
                group.append(records[i])
                i += 1
            seen: set[str] = set()
            for record in group:
                if record.claim_id in seen:
                    raise CorruptLog(
                        f"claim {record.claim_id!r} repeated in round {round_no}"
                    )
                seen.add(record.claim_id)
                current_entry = entries.get(record.claim_id)
                if current_entry is None:
                    raise CorruptLog(f"claim {record.claim_id!r} unknown at replay")
                if current_entry.verdict != record.old_verdict:
                    raise CorruptLog(
                        f"old_verdict mismatch for {record.claim_id!r} "
                        f"in round {round_no}"
                    )
                entries[record.claim_id] = BenchmarkEntry(
                    claim_id=record.claim_id,
                    verdict=record.new_verdict,
                    rationale=record.new_rationale,
                    introduced_in=round_no,
                )
            current = BenchmarkVersion.create(round_no, current.version, entries)
        return current

    def verify_replay(self) -> bool:
        """Replay the full changelog over version 0 and check every digest."""
        with self._lock:
            if not self.versions:
                raise NotFound("benchmark not initialized")
            rebuilt = self.versions[0]
            for t in range(1, len(self.versions)):
                group = [r for r in self.changelog if r.round == t]
                rebuilt = self.replay_changelog(group, rebuilt)
                if rebuilt.version != t:
                    # empty round: replay_changelog cannot advance without records
                    rebuilt = BenchmarkVersion.create(t, t - 1, rebuilt.entries)
                if rebuilt.snapshot_digest != self.versions[t].snapshot_digest:
                    return False
            return True

    # -- derived views --------------------------------------------------------

    def microgold_accuracy(self, version: BenchmarkVersion) -> float | None:
        """Fraction of hidden calibration claims whose consensus verdict
        collapses to the gold binary label.  None when no calibration data."""
        if not self.calibration:
            return None
        total = 0
        correct = 0
        for claim_id, gold in self.calibration.items():
            entry = version.entries.get(claim_id)
            if entry is None:
                continue
            total += 1
            got = collapse(entry.verdict)
            if got is not None and got == collapse(gold.gold_label):
                correct += 1
        if total == 0:
            return None
        return correct / total

    def claim_position_key(self, claim_id: str):
        """Stable ordering key: reports in ingestion order, then span start."""
        claim = self.claim(claim_id)
        report_index = self.report_order.index(claim.report_id)
        span = self.report(claim.report_id).span_of(claim.sentence_id)
        return (report_index, span.start, claim_id)

    def validate_span_fidelity(self) -> None:
        for claim in self.claims.values():
            doc = self.report(claim.report_id)
            if claim.text != doc.sentence_text(claim.sentence_id):
                raise InvalidInput(
                    f"claim {claim.claim_id!r} text diverged from its report slice"
                )

    # -- file interfaces ------------------------------------------------------

    def write_snapshot(self, version: BenchmarkVersion, path: Path | str) -> None:
        """Snapshot file: header line, then canonical entry lines."""
        path = Path(path)
        header = {
            "version": version.version,
            "parent": version.parent,
            "snapshot_digest": version.snapshot_digest,
        }
        with path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False))
            fh.write("\n")
            for claim_id in sorted(version.entries):
                fh.write(canonical_entry_line(version.entries[claim_id]))
                fh.write("\n")

    @staticmethod
    def read_snapshot(path: Path | str) -> BenchmarkVersion:
        lines = Path(path).read_text("utf-8").splitlines()
        if not lines:
            raise CorruptLog("empty snapshot file")
        header = json.loads(lines[0])
        entries: dict[str, BenchmarkEntry] = {}
        for line in lines[1:]:
            obj = json.loads(line)
            entries[obj["claim_id"]] = BenchmarkEntry(
                claim_id=obj["claim_id"],
                verdict=parse_verdict(obj["verdict"]),
                rationale=Rationale(
                    text=obj["rationale_text"],
                    evidence_refs=tuple(obj["evidence_refs"]),
                ),
                introduced_in=int(obj["introduced_in"]),
            )
        version = BenchmarkVersion.create(header["version"], header["parent"], entries)
        if version.snapshot_digest != header["snapshot_digest"]:
            raise CorruptLog(
                f"snapshot digest mismatch: file says {header['snapshot_digest']}, "
                f"entries hash to {version.snapshot_digest}"
            )
        return version

    def write_changelog(self, path: Path | str) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for record in self.changelog:
                fh.write(json.dumps(record.to_json(), sort_keys=True, ensure_ascii=False))
                fh.write("\n")

    @staticmethod
    def read_changelog(path: Path | str) -> list[ChangeRecord]:
        records = []
        for line in Path(path).read_text("utf-8").splitlines():
            if line.strip():
                records.append(ChangeRecord.from_json(json.loads(line)))
        return records

    # -- persistence ----------------------------------------------------------

    def save(self, data_dir: Path | str) -> None:
        """Write the full store state under ``data_dir``."""
        root = Path(data_dir)
        (root / "reports").mkdir(parents=True, exist_ok=True)
        for report_id in self.report_order:
            doc = self.reports[report_id]
            (root / "reports" / f"{report_id}.json").write_text(
                json.dumps(doc.to_json(), ensure_ascii=False, indent=1), "utf-8"
            )
        with (root / "claims.jsonl").open("w", encoding="utf-8") as fh:
            for claim_id in self.claim_order:
                fh.write(json.dumps(self.claims[claim_id].to_json(), ensure_ascii=False))
                fh.write("\n")
        with (root / "calibration.jsonl").open("w", encoding="utf-8") as fh:
            for claim_id, gold in self.calibration.items():
                obj = {"claim_id": claim_id, **gold.to_json()}
                fh.write(json.dumps(obj, ensure_ascii=False))
                fh.write("\n")
        if self.versions:
            with (root / "seed_entries.jsonl").open("w", encoding="utf-8") as fh:
                for claim_id in sorted(self.versions[0].entries):
                    entry = self.versions[0].entries[claim_id]
                    obj = {
                        "claim_id": entry.claim_id,
                        "verdict": entry.verdict.value,
                        "rationale": entry.rationale.to_json(),
                    }
                    fh.write(json.dumps(obj, ensure_ascii=False))
                    fh.write("\n")
        self.write_changelog(root / "changelog.jsonl")
        meta = {
            "benchmark_id": self.benchmark_id,
            "report_order": self.report_order,
            "n_versions": len(self.versions),
        }
        (root / "meta.json").write_text(json.dumps(meta, indent=1), "utf-8")

    @classmethod
    def load(cls, data_dir: Path | str) -> "BenchmarkStore":
        root = Path(data_dir)
        meta = json.loads((root / "meta.json").read_text("utf-8"))
        store = cls(benchmark_id=meta["benchmark_id"])
        for report_id in meta["report_order"]:
            doc = ReportDocument.from_json(
                json.loads((root / "reports" / f"{report_id}.json").read_text("utf-8"))
            )
            store.add_report(doc)
        claims_by_id: dict[str, ClaimRecord] = {}
        calibration: dict[str, MicroGold] = {}
        for line in (root / "claims.jsonl").read_text("utf-8").splitlines():
            if line.strip():
                claim = ClaimRecord.from_json(json.loads(line))
                claims_by_id[claim.claim_id] = claim
        calib_path = root / "calibration.jsonl"
        if calib_path.exists():
            for line in calib_path.read_text("utf-8").splitlines():
                if line.strip():
                    obj = json.loads(line)
                    calibration[obj["claim_id"]] = MicroGold.from_json(obj)
        seed_path = root / "seed_entries.jsonl"
        if seed_path.exists():
            seed: list[tuple[ClaimRecord, VerdictLabel, Rationale]] = []
            for line in seed_path.read_text("utf-8").splitlines():
                if line.strip():
                    obj = json.loads(line)
                    claim = claims_by_id[obj["claim_id"]]
                    if obj["claim_id"] in calibration:
                        claim = replace(claim, microgold=calibration[obj["claim_id"]])
                    seed.append(
                        (
                            claim,
                            parse_verdict(obj["verdict"]),
                            Rationale.from_json(obj["rationale"]),
                        )
                    )
            store.init_benchmark(seed)
            records = cls.read_changelog(root / "changelog.jsonl")
            n_versions = meta.get("n_versions", 1)
            for t in range(1, n_versions):
                group = [r for r in records if r.round == t]
                store.apply_changeset(store.head(), group)
        return store

    # -- iteration -------------------------------------------------------------

    def ordered_claim_ids(self, version: BenchmarkVersion) -> list[str]:
        """Benchmark claims in report-ingestion, then span-position order."""
        return sorted(version.entries, key=self.claim_position_key)

    def __iter__(self) -> Iterator[BenchmarkVersion]:
        return iter(self.versions)
