from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auditbench.errors import (
    ConcurrentModification,
    Conflict,
    CorruptLog,
    InvalidInput,
    NotFound,
)
from auditbench.labels import RiskTag, VerdictLabel
from auditbench.segment import segment_sentences
from auditbench.store import (
    BenchmarkStore,
    ChangeRecord,
    Rationale,
)

from conftest import build_corpus, seed_rationale


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------


def test_two_sentence_spans():
    store = BenchmarkStore()
    doc = store.ingest_report("A. B.", "r1", "test")
    assert [(s.start, s.end) for s in doc.sentences] == [(0, 2), (3, 5)]
    assert doc.body[0:2] == "A."
    assert doc.body[3:5] == "B."


def test_empty_body_rejected():
    store = BenchmarkStore()
    with pytest.raises(InvalidInput):
        store.ingest_report("", "r1", "test")
    with pytest.raises(InvalidInput):
        store.ingest_report("   \n ", "r2", "test")


# Hand segmentation of the three-paragraph fixture below: the heading, four
# prose sentences in paragraph one (the "e.g." must not split), two in
# paragraph two (one ending in "!"), and three in paragraph three -> 10.
FIXTURE_REPORT = """Oxide Coatings Overview

Thin oxide films resist corrosion. Several labs, e.g. the Delft group, report
twofold gains. The effect holds between 300 K and 450 K. Above that range the
film cracks.

Deposition cost remains high! Plasma methods reduce the cost by a third.

Field trials ran for two years. Failures clustered near weld seams. A final
survey confirmed the coating stayed intact elsewhere.
"""


def test_fixture_report_matches_hand_segmentation():
    store = BenchmarkStore()
    doc = store.ingest_report(FIXTURE_REPORT, "fixture", "materials")
    assert len(doc.sentences) == 10
    texts = [doc.body[s.start : s.end] for s in doc.sentences]
    assert texts[0] == "Oxide Coatings Overview"
    assert texts[1] == "Thin oxide films resist corrosion."
    assert "e.g. the Delft group" in texts[2]
    assert texts[5] == "Deposition cost remains high!"


def test_segmentation_reconstructs_body():
    spans = segment_sentences(FIXTURE_REPORT)
    rebuilt = []
    prev = 0
    for start, end in spans:
        assert FIXTURE_REPORT[prev:start].strip() == ""  # inter-span gap is whitespace
        rebuilt.append(FIXTURE_REPORT[start:end])
        prev = end
    assert FIXTURE_REPORT[prev:].strip() == ""
    assert "".join(rebuilt).replace(" ", "").replace("\n", "") == FIXTURE_REPORT.replace(
        " ", ""
    ).replace("\n", "")


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abc .!?\ne", max_size=150))
def test_segmentation_covers_all_nonwhitespace(body):
    spans = segment_sentences(body)
    assert spans == segment_sentences(body)  # deterministic
    prev = 0
    for start, end in spans:
        assert prev <= start < end <= len(body)
        assert body[start:end] == body[start:end].strip()
        assert body[prev:start].strip() == ""
        prev = end
    assert body[prev:].strip() == ""


# ---------------------------------------------------------------------------
# init_benchmark
# ---------------------------------------------------------------------------


def _tiny_store(labels=(VerdictLabel.SUPPORTED, VerdictLabel.INCONCLUSIVE, VerdictLabel.CONTRADICTORY)):
    store = BenchmarkStore()
    store.ingest_report("One is one. Two is two. Three is three.", "r1", "test")
    doc = store.report("r1")
    entries = [
        (
            store.claim_from_sentence("r1", span.sentence_id, claim_id=f"c{i}"),
            labels[i % len(labels)],
            seed_rationale(),
        )
        for i, span in enumerate(doc.sentences)
    ]
    return store, entries


def test_init_benchmark_digest_stable():
    store_a, entries_a = _tiny_store()
    store_b, entries_b = _tiny_store()
    v_a = store_a.init_benchmark(entries_a)
    v_b = store_b.init_benchmark(entries_b)
    assert v_a.version == 0
    assert len(v_a.entries) == 3
    assert v_a.snapshot_digest == v_b.snapshot_digest
    assert store_a.changelog == []


def test_init_benchmark_empty_is_legal():
    store = BenchmarkStore()
    v0 = store.init_benchmark([])
    assert v0.version == 0
    assert v0.entries == {}


def test_init_benchmark_test_split_size():
    # mimics the released test split: 621 claims across 15 reports
    store = BenchmarkStore()
    entries = []
    for r in range(15):
        n = 41 if r < 6 else 42  # 6*41 + 9*42 = 624 -> trim to 621 below
        body = " ".join(f"Report {r} states fact {i}." for i in range(n))
        store.ingest_report(body, f"r{r}", "survey")
        for span in store.report(f"r{r}").sentences:
            entries.append(
                (
                    store.claim_from_sentence(f"r{r}", span.sentence_id),
                    VerdictLabel.SUPPORTED,
                    seed_rationale(),
                )
            )
    v0 = store.init_benchmark(entries[:621])
    assert len(v0.entries) == 621


def test_init_benchmark_duplicate_claim_conflict():
    store, entries = _tiny_store()
    with pytest.raises(Conflict):
        store.init_benchmark([entries[0], entries[0]])


def test_init_benchmark_unknown_report():
    store, entries = _tiny_store()
    from auditbench.store import ClaimRecord

    stray = ClaimRecord(
        claim_id="cx",
        report_id="missing",
        sentence_id="s0001",
        text="whatever",
        importance=3,
        risk_tag=RiskTag.SUPPORTED_BY_EVALUATOR,
    )
    with pytest.raises(NotFound):
        store.init_benchmark(entries + [(stray, VerdictLabel.SUPPORTED, seed_rationale())])


# ---------------------------------------------------------------------------
# apply_changeset / replay
# ---------------------------------------------------------------------------


def _change(claim_id, old, new, round_no=1):
    return ChangeRecord(
        claim_id=claim_id,
        old_verdict=old,
        new_verdict=new,
        new_rationale=Rationale(text="revised", author="auditor"),
        decided_by="auditor",
        proposed_by="challenger",
        round=round_no,
    )


def test_apply_single_change():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    v1 = store.apply_changeset(
        v0, [_change("c0", VerdictLabel.SUPPORTED, VerdictLabel.CONTRADICTORY)]
    )
    assert v1.version == 1
    assert v1.entries["c0"].verdict is VerdictLabel.CONTRADICTORY
    assert v1.entries["c0"].introduced_in == 1
    assert v1.entries["c1"].introduced_in == 0
    assert len(store.changelog) == 1
    assert store.changelog[0].seq == 1
    # prior version untouched
    assert v0.entries["c0"].verdict is VerdictLabel.SUPPORTED


def test_empty_changeset_mints_new_version_same_digest():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    v1 = store.apply_changeset(v0, [])
    assert v1.version == 1
    assert v1.snapshot_digest == v0.snapshot_digest


def test_stale_old_verdict_rejected():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    with pytest.raises(ConcurrentModification):
        store.apply_changeset(
            v0, [_change("c0", VerdictLabel.CONTRADICTORY, VerdictLabel.INCONCLUSIVE)]
        )


def test_unknown_claim_rejected():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    with pytest.raises(NotFound):
        store.apply_changeset(
            v0, [_change("nope", VerdictLabel.SUPPORTED, VerdictLabel.CONTRADICTORY)]
        )


def test_apply_to_non_head_rejected():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    store.apply_changeset(v0, [])
    with pytest.raises(ConcurrentModification):
        store.apply_changeset(v0, [])


def test_changelog_completeness(corpus):
    store, _, _ = corpus
    v0 = store.head()
    changes = [
        _change(cid, v0.entries[cid].verdict, VerdictLabel.CONTRADICTORY)
        for cid in list(v0.entries)[:7]
        if v0.entries[cid].verdict is not VerdictLabel.CONTRADICTORY
    ]
    v1 = store.apply_changeset(v0, changes)
    diffs = sum(
        1 for cid in v0.entries if v0.entries[cid].verdict != v1.entries[cid].verdict
    )
    assert diffs == len(changes) == len(store.changelog)


def test_replay_empty_log_identity():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    replayed = store.replay_changelog([], v0)
    assert replayed.snapshot_digest == v0.snapshot_digest
    assert replayed.version == 0


def test_replay_reproduces_head_digest():
    import random

    rng = random.Random(7)
    store, wrong, golds = build_corpus()
    labels = [VerdictLabel.SUPPORTED, VerdictLabel.INCONCLUSIVE, VerdictLabel.CONTRADICTORY]
    for round_no in range(1, 4):
        head = store.head()
        claim_ids = rng.sample(sorted(head.entries), k=5)
        changes = []
        for cid in claim_ids:
            old = head.entries[cid].verdict
            new = rng.choice([l for l in labels if l != old])
            changes.append(_change(cid, old, new, round_no))
        store.apply_changeset(head, changes)
    assert store.verify_replay()
    replayed = store.replay_changelog(store.changelog, store.version(0))
    assert replayed.snapshot_digest == store.head().snapshot_digest


def test_replay_gap_detected():
    store, entries = _tiny_store()
    v0 = store.init_benchmark(entries)
    records = [
        _change("c0", VerdictLabel.SUPPORTED, VerdictLabel.CONTRADICTORY).to_json(),
        _change("c1", VerdictLabel.INCONCLUSIVE, VerdictLabel.SUPPORTED).to_json(),
        _change("c2", VerdictLabel.CONTRADICTORY, VerdictLabel.SUPPORTED).to_json(),
    ]
    for seq, rec in zip((1, 2, 4), records):
        rec["seq"] = seq
    parsed = [ChangeRecord.from_json(r) for r in records]
    with pytest.raises(CorruptLog):
        store.replay_changelog(parsed, v0)


def test_version_immutability_canonical_bytes(corpus):
    store, _, _ = corpus
    v0 = store.head()
    before = v0.canonical_bytes()
    store.apply_changeset(
        v0, [_change("c020", v0.entries["c020"].verdict, VerdictLabel.CONTRADICTORY)]
    )
    assert store.version(0).canonical_bytes() == before


def test_span_fidelity(corpus):
    store, _, _ = corpus
    store.validate_span_fidelity()


# ---------------------------------------------------------------------------
# File interfaces
# ---------------------------------------------------------------------------


def test_snapshot_roundtrip(tmp_path, corpus):
    store, _, _ = corpus
    head = store.head()
    path = tmp_path / "v0.snapshot.jsonl"
    store.write_snapshot(head, path)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["snapshot_digest"] == head.snapshot_digest
    claim_ids = [json.loads(l)["claim_id"] for l in lines[1:]]
    assert claim_ids == sorted(claim_ids)
    loaded = BenchmarkStore.read_snapshot(path)
    assert loaded.snapshot_digest == head.snapshot_digest


def test_report_file_roundtrip(tmp_path):
    from auditbench.store import ReportDocument

    store = BenchmarkStore()
    doc = store.ingest_report(FIXTURE_REPORT, "fixture", "materials")
    path = tmp_path / "report.json"
    path.write_text(json.dumps(doc.to_json()))
    loaded = ReportDocument.from_json(json.loads(path.read_text()))
    assert loaded == doc


def test_store_save_load_roundtrip(tmp_path):
    store, wrong, golds = build_corpus()
    head = store.head()
    store.apply_changeset(
        head, [_change("c011", head.entries["c011"].verdict, VerdictLabel.CONTRADICTORY)]
    )
    store.save(tmp_path / "bench")
    loaded = BenchmarkStore.load(tmp_path / "bench")
    assert loaded.head().snapshot_digest == store.head().snapshot_digest
    assert loaded.version(0).snapshot_digest == store.version(0).snapshot_digest
    assert set(loaded.calibration) == set(store.calibration)
    # hidden data never rides on claims
    assert all(c.microgold is None for c in loaded.claims.values())
