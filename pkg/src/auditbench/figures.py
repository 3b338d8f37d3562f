"""Rendering of round histories and statistics to figures plus delimited
files.

Every render writes a CSV next to its PNG so downstream tooling never has
to scrape pixels.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import BootstrapResult
from .protocol import RoundHistory, replay_counterfactual


def _ensure_dir(out_dir: Path | str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def render_trajectory(history: RoundHistory, out_dir: Path | str) -> dict[str, Path]:
    """Micro-gold accuracy and challenger score per round."""
    out = _ensure_dir(out_dir)
    rounds = [0] + [r.round for r in history.rounds]
    accuracy = [history.initial_microgold_accuracy] + [
        r.microgold_accuracy for r in history.rounds
    ]
    scores = [None] + [r.score for r in history.rounds]
    csv_path = out / "trajectory.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "microgold_accuracy", "challenger_score", "accepted", "audited"])
        writer.writerow([0, accuracy[0], "", "", ""])
        for record in history.rounds:
            writer.writerow(
                [
                    record.round,
                    record.microgold_accuracy,
                    record.score,
                    record.accepted,
                    len(record.audited_claims),
                ]
            )
    fig, ax = plt.subplots(figsize=(6, 4))
    known = [(r, a) for r, a in zip(rounds, accuracy) if a is not None]
    if known:
        ax.plot(*zip(*known), marker="o", color="#2a6f4e", label="micro-gold accuracy")
    score_points = [(r, s) for r, s in zip(rounds, scores) if s is not None]
    if score_points:
        ax.plot(
            *zip(*score_points), marker="s", linestyle="--", color="#5677a8",
            label="challenger score",
        )
    ax.set_xlabel("round")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.set_xticks(rounds)
    ax.grid(alpha=0.3)
    ax.legend()
    ax.set_title("benchmark accuracy across audit rounds")
    fig.tight_layout()
    png_path = out / "trajectory.png"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return {"csv": csv_path, "png": png_path}


def render_replay(
    history: RoundHistory,
    out_dir: Path | str,
    fractions: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
    n_seeds: int = 200,
    seed: int = 0,
) -> dict[str, Path]:
    """Mean counterfactual micro-gold trajectory per audit fraction."""
    out = _ensure_dir(out_dir)
    n_rounds = len(history.rounds)
    curves: dict[float, list[float]] = {}
    for p in fractions:
        if p == 1.0:
            curves[p] = replay_counterfactual(history, 1.0, seed)
            continue
        acc = np.zeros(n_rounds)
        for s in range(n_seeds):
            acc += np.asarray(replay_counterfactual(history, p, seed + s))
        curves[p] = list(acc / n_seeds)
    csv_path = out / "replay.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["audit_fraction", "round", "mean_microgold_accuracy"])
        for p, curve in curves.items():
            for round_no, value in enumerate(curve, start=1):
                writer.writerow([p, round_no, value])
    fig, ax = plt.subplots(figsize=(6, 4))
    start = history.initial_microgold_accuracy
    for p, curve in sorted(curves.items()):
        xs = list(range(0, n_rounds + 1)) if start is not None else list(range(1, n_rounds + 1))
        ys = ([start] + curve) if start is not None else curve
        ax.plot(xs, ys, marker="o", label=f"p = {p:g}")
    ax.set_xlabel("round")
    ax.set_ylabel("mean micro-gold accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(title="audit fraction")
    ax.set_title("counterfactual replay of audit fractions")
    fig.tight_layout()
    png_path = out / "replay.png"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return {"csv": csv_path, "png": png_path}


def render_bootstrap(
    diffs: np.ndarray,
    result: BootstrapResult,
    out_dir: Path | str,
    label_a: str = "A",
    label_b: str = "B",
) -> dict[str, Path]:
    """Histogram of the bootstrap difference distribution with its CI."""
    out = _ensure_dir(out_dir)
    csv_path = out / "bootstrap.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "diff"])
        for i, d in enumerate(diffs):
            writer.writerow([i, float(d)])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(diffs, bins=min(60, max(10, len(set(np.round(diffs, 6))))), color="#7a9ac0")
    ax.axvline(result.mean_diff, color="#2a6f4e", label=f"mean = {result.mean_diff:+.3f}")
    ax.axvline(result.ci95_low, color="#a04030", linestyle="--", label="95% CI")
    ax.axvline(result.ci95_high, color="#a04030", linestyle="--")
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel(f"accuracy({label_a}) - accuracy({label_b})")
    ax.set_ylabel("replicates")
    ax.legend()
    ax.set_title("paired cluster bootstrap")
    fig.tight_layout()
    png_path = out / "bootstrap.png"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return {"csv": csv_path, "png": png_path}


def render_scores(rows: Sequence[Mapping], out_dir: Path | str) -> dict[str, Path]:
    """Bar chart plus CSV of per-round challenger metrics."""
    out = _ensure_dir(out_dir)
    csv_path = out / "scores.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "challenger", "accuracy", "precision", "recall", "f1"])
        for row in rows:
            m = row["metrics"]
            writer.writerow(
                [row["round"], row["challenger"], m["accuracy"], m["precision"], m["recall"], m["f1"]]
            )
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [f"r{row['round']}:{row['challenger']}" for row in rows]
    ax.bar(labels, [row["metrics"]["accuracy"] for row in rows], color="#5677a8")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("challenger accuracy by round")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    png_path = out / "scores.png"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return {"csv": csv_path, "png": png_path}
