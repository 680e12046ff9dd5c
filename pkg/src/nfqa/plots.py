"""Figure rendering for report outputs.

Every report path that emits delimited data (sweep CSV, stats JSON,
training logs) can also render a matplotlib figure next to it.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import SweepReport


def plot_sweep(sweep: SweepReport, path: str | Path, title: str = "Threshold sweep") -> Path:
    """Metric curves (macro F1, accuracy, label-1 F1, SR) over the grid."""
    thresholds = [t for t, _ in sweep.entries]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(thresholds, [r.macro_f1 for _, r in sweep.entries], marker="o", label="macro F1")
    ax.plot(thresholds, [r.accuracy for _, r in sweep.entries], marker="s", label="accuracy")
    ax.plot(thresholds, [r.f1_1 for _, r in sweep.entries], marker="^", label="label-1 F1")
    if all(r.success_rate is not None for _, r in sweep.entries):
        ax.plot(thresholds, [r.success_rate for _, r in sweep.entries], marker="x", label="SR")
    ax.set_xlabel("threshold")
    ax.set_ylabel("metric")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_language_counts(counts: Mapping[str, int], path: str | Path, title: str = "QA pairs per language") -> Path:
    languages = sorted(counts, key=lambda k: -counts[k])
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(languages) + 2), 4))
    ax.bar(languages, [counts[l] for l in languages], color="tab:blue")
    ax.set_ylabel("QA pairs")
    ax.set_title(title)
    ax.tick_params(axis="x", rotation=60)
    return _save(fig, path)


def plot_training_loss(losses: Sequence[float], path: str | Path, title: str = "Training loss") -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(losses) + 1), losses)
    ax.set_xlabel("step")
    ax.set_ylabel("mean loss")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
