"""Binarization, classification metrics, Success Rate, sweeps, and context
reduction.

Metrics are pooled over all (question, paragraph) instances into a single
confusion matrix; per-language tables repeat the same computation within
each language and add an unweighted average row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .model import Article, BlockKind, QAPair
from .scorers import ScoreRecord


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class EvalReport:
    accuracy: float = 0.0
    precision0: float = 0.0
    recall0: float = 0.0
    f1_0: float = 0.0
    precision1: float = 0.0
    recall1: float = 0.0
    f1_1: float = 0.0
    macro_f1: float = 0.0
    success_rate: float | None = None
    n_instances: int = 0
    n_questions: int = 0
    threshold: float | None = None
    scorer_id: str = ""
    confusion: ConfusionCounts = field(default_factory=ConfusionCounts)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "label0": {"precision": self.precision0, "recall": self.recall0, "f1": self.f1_0},
            "label1": {"precision": self.precision1, "recall": self.recall1, "f1": self.f1_1},
            "success_rate": self.success_rate,
            "n_instances": self.n_instances,
            "n_questions": self.n_questions,
            "threshold": self.threshold,
            "scorer_id": self.scorer_id,
        }


def binarize(records: Sequence[ScoreRecord], threshold: float) -> list[int]:
    """Prediction 1 iff score >= threshold; threshold must be inside each range."""
    predictions: list[int] = []
    for rec in records:
        lo, hi = rec.score_range
        if not lo <= threshold <= hi:
            raise ValueError(f"threshold {threshold} outside score range [{lo}, {hi}]")
        predictions.append(1 if rec.score >= threshold else 0)
    return predictions


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def classification_report(predictions: Sequence[int], labels: Sequence[int]) -> EvalReport:
    """Pooled accuracy and per-label precision/recall/F1; 0/0 is defined as 0."""
    if len(predictions) != len(labels):
        raise ValueError("predictions and labels differ in length")
    if not labels:
        raise ValueError("cannot evaluate an empty set")
    tp = fp = tn = fn = 0
    for pred, label in zip(predictions, labels):
        if label == 1:
            if pred == 1:
                tp += 1
            else:
                fn += 1
        else:
            if pred == 1:
                fp += 1
            else:
                tn += 1
    report = EvalReport(confusion=ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))
    n = len(labels)
    report.n_instances = n
    report.accuracy = (tp + tn) / n
    report.precision1 = _safe_div(tp, tp + fp)
    report.recall1 = _safe_div(tp, tp + fn)
    report.f1_1 = _safe_div(2 * report.precision1 * report.recall1, report.precision1 + report.recall1)
    report.precision0 = _safe_div(tn, tn + fn)
    report.recall0 = _safe_div(tn, tn + fp)
    report.f1_0 = _safe_div(2 * report.precision0 * report.recall0, report.precision0 + report.recall0)
    report.macro_f1 = (report.f1_0 + report.f1_1) / 2.0
    return report


def success_rate(
    predicted: Mapping[str, set[int]],
    reference: Mapping[str, set[int]],
) -> float:
    """Fraction of questions whose predicted-positive set meets the reference."""
    if not reference:
        raise ValueError("reference sets must be non-empty")
    for qa_id, ref in reference.items():
        if not ref:
            raise ValueError(f"empty reference set for question {qa_id!r}")
    hits = sum(1 for qa_id, ref in reference.items() if predicted.get(qa_id, set()) & ref)
    return hits / len(reference)


def evaluate_scores(
    records: Sequence[ScoreRecord],
    labels: Sequence[int],
    threshold: float,
    scorer_id: str = "",
) -> EvalReport:
    """Full report (metrics + SR) for aligned score records and labels."""
    predictions = binarize(records, threshold)
    report = classification_report(predictions, labels)
    predicted: dict[str, set[int]] = {}
    reference: dict[str, set[int]] = {}
    for rec, pred, label in zip(records, predictions, labels):
        if pred == 1:
            predicted.setdefault(rec.qa_id, set()).add(rec.paragraph_index)
        if label == 1:
            reference.setdefault(rec.qa_id, set()).add(rec.paragraph_index)
    report.success_rate = success_rate(predicted, reference) if reference else None
    report.n_questions = len({rec.qa_id for rec in records})
    report.threshold = threshold
    report.scorer_id = scorer_id or (records[0].scorer_id if records else "")
    return report


@dataclass
class SweepReport:
    entries: list[tuple[float, EvalReport]] = field(default_factory=list)

    def best_macro_f1(self) -> tuple[float, EvalReport]:
        return max(self.entries, key=lambda e: e[1].macro_f1)

    def to_csv(self) -> str:
        lines = ["threshold,accuracy,macro_f1,label1_f1,success_rate"]
        for threshold, report in self.entries:
            sr = "" if report.success_rate is None else f"{report.success_rate:.6f}"
            lines.append(
                f"{threshold:.6f},{report.accuracy:.6f},{report.macro_f1:.6f},{report.f1_1:.6f},{sr}"
            )
        return "\n".join(lines) + "\n"


def threshold_sweep(
    records: Sequence[ScoreRecord],
    labels: Sequence[int],
    grid: Sequence[float],
    scorer_id: str = "",
) -> SweepReport:
    """One report per threshold; thresholds must be strictly increasing."""
    if not grid:
        raise ValueError("threshold grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("threshold grid must be strictly increasing")
    sweep = SweepReport()
    for threshold in grid:
        sweep.entries.append((threshold, evaluate_scores(records, labels, threshold, scorer_id)))
    return sweep


def per_language_report(
    records_by_language: Mapping[str, Sequence[ScoreRecord]],
    labels_by_language: Mapping[str, Sequence[int]],
    threshold: float,
    scorer_id: str = "",
    weighted_average: bool = False,
) -> dict[str, EvalReport]:
    """One row per language plus an ``average`` row (unweighted by default)."""
    table: dict[str, EvalReport] = {}
    for language in sorted(records_by_language):
        records = records_by_language[language]
        if not records:
            continue
        table[language] = evaluate_scores(records, labels_by_language[language], threshold, scorer_id)
    if not table:
        return table
    rows = list(table.values())
    weights = [r.n_questions for r in rows] if weighted_average else [1] * len(rows)
    total = sum(weights)

    def avg(values: Sequence[float | None]) -> float | None:
        pairs = [(v, w) for v, w in zip(values, weights) if v is not None]
        if not pairs:
            return None
        return sum(v * w for v, w in pairs) / total

    average = EvalReport(
        accuracy=avg([r.accuracy for r in rows]),
        precision0=avg([r.precision0 for r in rows]),
        recall0=avg([r.recall0 for r in rows]),
        f1_0=avg([r.f1_0 for r in rows]),
        precision1=avg([r.precision1 for r in rows]),
        recall1=avg([r.recall1 for r in rows]),
        f1_1=avg([r.f1_1 for r in rows]),
        macro_f1=avg([r.macro_f1 for r in rows]),
        success_rate=avg([r.success_rate for r in rows]),
        n_instances=sum(r.n_instances for r in rows),
        n_questions=sum(r.n_questions for r in rows),
        threshold=threshold,
        scorer_id=scorer_id,
    )
    table["average"] = average
    return table


# --- context reduction ---------------------------------------------------

@dataclass(frozen=True)
class TopK:
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class AboveThreshold:
    threshold: float


def reduce_context(
    pair: QAPair,
    article: Article,
    scores: Mapping[int, float],
    policy: TopK | AboveThreshold,
) -> list[int]:
    """Select paragraph indices by score, returned in original document order.

    TopK ties break toward the lower index; k >= p keeps everything.
    """
    context = list(pair.context_paragraph_ids)
    if isinstance(policy, TopK):
        ranked = sorted(context, key=lambda i: (-scores.get(i, float("-inf")), i))
        selected = set(ranked[: policy.k])
    else:
        selected = {i for i in context if scores.get(i, float("-inf")) >= policy.threshold}
    return [i for i in context if i in selected]


def reduced_paragraph_texts(article: Article, indices: Sequence[int]) -> list[str]:
    text_by_index = {b.index: b.text for b in article.blocks if b.kind is BlockKind.PARAGRAPH}
    return [text_by_index[i] for i in indices]


# --- win ratio -----------------------------------------------------------

def _normalize_for_match(text: str) -> str:
    return " ".join(text.casefold().split())


def win_ratio(generations: Sequence[str], gold_answers: Sequence[str]) -> float:
    """Fraction of generations containing their gold answer as a substring.

    Both sides are case-folded and whitespace-collapsed before matching.
    """
    if len(generations) != len(gold_answers):
        raise ValueError("generations and gold answers differ in length")
    if not generations:
        raise ValueError("cannot compute win ratio on empty inputs")
    wins = sum(
        1
        for gen, gold in zip(generations, gold_answers)
        if _normalize_for_match(gold) in _normalize_for_match(gen)
    )
    return wins / len(generations)


# --- text rendering ------------------------------------------------------

def _pct(value: float | None) -> str:
    return "-" if value is None else f"{100 * value:5.1f}"


REPORT_COLUMNS = "Acc MacroF1 P0 R0 F1_0 P1 R1 F1_1 SR"


def format_report_row(name: str, report: EvalReport) -> str:
    sr = "-" if report.success_rate is None else f"{report.success_rate:.2f}"
    return (
        f"{name:<12} {_pct(report.accuracy)} {_pct(report.macro_f1)}  "
        f"{_pct(report.precision0)} {_pct(report.recall0)} {_pct(report.f1_0)}  "
        f"{_pct(report.precision1)} {_pct(report.recall1)} {_pct(report.f1_1)}  {sr}"
    )


def format_report_table(rows: Mapping[str, EvalReport]) -> str:
    header = f"{'name':<12} {'Acc':>5} {'MacF1':>5}  {'P0':>5} {'R0':>5} {'F1-0':>5}  {'P1':>5} {'R1':>5} {'F1-1':>5}  SR"
    lines = [header]
    for name, report in rows.items():
        lines.append(format_report_row(name, report))
    return "\n".join(lines) + "\n"
