"""Gold-annotation task management and inter-annotator agreement.

Tasks expose a question plus its context paragraphs, never the silver
labels. Responses are kept in an append-only JSONL log; gold records are
the union of each question's selections. The HTTP API here is what the
browser annotation UI consumes.
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .evaluation import EvalReport, classification_report, success_rate
from .model import Article, BlockKind, QAPair


class VerdictKind(str, Enum):
    SELECTIONS = "selections"
    NOTA = "nota"
    NOT_UNDERSTOOD = "not_understood"


class TaskStatus(str, Enum):
    OPEN = "open"
    DONE = "done"


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    qa_id: str
    language: str
    title: str
    question: str
    paragraphs: tuple[tuple[int, str], ...]
    status: TaskStatus = TaskStatus.OPEN

    def to_payload(self) -> dict:
        """Annotator-facing payload; silver labels are structurally absent."""
        return {
            "task_id": self.task_id,
            "qa_id": self.qa_id,
            "language": self.language,
            "title": self.title,
            "question": self.question,
            "paragraphs": [{"index": i, "text": t} for i, t in self.paragraphs],
            "status": self.status.value,
        }


@dataclass(frozen=True)
class AnnotationResponse:
    task_id: str
    annotator_id: str
    verdict_kind: VerdictKind
    selections: frozenset[int] = frozenset()
    submitted_at: float = 0.0

    def __post_init__(self) -> None:
        if self.verdict_kind is VerdictKind.SELECTIONS and not self.selections:
            raise ValueError("selections verdict requires a non-empty set")
        if self.verdict_kind is not VerdictKind.SELECTIONS and self.selections:
            raise ValueError("only a selections verdict may carry indices")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator_id": self.annotator_id,
            "verdict_kind": self.verdict_kind.value,
            "selections": sorted(self.selections),
            "submitted_at": self.submitted_at,
        }


@dataclass(frozen=True)
class GoldRecord:
    qa_id: str
    gold_ids: frozenset[int]
    annotator_count: int
    any_nota: bool = False
    any_not_understood: bool = False

    @property
    def flagged(self) -> bool:
        return not self.gold_ids

    def to_dict(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "gold_ids": sorted(self.gold_ids),
            "annotator_count": self.annotator_count,
            "any_nota": self.any_nota,
            "any_not_understood": self.any_not_understood,
        }


def create_tasks(pairs: Sequence[QAPair], articles_by_id: Mapping[str, Article]) -> tuple[list[AnnotationTask], list[str]]:
    """One task per pair; returns (tasks, per-pair errors for missing articles)."""
    tasks: list[AnnotationTask] = []
    errors: list[str] = []
    for pair in pairs:
        article = articles_by_id.get(pair.article_id)
        if article is None:
            errors.append(f"missing article {pair.article_id!r} for pair {pair.id!r}")
            continue
        text_by_index = {b.index: b.text for b in article.blocks if b.kind is BlockKind.PARAGRAPH}
        paragraphs = tuple((i, text_by_index[i]) for i in pair.context_paragraph_ids)
        tasks.append(
            AnnotationTask(
                task_id=pair.id,
                qa_id=pair.id,
                language=article.language,
                title=article.title,
                question=pair.question,
                paragraphs=paragraphs,
            )
        )
    return tasks, errors


class AnnotationStore:
    """Tasks plus an append-only response log; one response per (task, annotator),
    resubmission replaces. Writes are serialized; reads take snapshots.
    """

    def __init__(self, log_path: str | Path | None = None, required_annotators: int = 1):
        self._lock = threading.Lock()
        self._tasks: dict[str, AnnotationTask] = {}
        self._responses: dict[tuple[str, str], AnnotationResponse] = {}
        self.required_annotators = required_annotators
        self.log_path = Path(log_path) if log_path else None
        if self.log_path and self.log_path.exists():
            self._replay_log()

    def _replay_log(self) -> None:
        with self.log_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                resp = AnnotationResponse(
                    task_id=d["task_id"],
                    annotator_id=d["annotator_id"],
                    verdict_kind=VerdictKind(d["verdict_kind"]),
                    selections=frozenset(d.get("selections", [])),
                    submitted_at=d.get("submitted_at", 0.0),
                )
                self._responses[(resp.task_id, resp.annotator_id)] = resp

    def add_tasks(self, tasks: Sequence[AnnotationTask]) -> None:
        with self._lock:
            for task in tasks:
                self._tasks[task.task_id] = task

    def task(self, task_id: str) -> AnnotationTask | None:
        task = self._tasks.get(task_id)
        if task is None:
            return None
        return self._with_status(task)

    def _with_status(self, task: AnnotationTask) -> AnnotationTask:
        responders = {a for (t, a) in self._responses if t == task.task_id}
        status = TaskStatus.DONE if len(responders) >= self.required_annotators else TaskStatus.OPEN
        if status is task.status:
            return task
        return AnnotationTask(
            task_id=task.task_id,
            qa_id=task.qa_id,
            language=task.language,
            title=task.title,
            question=task.question,
            paragraphs=task.paragraphs,
            status=status,
        )

    def open_tasks_for(self, annotator_id: str, limit: int = 8) -> list[AnnotationTask]:
        with self._lock:
            out = []
            for task_id in sorted(self._tasks):
                if (task_id, annotator_id) in self._responses:
                    continue
                task = self._with_status(self._tasks[task_id])
                if task.status is TaskStatus.OPEN:
                    out.append(task)
                if len(out) >= limit:
                    break
            return out

    def submit_response(self, resp: AnnotationResponse) -> AnnotationResponse:
        with self._lock:
            task = self._tasks.get(resp.task_id)
            if task is None:
                raise KeyError(f"unknown task {resp.task_id!r}")
            valid_indices = {i for i, _ in task.paragraphs}
            if not resp.selections <= valid_indices:
                bad = sorted(resp.selections - valid_indices)
                raise ValueError(f"selection indices {bad} outside task paragraphs")
            if resp.submitted_at == 0.0:
                resp = AnnotationResponse(
                    task_id=resp.task_id,
                    annotator_id=resp.annotator_id,
                    verdict_kind=resp.verdict_kind,
                    selections=resp.selections,
                    submitted_at=time.time(),
                )
            self._responses[(resp.task_id, resp.annotator_id)] = resp
            if self.log_path:
                self.log_path.parent.mkdir(parents=True, exist_ok=True)
                with self.log_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(resp.to_dict(), ensure_ascii=False) + "\n")
            return resp

    def responses_for_task(self, task_id: str) -> list[AnnotationResponse]:
        with self._lock:
            return [r for (t, _), r in sorted(self._responses.items()) if t == task_id]

    def selections_by_annotator(self, annotator_id: str) -> dict[str, frozenset[int]]:
        with self._lock:
            return {
                t: r.selections
                for (t, a), r in self._responses.items()
                if a == annotator_id
            }

    def task_sizes(self) -> dict[str, list[int]]:
        with self._lock:
            return {t: [i for i, _ in task.paragraphs] for t, task in self._tasks.items()}

    def derive_all_gold(self) -> list[GoldRecord]:
        with self._lock:
            by_task: dict[str, list[AnnotationResponse]] = {}
            for (t, _), resp in self._responses.items():
                by_task.setdefault(t, []).append(resp)
        records = []
        for task_id in sorted(by_task):
            task = self._tasks.get(task_id)
            qa_id = task.qa_id if task else task_id
            records.append(derive_gold(qa_id, by_task[task_id]))
        return records


def derive_gold(qa_id: str, responses: Sequence[AnnotationResponse]) -> GoldRecord:
    """Union of all selection verdicts; NOTA/NotUnderstood contribute nothing."""
    if not responses:
        raise ValueError("derive_gold requires at least one response")
    gold: set[int] = set()
    any_nota = False
    any_nu = False
    for resp in responses:
        if resp.verdict_kind is VerdictKind.SELECTIONS:
            gold |= resp.selections
        elif resp.verdict_kind is VerdictKind.NOTA:
            any_nota = True
        else:
            any_nu = True
    return GoldRecord(
        qa_id=qa_id,
        gold_ids=frozenset(gold),
        annotator_count=len({r.annotator_id for r in responses}),
        any_nota=any_nota,
        any_not_understood=any_nu,
    )


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    p_o: float
    p_e: float
    item_count: int


class DegenerateAgreementError(ValueError):
    """Both raters constant and identical is the only way p_e can reach 1."""


def cohen_kappa(
    a_selections: Mapping[str, frozenset[int] | set[int]],
    b_selections: Mapping[str, frozenset[int] | set[int]],
    tasks: Mapping[str, Sequence[int]],
) -> KappaResult:
    """Chance-corrected agreement over (task, paragraph) binary decisions.

    Both annotators must have responded to every task in ``tasks``.
    """
    missing = [t for t in tasks if t not in a_selections or t not in b_selections]
    if missing:
        raise ValueError(f"annotators did not both respond to tasks: {sorted(missing)}")
    n = 0
    agree = 0
    a_pos = 0
    b_pos = 0
    for task_id, indices in tasks.items():
        sel_a = set(a_selections[task_id])
        sel_b = set(b_selections[task_id])
        for index in indices:
            la = 1 if index in sel_a else 0
            lb = 1 if index in sel_b else 0
            n += 1
            agree += la == lb
            a_pos += la
            b_pos += lb
    if n == 0:
        raise ValueError("no (task, paragraph) items to compare")
    p_o = agree / n
    pa1, pb1 = a_pos / n, b_pos / n
    p_e = pa1 * pb1 + (1 - pa1) * (1 - pb1)
    if math.isclose(p_e, 1.0):
        if math.isclose(p_o, 1.0):
            return KappaResult(kappa=1.0, p_o=p_o, p_e=p_e, item_count=n)
        raise DegenerateAgreementError("p_e = 1 with disagreement present")
    kappa = (p_o - p_e) / (1 - p_e)
    return KappaResult(kappa=kappa, p_o=p_o, p_e=p_e, item_count=n)


def evaluate_against_gold(
    candidate: Mapping[str, frozenset[int] | set[int]],
    gold_records: Sequence[GoldRecord],
    context_by_qa: Mapping[str, Sequence[int]],
    scorer_id: str = "",
) -> EvalReport:
    """Score a candidate labeling (silver or model) against union gold.

    Flagged records (empty gold) are excluded; everything else reuses the
    pooled instance metrics and SR.
    """
    usable = [g for g in gold_records if not g.flagged]
    if not usable:
        raise ValueError("all gold records are flagged; nothing to evaluate")
    predictions: list[int] = []
    labels: list[int] = []
    predicted_sets: dict[str, set[int]] = {}
    reference_sets: dict[str, set[int]] = {}
    for gold in usable:
        context = context_by_qa[gold.qa_id]
        cand = set(candidate.get(gold.qa_id, set()))
        predicted_sets[gold.qa_id] = cand & set(context)
        reference_sets[gold.qa_id] = set(gold.gold_ids)
        for index in context:
            predictions.append(1 if index in cand else 0)
            labels.append(1 if index in gold.gold_ids else 0)
    report = classification_report(predictions, labels)
    report.success_rate = success_rate(predicted_sets, reference_sets)
    report.n_questions = len(usable)
    report.scorer_id = scorer_id
    return report


# --- HTTP API ------------------------------------------------------------

def create_app(store: AnnotationStore, static_dir: str | Path | None = None):
    """FastAPI app exposing the annotation API plus the static UI bundle."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="nfqa goldserve")

    def error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": code, "message": message})

    @app.get("/api/tasks")
    def list_tasks(annotator: str, limit: int = 8):
        tasks = store.open_tasks_for(annotator, limit=limit)
        return {"tasks": [t.to_payload() for t in tasks]}

    @app.get("/api/task/{task_id}")
    def get_task(task_id: str):
        task = store.task(task_id)
        if task is None:
            return error(404, "not_found", f"unknown task {task_id!r}")
        return task.to_payload()

    @app.post("/api/task/{task_id}/response")
    def post_response(task_id: str, body: dict):
        try:
            verdict = body.get("verdict", {})
            resp = AnnotationResponse(
                task_id=task_id,
                annotator_id=str(body["annotator_id"]),
                verdict_kind=VerdictKind(verdict.get("kind", "")),
                selections=frozenset(verdict.get("selections", [])),
            )
        except (KeyError, ValueError) as exc:
            return error(422, "invalid_verdict", str(exc))
        try:
            stored = store.submit_response(resp)
        except KeyError as exc:
            return error(404, "not_found", str(exc))
        except ValueError as exc:
            return error(422, "invalid_selection", str(exc))
        return {"stored": stored.to_dict(), "task_status": store.task(task_id).status.value}

    @app.get("/api/export/gold")
    def export_gold():
        return {"gold": [g.to_dict() for g in store.derive_all_gold()]}

    @app.get("/api/iaa")
    def iaa(a: str, b: str):
        sel_a = store.selections_by_annotator(a)
        sel_b = store.selections_by_annotator(b)
        shared = sorted(set(sel_a) & set(sel_b))
        if not shared:
            return error(422, "no_shared_tasks", f"annotators {a!r} and {b!r} share no tasks")
        sizes = store.task_sizes()
        try:
            result = cohen_kappa(
                {t: sel_a[t] for t in shared},
                {t: sel_b[t] for t in shared},
                {t: sizes[t] for t in shared},
            )
        except DegenerateAgreementError as exc:
            return error(422, "degenerate", str(exc))
        return {
            "kappa": result.kappa,
            "p_o": result.p_o,
            "p_e": result.p_e,
            "item_count": result.item_count,
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
