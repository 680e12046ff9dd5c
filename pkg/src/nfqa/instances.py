"""Training/inference instance construction under a token budget.

Every context paragraph of a pair yields exactly one instance, so an
article with p paragraphs and q questions yields p*q instances. Preceding
paragraphs are packed nearest-first until the budget is exhausted; the
question and the candidate paragraph are never sacrificed for context.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import Article, BlockKind, QAPair
from .textproc import TokenizerSpec, tokenize

DEFAULT_TOKEN_BUDGET = 512


@dataclass(frozen=True)
class InstanceOptions:
    token_budget: int = DEFAULT_TOKEN_BUDGET
    include_prior_context: bool = True
    include_title: bool = False
    tokenizer: TokenizerSpec = TokenizerSpec()

    def __post_init__(self) -> None:
        if self.token_budget < 16:
            raise ValueError("token_budget must be >= 16")


@dataclass(frozen=True)
class TrainingInstance:
    qa_id: str
    paragraph_index: int
    question: str
    candidate: str
    label: int
    prior: tuple[str, ...] = ()
    title: str | None = None
    truncated: bool = False

    def parts(self) -> list[str]:
        out = [self.question]
        if self.title:
            out.append(self.title)
        out.extend(self.prior)
        out.append(self.candidate)
        return out

    def text(self) -> str:
        return " ".join(self.parts())

    def to_dict(self) -> dict:
        d = {
            "qa_id": self.qa_id,
            "paragraph_index": self.paragraph_index,
            "question": self.question,
            "prior": list(self.prior),
            "candidate": self.candidate,
            "label": self.label,
        }
        if self.title is not None:
            d["title"] = self.title
        if self.truncated:
            d["truncated"] = True
        return d


def instance_from_dict(d: dict) -> TrainingInstance:
    return TrainingInstance(
        qa_id=d["qa_id"],
        paragraph_index=d["paragraph_index"],
        question=d["question"],
        candidate=d["candidate"],
        label=d["label"],
        prior=tuple(d.get("prior", [])),
        title=d.get("title"),
        truncated=d.get("truncated", False),
    )


def build_instances(pair: QAPair, article: Article, opts: InstanceOptions = InstanceOptions()) -> list[TrainingInstance]:
    """One instance per context paragraph, labels from silver membership."""
    if pair.article_id != article.id:
        raise ValueError(f"pair {pair.id!r} does not belong to article {article.id!r}")
    text_by_index = {b.index: b.text for b in article.blocks if b.kind is BlockKind.PARAGRAPH}

    def count(text: str) -> int:
        return len(tokenize(text, opts.tokenizer))

    question_tokens = count(pair.question)
    title = article.title if opts.include_title and article.title else None
    title_tokens = count(title) if title else 0

    instances: list[TrainingInstance] = []
    context = list(pair.context_paragraph_ids)
    for pos, paragraph_index in enumerate(context):
        candidate = text_by_index[paragraph_index]
        candidate_tokens = count(candidate)
        truncated = False

        used = question_tokens + candidate_tokens
        inst_title = title
        if inst_title and used + title_tokens <= opts.token_budget:
            used += title_tokens
        else:
            inst_title = None

        if question_tokens + candidate_tokens > opts.token_budget:
            # degenerate case: keep the question whole, tail-truncate the candidate
            keep = opts.token_budget - question_tokens
            candidate = " ".join(tokenize(candidate, opts.tokenizer)[: max(keep, 1)])
            truncated = True
            used = question_tokens + count(candidate)
            inst_title = None

        prior: list[str] = []
        if opts.include_prior_context and not truncated:
            for prev_index in reversed(context[:pos]):
                prev_text = text_by_index[prev_index]
                prev_tokens = count(prev_text)
                if used + prev_tokens > opts.token_budget:
                    break
                prior.append(prev_text)
                used += prev_tokens
            prior.reverse()  # document order

        instances.append(
            TrainingInstance(
                qa_id=pair.id,
                paragraph_index=paragraph_index,
                question=pair.question,
                candidate=candidate,
                label=1 if paragraph_index in pair.silver_ids else 0,
                prior=tuple(prior),
                title=inst_title,
                truncated=truncated,
            )
        )
    return instances


def build_all_instances(
    pairs: Iterable[QAPair],
    articles_by_id: dict[str, Article],
    opts: InstanceOptions = InstanceOptions(),
) -> list[TrainingInstance]:
    out: list[TrainingInstance] = []
    for pair in pairs:
        out.extend(build_instances(pair, articles_by_id[pair.article_id], opts))
    return out
