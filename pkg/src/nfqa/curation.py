"""Silver-label curation: question detection, QA pair extraction, splits, stats.

A QA pair is emitted for every subheading that ends in the language's
interrogative terminator and is not boilerplate (exclusion lexicon). Its
silver answer is the run of paragraphs between that subheading and the
next subheading of any kind; the context is every paragraph of the
article, with all subheadings omitted.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .model import Article, BlockKind, LanguageProfile, QAPair, Split
from .textproc import TokenizerSpec, segment_sentences, tokenize


def is_interrogative(subheading: str, profile: LanguageProfile) -> bool:
    """True iff the last non-whitespace code point is an interrogative terminator."""
    stripped = subheading.rstrip()
    return bool(stripped) and stripped[-1] in profile.terminators


def is_excluded(question: str, profile: LanguageProfile) -> bool:
    """True iff the question contains any exclusion-lexicon phrase (substring)."""
    return any(phrase in question for phrase in profile.exclusion_phrases)


def extract_qa_pairs(article: Article, profile: LanguageProfile) -> list[QAPair]:
    """One pair per non-excluded interrogative subheading; empty spans dropped."""
    context_ids = tuple(b.index for b in article.blocks if b.kind is BlockKind.PARAGRAPH)
    pairs: list[QAPair] = []
    blocks = article.blocks
    for pos, block in enumerate(blocks):
        if block.kind is not BlockKind.SUBHEADING:
            continue
        if not is_interrogative(block.text, profile):
            continue
        if is_excluded(block.text, profile):
            continue
        silver: set[int] = set()
        for nxt in blocks[pos + 1 :]:
            if nxt.kind is BlockKind.SUBHEADING:
                break
            silver.add(nxt.index)
        if not silver:
            continue
        pairs.append(
            QAPair(
                id=f"{article.id}:{block.index}",
                article_id=article.id,
                question=block.text,
                context_paragraph_ids=context_ids,
                silver_ids=frozenset(silver),
            )
        )
    return pairs


@dataclass(frozen=True)
class SplitRatios:
    train: float = 0.7
    dev: float = 0.2
    test: float = 0.1

    def __post_init__(self) -> None:
        for value in (self.train, self.dev, self.test):
            if not 0.0 <= value <= 1.0:
                raise ValueError("split ratios must lie in [0, 1]")
        if abs(self.train + self.dev + self.test - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")


def _split_key(article_id: str, seed: int) -> str:
    return hashlib.blake2b(f"{seed}:{article_id}".encode("utf-8"), digest_size=16).hexdigest()


def split_dataset(pairs: Sequence[QAPair], ratios: SplitRatios, seed: int) -> list[QAPair]:
    """Assign splits at article granularity, deterministically for a given seed.

    Articles are ordered by a seeded hash of their id and partitioned by
    exact quota (largest remainder), so realized article fractions match
    the ratios as closely as integer counts allow.
    """
    if any(p.split is not Split.UNASSIGNED for p in pairs):
        raise ValueError("split_dataset requires all pairs unassigned")
    article_ids = sorted({p.article_id for p in pairs})
    ordered = sorted(article_ids, key=lambda a: (_split_key(a, seed), a))
    n = len(ordered)
    quotas = _quotas(n, (ratios.train, ratios.dev, ratios.test))
    assignment: dict[str, Split] = {}
    cursor = 0
    for split, count in zip((Split.TRAIN, Split.DEV, Split.TEST), quotas):
        for article_id in ordered[cursor : cursor + count]:
            assignment[article_id] = split
        cursor += count
    return [p.with_split(assignment[p.article_id]) for p in pairs]


def _quotas(n: int, fractions: Sequence[float]) -> list[int]:
    floors = [int(n * f) for f in fractions]
    remainders = [n * f - fl for f, fl in zip(fractions, floors)]
    short = n - sum(floors)
    order = sorted(range(len(fractions)), key=lambda i: -remainders[i])
    for i in order[:short]:
        floors[i] += 1
    return floors


@dataclass
class StatsReport:
    """Corpus-level statistics with Table-style row labels in to_rows()."""

    n_languages: int = 0
    n_qa_pairs: int = 0
    n_articles: int = 0
    n_unique_questions: int = 0
    avg_article_len_words: float = 0.0
    avg_paragraph_len_words: float = 0.0
    avg_answer_len_words: float = 0.0
    avg_question_len_words: float = 0.0
    avg_article_len_sentences: float = 0.0
    avg_paragraph_len_sentences: float = 0.0
    avg_answer_len_sentences: float = 0.0
    avg_question_len_sentences: float = 0.0
    avg_paragraphs_per_article: float = 0.0
    avg_paragraphs_per_answer: float = 0.0
    per_language_qa: dict[str, int] = field(default_factory=dict)

    def to_rows(self) -> list[tuple[str, float]]:
        return [
            ("Number of Languages", self.n_languages),
            ("Number of QA pairs", self.n_qa_pairs),
            ("Number of Articles", self.n_articles),
            ("Number of Unique Questions", self.n_unique_questions),
            ("Avg. Article Length (Word)", self.avg_article_len_words),
            ("Avg. Paragraph Length (Word)", self.avg_paragraph_len_words),
            ("Avg. Answer Length (Word)", self.avg_answer_len_words),
            ("Avg. Question Length (Word)", self.avg_question_len_words),
            ("Avg. Article Length (Sentence)", self.avg_article_len_sentences),
            ("Avg. Paragraph Length (Sentence)", self.avg_paragraph_len_sentences),
            ("Avg. Answer Length (Sentence)", self.avg_answer_len_sentences),
            ("Avg. Question Length (Sentence)", self.avg_question_len_sentences),
            ("Avg. Paragraphs per Article", self.avg_paragraphs_per_article),
            ("Avg. Paragraphs per Answer", self.avg_paragraphs_per_answer),
        ]

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "per_language_qa"}
        d["per_language_qa"] = dict(sorted(self.per_language_qa.items()))
        return d


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def corpus_stats(
    articles_by_language: dict[str, Sequence[Article]],
    pairs_by_language: dict[str, Sequence[QAPair]],
    spec: TokenizerSpec = TokenizerSpec(),
    segmenter_id: str = "rule",
) -> StatsReport:
    """Compute the full statistics table over an in-memory corpus."""
    report = StatsReport()
    article_words: list[int] = []
    article_sents: list[int] = []
    para_words: list[int] = []
    para_sents: list[int] = []
    answer_words: list[int] = []
    answer_sents: list[int] = []
    question_words: list[int] = []
    question_sents: list[int] = []
    paras_per_article: list[int] = []
    paras_per_answer: list[int] = []
    unique_questions: set[str] = set()

    def words(text: str) -> int:
        return len(tokenize(text, spec))

    def sents(text: str) -> int:
        return len(segment_sentences(text, segmenter_id))

    article_index: dict[str, Article] = {}
    for language, articles in articles_by_language.items():
        for article in articles:
            article_index[article.id] = article
            paragraphs = article.paragraphs()
            paras_per_article.append(len(paragraphs))
            article_words.append(sum(words(b.text) for b in article.blocks))
            article_sents.append(sum(sents(b.text) for b in article.blocks))
            for p in paragraphs:
                para_words.append(words(p.text))
                para_sents.append(sents(p.text))
        report.n_articles += len(articles)

    for language, pairs in pairs_by_language.items():
        report.per_language_qa[language] = len(pairs)
        report.n_qa_pairs += len(pairs)
        for pair in pairs:
            unique_questions.add(pair.question)
            question_words.append(words(pair.question))
            question_sents.append(sents(pair.question))
            paras_per_answer.append(len(pair.silver_ids))
            article = article_index.get(pair.article_id)
            if article is not None:
                text_by_index = {b.index: b.text for b in article.blocks}
                answer_texts = [text_by_index[i] for i in sorted(pair.silver_ids) if i in text_by_index]
                answer_words.append(sum(words(t) for t in answer_texts))
                answer_sents.append(sum(sents(t) for t in answer_texts))

    report.n_languages = len({l for l, ps in pairs_by_language.items() if ps})
    report.n_unique_questions = len(unique_questions)
    report.avg_article_len_words = _mean(article_words)
    report.avg_paragraph_len_words = _mean(para_words)
    report.avg_answer_len_words = _mean(answer_words)
    report.avg_question_len_words = _mean(question_words)
    report.avg_article_len_sentences = _mean(article_sents)
    report.avg_paragraph_len_sentences = _mean(para_sents)
    report.avg_answer_len_sentences = _mean(answer_sents)
    report.avg_question_len_sentences = _mean(question_sents)
    report.avg_paragraphs_per_article = _mean(paras_per_article)
    report.avg_paragraphs_per_answer = _mean(paras_per_answer)
    return report


@dataclass(frozen=True)
class NgramRow:
    ngram: str
    count: int
    percent: float


def ngram_table(
    questions: Sequence[str],
    n: int,
    spec: TokenizerSpec = TokenizerSpec(),
    top: int | None = None,
) -> list[NgramRow]:
    """Most frequent lowercased token n-grams across questions.

    Percent is relative to the number of questions long enough to contain
    at least one n-gram.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter[str] = Counter()
    eligible = 0
    for question in questions:
        tokens = [t.casefold() for t in tokenize(question, spec)]
        if len(tokens) < n:
            continue
        eligible += 1
        seen_here = {" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}
        counts.update(seen_here)
    rows = [
        NgramRow(ngram=g, count=c, percent=c / eligible)
        for g, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return rows[:top] if top is not None else rows
