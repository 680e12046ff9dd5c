"""Core domain types and the JSONL corpus format.

Everything downstream (curation, instance building, scoring, evaluation)
works with the immutable value types defined here. Corpora are persisted
as UTF-8 JSONL, one record per line, one file per record type per
language.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

_WHITESPACE_RE = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """NFC-normalize, collapse whitespace runs to single spaces, strip ends.

    Idempotent; empty input yields empty output.
    """
    text = unicodedata.normalize("NFC", raw)
    return _WHITESPACE_RE.sub(" ", text).strip()


def article_id_for_url(url: str) -> str:
    """Stable 128-bit hex id for an article URL (deterministic dedup key)."""
    normalized = normalize_text(url)
    return hashlib.blake2b(normalized.encode("utf-8"), digest_size=16).hexdigest()


class BlockKind(str, Enum):
    PARAGRAPH = "paragraph"
    SUBHEADING = "subheading"


class Split(str, Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class LanguageProfile:
    """Per-language curation configuration.

    ``terminators`` are the interrogative end symbols for the language
    (a trailing "?" or its local equivalent). ``calendar_offset_years``
    shifts article-displayed years into the Gregorian calendar (621 for
    Solar Hijri languages).
    """

    code: str
    terminators: frozenset[str] = frozenset("?")
    exclusion_phrases: tuple[str, ...] = ()
    stopwords: tuple[str, ...] = ()
    tokenizer_id: str = "whitespace"
    segmenter_id: str = "rule"
    calendar_offset_years: int = 0

    def __post_init__(self) -> None:
        if not self.code:
            raise ValueError("language code must be non-empty")
        if not self.terminators:
            raise ValueError(f"profile {self.code!r} has no terminators")
        if self.calendar_offset_years < 0:
            raise ValueError("calendar_offset_years must be >= 0")


@dataclass(frozen=True)
class Block:
    kind: BlockKind
    text: str
    index: int


@dataclass(frozen=True)
class Article:
    id: str
    url: str
    title: str
    language: str
    fetched_at: str
    blocks: tuple[Block, ...]
    published_year: int | None = None

    @property
    def paragraph_count(self) -> int:
        return sum(1 for b in self.blocks if b.kind is BlockKind.PARAGRAPH)

    def paragraphs(self) -> list[Block]:
        return [b for b in self.blocks if b.kind is BlockKind.PARAGRAPH]


@dataclass(frozen=True)
class QAPair:
    id: str
    article_id: str
    question: str
    context_paragraph_ids: tuple[int, ...]
    silver_ids: frozenset[int]
    split: Split = Split.UNASSIGNED

    def __post_init__(self) -> None:
        if not self.silver_ids:
            raise ValueError(f"pair {self.id!r} has empty silver_ids")
        if not self.silver_ids <= set(self.context_paragraph_ids):
            raise ValueError(f"pair {self.id!r}: silver_ids not a subset of context")

    def labels(self) -> list[int]:
        """Binary label per context paragraph, in context order."""
        return [1 if i in self.silver_ids else 0 for i in self.context_paragraph_ids]

    def with_split(self, split: Split) -> "QAPair":
        return replace(self, split=split)


@dataclass(frozen=True)
class CorpusManifest:
    language_counts: dict[str, int]
    article_count: int
    qa_count: int
    split_ratios: tuple[float, float, float] | None = None
    seed: int | None = None


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_article(article: Article, known_languages: Iterable[str] | None = None) -> ValidationReport:
    """Collect structural violations; an empty report means the article is valid."""
    report = ValidationReport()
    indices = [b.index for b in article.blocks]
    seen: set[int] = set()
    for i in indices:
        if i in seen:
            report.violations.append(f"duplicate index {i}")
        seen.add(i)
    if sorted(seen) != list(range(len(article.blocks))) and len(seen) == len(indices):
        report.violations.append("block indices not contiguous from 0")
    for b in article.blocks:
        if not b.text.strip():
            report.violations.append(f"empty block at index {b.index}")
    if known_languages is not None and article.language not in set(known_languages):
        report.violations.append(f"unknown language {article.language!r}")
    return report


# --- JSONL serialization -------------------------------------------------

def article_to_dict(a: Article) -> dict:
    d = {
        "id": a.id,
        "url": a.url,
        "title": a.title,
        "language": a.language,
        "fetched_at": a.fetched_at,
        "blocks": [{"kind": b.kind.value, "text": b.text, "index": b.index} for b in a.blocks],
    }
    if a.published_year is not None:
        d["published_year"] = a.published_year
    return d


def article_from_dict(d: dict) -> Article:
    return Article(
        id=d["id"],
        url=d["url"],
        title=d["title"],
        language=d["language"],
        fetched_at=d["fetched_at"],
        blocks=tuple(
            Block(kind=BlockKind(b["kind"]), text=b["text"], index=b["index"]) for b in d["blocks"]
        ),
        published_year=d.get("published_year"),
    )


def qapair_to_dict(p: QAPair) -> dict:
    return {
        "id": p.id,
        "article_id": p.article_id,
        "question": p.question,
        "context_paragraph_ids": list(p.context_paragraph_ids),
        "silver_ids": sorted(p.silver_ids),
        "split": p.split.value,
    }


def qapair_from_dict(d: dict) -> QAPair:
    return QAPair(
        id=d["id"],
        article_id=d["article_id"],
        question=d["question"],
        context_paragraph_ids=tuple(d["context_paragraph_ids"]),
        silver_ids=frozenset(d["silver_ids"]),
        split=Split(d.get("split", "unassigned")),
    )


def manifest_to_dict(m: CorpusManifest) -> dict:
    return {
        "language_counts": dict(sorted(m.language_counts.items())),
        "article_count": m.article_count,
        "qa_count": m.qa_count,
        "split_ratios": list(m.split_ratios) if m.split_ratios else None,
        "seed": m.seed,
    }


def manifest_from_dict(d: dict) -> CorpusManifest:
    ratios = d.get("split_ratios")
    return CorpusManifest(
        language_counts=dict(d["language_counts"]),
        article_count=d["article_count"],
        qa_count=d["qa_count"],
        split_ratios=tuple(ratios) if ratios else None,
        seed=d.get("seed"),
    )


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write records as UTF-8 JSONL. Returns the number of lines written."""
    n = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


class Corpus:
    """On-disk corpus layout: one articles/qapairs JSONL file per language.

    Single-writer/multi-reader discipline; all records are immutable values.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def articles_path(self, language: str) -> Path:
        return self.root / f"articles.{language}.jsonl"

    def qapairs_path(self, language: str) -> Path:
        return self.root / f"qapairs.{language}.jsonl"

    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def languages(self) -> list[str]:
        langs = set()
        for p in self.root.glob("articles.*.jsonl"):
            langs.add(p.name.split(".")[1])
        for p in self.root.glob("qapairs.*.jsonl"):
            langs.add(p.name.split(".")[1])
        return sorted(langs)

    def write_articles(self, language: str, articles: Iterable[Article]) -> int:
        return write_jsonl(self.articles_path(language), (article_to_dict(a) for a in articles))

    def read_articles(self, language: str) -> list[Article]:
        path = self.articles_path(language)
        if not path.exists():
            return []
        return [article_from_dict(d) for d in read_jsonl(path)]

    def write_qapairs(self, language: str, pairs: Iterable[QAPair]) -> int:
        return write_jsonl(self.qapairs_path(language), (qapair_to_dict(p) for p in pairs))

    def read_qapairs(self, language: str) -> list[QAPair]:
        path = self.qapairs_path(language)
        if not path.exists():
            return []
        return [qapair_from_dict(d) for d in read_jsonl(path)]

    def write_manifest(self, manifest: CorpusManifest) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path().write_text(
            json.dumps(manifest_to_dict(manifest), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    def read_manifest(self) -> CorpusManifest | None:
        path = self.manifest_path()
        if not path.exists():
            return None
        return manifest_from_dict(json.loads(path.read_text(encoding="utf-8")))

    def build_manifest(self, ratios: tuple[float, float, float] | None = None, seed: int | None = None) -> CorpusManifest:
        language_counts: dict[str, int] = {}
        article_count = 0
        qa_count = 0
        for lang in self.languages():
            arts = self.read_articles(lang)
            pairs = self.read_qapairs(lang)
            article_count += len(arts)
            qa_count += len(pairs)
            language_counts[lang] = len(pairs)
        return CorpusManifest(
            language_counts=language_counts,
            article_count=article_count,
            qa_count=qa_count,
            split_ratios=ratios,
            seed=seed,
        )
