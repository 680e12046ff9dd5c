"""Tokenization, sentence segmentation, and stopword derivation.

Whitespace tokenization is the default everywhere (word counts, TF-IDF,
token budgets). Languages without whitespace word boundaries go through
the plugin protocol: a child process receiving one input line per text
and answering one output line per result.
"""

from __future__ import annotations

import subprocess
import unicodedata
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

STOPWORD_LIST_SIZE = 260

# Plugin protocol separators: tokens tab-separated, sentences separated
# by an ASCII unit separator so sentence-internal whitespace survives.
UNIT_SEP = "\x1f"


class TokenizerKind(str, Enum):
    WHITESPACE = "whitespace"
    PLUGIN = "plugin"


@dataclass(frozen=True)
class TokenizerSpec:
    id: str = "whitespace"
    kind: TokenizerKind = TokenizerKind.WHITESPACE
    plugin_command: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind is TokenizerKind.PLUGIN and not self.plugin_command:
            raise ValueError("plugin tokenizer requires a command")


class StopwordSource(str, Enum):
    PROVIDED = "provided"
    TOP260_DERIVED = "top260_derived"


@dataclass(frozen=True)
class StopwordList:
    language: str
    words: tuple[str, ...]
    source: StopwordSource


class PluginError(RuntimeError):
    pass


def _run_plugin(command: Sequence[str], line: str) -> str:
    proc = subprocess.run(
        list(command),
        input=line + "\n",
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise PluginError(
            f"plugin {list(command)!r} exited with status {proc.returncode}: {proc.stderr.strip()}"
        )
    return proc.stdout.rstrip("\n")


def tokenize(text: str, spec: TokenizerSpec = TokenizerSpec()) -> list[str]:
    """Split into tokens; punctuation stays attached to its token."""
    if spec.kind is TokenizerKind.WHITESPACE:
        return text.split()
    out = _run_plugin(spec.plugin_command, text)
    return [t for t in out.split("\t") if t]


# Sentence-final punctuation for the rule-based segmenter: western, danda,
# Arabic question mark, CJK, Armenian, Ethiopic full stop.
_SENTENCE_FINAL = ".!?।॥؟。！？۔܀።"


def segment_sentences(
    text: str,
    segmenter_id: str = "rule",
    plugin_command: Sequence[str] | None = None,
    extra_terminators: Iterable[str] = (),
) -> list[str]:
    """Split into sentences after sentence-final punctuation + whitespace.

    Concatenating the output (with single spaces) reconstructs the input
    modulo inter-sentence whitespace.
    """
    if segmenter_id == "plugin":
        if not plugin_command:
            raise PluginError("plugin segmenter requires a command")
        out = _run_plugin(plugin_command, text)
        return [s for s in out.split(UNIT_SEP) if s]
    finals = set(_SENTENCE_FINAL) | set(extra_terminators)
    sentences: list[str] = []
    current: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        current.append(ch)
        if ch in finals and (i + 1 >= n or text[i + 1].isspace()):
            sentence = "".join(current).strip()
            if sentence:
                sentences.append(sentence)
            current = []
            # skip the inter-sentence whitespace run
            i += 1
            while i < n and text[i].isspace():
                i += 1
            continue
        i += 1
    tail = "".join(current).strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def trim_punct(token: str) -> str:
    """Strip leading/trailing punctuation and symbol characters."""
    start = 0
    end = len(token)
    while start < end and _is_punct_char(token[start]):
        start += 1
    while end > start and _is_punct_char(token[end - 1]):
        end -= 1
    return token[start:end]


def strip_punct_and_stopwords(tokens: Iterable[str], stopwords: Iterable[str]) -> list[str]:
    """Drop pure-punctuation tokens and stopwords; trim punctuation off the rest.

    Stopword matching is on the case-folded, punctuation-trimmed form.
    """
    stopset = {w.casefold() for w in stopwords}
    out: list[str] = []
    for token in tokens:
        core = trim_punct(token)
        if not core:
            continue
        if core.casefold() in stopset:
            continue
        out.append(core)
    return out


def derive_stopwords(
    texts: Iterable[str],
    language: str,
    provided: Sequence[str] = (),
    spec: TokenizerSpec = TokenizerSpec(),
) -> StopwordList:
    """Provided list wins; otherwise the 260 most frequent tokens.

    Derived entries are case-folded and punctuation-trimmed; ties break by
    frequency descending, then codepoint order, so the result is
    deterministic.
    """
    if provided:
        return StopwordList(language=language, words=tuple(provided), source=StopwordSource.PROVIDED)
    counts: Counter[str] = Counter()
    for text in texts:
        for token in tokenize(text, spec):
            core = trim_punct(token).casefold()
            if core:
                counts[core] += 1
    if not counts:
        raise ValueError(f"no tokens to derive stopwords for {language!r}")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    top = tuple(w for w, _ in ranked[:STOPWORD_LIST_SIZE])
    return StopwordList(language=language, words=top, source=StopwordSource.TOP260_DERIVED)
