from __future__ import annotations

import pytest

from nfqa.model import Article, Block, BlockKind, LanguageProfile


def make_article(
    specs: list[tuple[str, str]],
    article_id: str = "a1",
    url: str = "https://example.org/a1",
    title: str = "Test article",
    language: str = "en",
) -> Article:
    """Build an article from ("p"|"s", text) tuples in document order."""
    blocks = tuple(
        Block(
            kind=BlockKind.PARAGRAPH if kind == "p" else BlockKind.SUBHEADING,
            text=text,
            index=i,
        )
        for i, (kind, text) in enumerate(specs)
    )
    return Article(
        id=article_id,
        url=url,
        title=title,
        language=language,
        fetched_at="2024-01-01T00:00:00Z",
        blocks=blocks,
    )


@pytest.fixture
def en_profile() -> LanguageProfile:
    return LanguageProfile(
        code="en",
        terminators=frozenset("?"),
        exclusion_phrases=("Did you know", "Did you read this"),
    )


@pytest.fixture
def ar_profile() -> LanguageProfile:
    return LanguageProfile(code="ar", terminators=frozenset({"?", "؟"}))
