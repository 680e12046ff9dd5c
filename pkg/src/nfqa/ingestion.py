"""Polite crawling and HTML-to-Article extraction.

The crawler is a BFS over anchor links with a visited set, a per-host
delay gate, and a page cap. Time and transport are injected so tests can
run with a fake clock and a fixture fetcher. Archive mode rewrites URLs
through the Wayback snapshot service and works through the frontier
oldest-snapshot-first.
"""

from __future__ import annotations

import heapq
import json
import re
import time as _time
from collections import deque
from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Iterable, Protocol
from urllib.parse import urljoin, urlsplit
from urllib.request import Request, urlopen

from .model import Article, Block, BlockKind, LanguageProfile, article_id_for_url, normalize_text

DEFAULT_USER_AGENT = "nfqa-crawler/0.1"
ARCHIVE_PREFIX = "https://web.archive.org/web/"
_ARCHIVE_TS_RE = re.compile(r"^https?://web\.archive\.org/web/(\d+)[a-z_]*/(.+)$")


class ArchiveMode:
    LIVE = "live"
    EARLIEST_SNAPSHOT_FIRST = "earliest_snapshot_first"


@dataclass(frozen=True)
class CrawlConfig:
    seed_urls: tuple[str, ...]
    min_delay_ms: int = 1000
    max_pages: int = 100
    allowed_host_suffixes: tuple[str, ...] = ()
    archive_mode: str = ArchiveMode.LIVE
    user_agent: str = DEFAULT_USER_AGENT

    def __post_init__(self) -> None:
        if self.max_pages < 1:
            raise ValueError("max_pages must be >= 1")
        if self.min_delay_ms < 0:
            raise ValueError("min_delay_ms must be >= 0")


@dataclass(frozen=True)
class RawPage:
    url: str
    status_code: int
    body: bytes
    fetched_at: str
    error: str | None = None


@dataclass
class CrawlStats:
    fetched: int = 0
    skipped: int = 0
    errors: int = 0


class Clock(Protocol):
    def monotonic(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def monotonic(self) -> float:
        return _time.monotonic()

    def sleep(self, seconds: float) -> None:
        _time.sleep(seconds)


Fetcher = Callable[[str], RawPage]


def http_fetch(url: str, user_agent: str = DEFAULT_USER_AGENT, timeout: float = 30.0) -> RawPage:
    fetched_at = _now_iso()
    try:
        req = Request(url, headers={"User-Agent": user_agent})
        with urlopen(req, timeout=timeout) as resp:
            return RawPage(url=url, status_code=resp.status, body=resp.read(), fetched_at=fetched_at)
    except Exception as exc:  # network failures are recorded, not raised
        return RawPage(url=url, status_code=0, body=b"", fetched_at=fetched_at, error=str(exc))


def _now_iso() -> str:
    return _time.strftime("%Y-%m-%dT%H:%M:%SZ", _time.gmtime())


class _LinkParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.hrefs: list[str] = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value:
                    self.hrefs.append(value)


def extract_links(base_url: str, html: str) -> list[str]:
    """Absolute http(s) URLs harvested from anchor elements, fragment-stripped."""
    parser = _LinkParser()
    parser.feed(html)
    out: list[str] = []
    for href in parser.hrefs:
        absolute = urljoin(base_url, href)
        absolute = absolute.split("#", 1)[0]
        if absolute.startswith(("http://", "https://")):
            out.append(absolute)
    return out


def unwrap_archive_url(url: str) -> tuple[int | None, str]:
    """(snapshot timestamp, target URL); timestamp is None for live URLs."""
    m = _ARCHIVE_TS_RE.match(url)
    if not m:
        return None, url
    return int(m.group(1)), m.group(2)


def to_archive_url(url: str, timestamp: str = "0") -> str:
    if url.startswith(ARCHIVE_PREFIX):
        return url
    return f"{ARCHIVE_PREFIX}{timestamp}/{url}"


def _host_allowed(url: str, suffixes: tuple[str, ...]) -> bool:
    if not suffixes:
        return True
    host = urlsplit(url).netloc.lower()
    return any(host == s or host.endswith("." + s) for s in (s.lower() for s in suffixes))


class _Frontier:
    """FIFO in live mode, oldest-snapshot-first priority queue in archive mode."""

    def __init__(self, archive_first: bool):
        self.archive_first = archive_first
        self._fifo: deque[str] = deque()
        self._heap: list[tuple[int, int, str]] = []
        self._counter = 0

    def push(self, url: str) -> None:
        if self.archive_first:
            ts, _ = unwrap_archive_url(url)
            heapq.heappush(self._heap, (ts if ts is not None else 0, self._counter, url))
            self._counter += 1
        else:
            self._fifo.append(url)

    def pop(self) -> str:
        if self.archive_first:
            return heapq.heappop(self._heap)[2]
        return self._fifo.popleft()

    def __bool__(self) -> bool:
        return bool(self._heap or self._fifo)


def crawl(
    config: CrawlConfig,
    sink: Callable[[RawPage], None],
    fetch: Fetcher | None = None,
    clock: Clock | None = None,
) -> CrawlStats:
    """BFS crawl from the seeds; each URL fetched at most once.

    Inter-fetch gaps per host are >= min_delay_ms; stops at max_pages.
    Errors are recorded in the sink and counted, never raised.
    """
    if not config.seed_urls:
        raise ValueError("seed_urls must be non-empty")
    fetch = fetch or (lambda url: http_fetch(url, config.user_agent))
    clock = clock or SystemClock()
    archive = config.archive_mode == ArchiveMode.EARLIEST_SNAPSHOT_FIRST

    frontier = _Frontier(archive_first=archive)
    visited: set[str] = set()
    last_request: dict[str, float] = {}
    stats = CrawlStats()

    def target_key(url: str) -> str:
        _, target = unwrap_archive_url(url)
        return target

    for seed in config.seed_urls:
        frontier.push(to_archive_url(seed) if archive else seed)

    while frontier and stats.fetched < config.max_pages:
        url = frontier.pop()
        key = target_key(url)
        if key in visited:
            stats.skipped += 1
            continue
        visited.add(key)

        host = urlsplit(url).netloc
        delay = config.min_delay_ms / 1000.0
        if host in last_request and delay > 0:
            wait = last_request[host] + delay - clock.monotonic()
            if wait > 0:
                clock.sleep(wait)
        last_request[host] = clock.monotonic()

        page = fetch(url)
        sink(page)
        stats.fetched += 1
        if page.error is not None or page.status_code >= 400:
            stats.errors += 1
            continue

        try:
            html = page.body.decode("utf-8", errors="replace")
        except Exception:
            continue
        for link in extract_links(url, html):
            _, target = unwrap_archive_url(link)
            if not _host_allowed(target, config.allowed_host_suffixes):
                continue
            if target in visited:
                continue
            frontier.push(link)
    return stats


class JsonlPageStore:
    """Raw page sink: metadata JSONL plus verbatim body files keyed by URL id."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.meta_path = self.root / "pages.jsonl"
        self.body_dir = self.root / "bodies"
        self.body_dir.mkdir(exist_ok=True)

    def add(self, page: RawPage) -> None:
        page_id = article_id_for_url(page.url)
        (self.body_dir / f"{page_id}.html").write_bytes(page.body)
        meta = {
            "id": page_id,
            "url": page.url,
            "status_code": page.status_code,
            "fetched_at": page.fetched_at,
            "error": page.error,
        }
        with self.meta_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(meta, ensure_ascii=False) + "\n")

    def __call__(self, page: RawPage) -> None:
        self.add(page)

    def pages(self) -> Iterable[RawPage]:
        if not self.meta_path.exists():
            return
        with self.meta_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                meta = json.loads(line)
                body_path = self.body_dir / f"{meta['id']}.html"
                body = body_path.read_bytes() if body_path.exists() else b""
                yield RawPage(
                    url=meta["url"],
                    status_code=meta["status_code"],
                    body=body,
                    fetched_at=meta["fetched_at"],
                    error=meta.get("error"),
                )


# --- HTML -> Article extraction -----------------------------------------

@dataclass(frozen=True)
class ExtractionRules:
    """Site-template mapping from HTML elements to block kinds."""

    subheading_tags: tuple[str, ...] = ("h2", "h3")
    paragraph_tags: tuple[str, ...] = ("p",)
    title_tags: tuple[str, ...] = ("h1", "title")


class _BlockParser(HTMLParser):
    _SKIP = {"script", "style", "noscript"}

    def __init__(self, rules: ExtractionRules):
        super().__init__(convert_charrefs=True)
        self.rules = rules
        self.blocks: list[tuple[str, str]] = []  # (kind, raw text)
        self.titles: dict[str, str] = {}
        self.datetimes: list[str] = []
        self._stack: list[str] = []
        self._capture: list[str] | None = None
        self._capture_tag: str | None = None
        self._depth = 0

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag in self._SKIP:
            self._stack.append(tag)
            return
        if tag == "time":
            for name, value in attrs:
                if name == "datetime" and value:
                    self.datetimes.append(value)
        is_block = (
            tag in self.rules.paragraph_tags
            or tag in self.rules.subheading_tags
            or tag in self.rules.title_tags
        )
        if self._capture is not None:
            if tag == self._capture_tag:
                self._depth += 1
                return
            if not is_block:
                return
            # an unclosed block is implicitly terminated by the next block tag
            self._flush()
        if is_block:
            self._capture = []
            self._capture_tag = tag
            self._depth = 1

    def handle_endtag(self, tag: str) -> None:
        if self._stack and self._stack[-1] == tag:
            self._stack.pop()
            return
        if self._capture is None or tag != self._capture_tag:
            return
        self._depth -= 1
        if self._depth > 0:
            return
        self._flush()

    def _flush(self) -> None:
        tag = self._capture_tag
        text = "".join(self._capture or [])
        if tag in self.rules.title_tags:
            self.titles.setdefault(tag, text)
        elif tag in self.rules.subheading_tags:
            self.blocks.append(("subheading", text))
        elif tag is not None:
            self.blocks.append(("paragraph", text))
        self._capture = None
        self._capture_tag = None

    def close(self) -> None:
        super().close()
        if self._capture is not None:
            self._flush()

    def handle_data(self, data: str) -> None:
        if self._stack:
            return
        if self._capture is not None:
            self._capture.append(data)


def shift_year(year: int, profile: LanguageProfile) -> int:
    """Convert an article-displayed year to Gregorian via the profile offset."""
    return year + profile.calendar_offset_years


def extract_article(
    page: RawPage,
    profile: LanguageProfile,
    rules: ExtractionRules = ExtractionRules(),
) -> Article | None:
    """Best-effort extraction; returns None when no paragraph blocks are found."""
    if not page.body:
        return None
    html = page.body.decode("utf-8", errors="replace")
    parser = _BlockParser(rules)
    try:
        parser.feed(html)
        parser.close()
    except Exception:
        pass  # tolerant parsing: keep whatever was collected

    blocks: list[Block] = []
    for kind, raw in parser.blocks:
        text = normalize_text(raw)
        if not text:
            continue
        blocks.append(
            Block(
                kind=BlockKind.SUBHEADING if kind == "subheading" else BlockKind.PARAGRAPH,
                text=text,
                index=len(blocks),
            )
        )
    if not any(b.kind is BlockKind.PARAGRAPH for b in blocks):
        return None

    title = ""
    for tag in rules.title_tags:
        if tag in parser.titles:
            title = normalize_text(parser.titles[tag])
            break

    published_year: int | None = None
    for value in parser.datetimes:
        m = re.match(r"(\d{4})", value)
        if m:
            published_year = shift_year(int(m.group(1)), profile)
            break

    _, target_url = unwrap_archive_url(page.url)
    return Article(
        id=article_id_for_url(target_url),
        url=target_url,
        title=title,
        language=profile.code,
        fetched_at=page.fetched_at,
        blocks=tuple(blocks),
        published_year=published_year,
    )
