import pytest

from nfqa.ingestion import (
    ArchiveMode,
    CrawlConfig,
    ExtractionRules,
    JsonlPageStore,
    RawPage,
    crawl,
    extract_article,
    extract_links,
    shift_year,
    to_archive_url,
    unwrap_archive_url,
)
from nfqa.model import BlockKind, LanguageProfile


class FakeClock:
    """Monotonic clock that advances only via sleep() and tick()."""

    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def monotonic(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds

    def tick(self, seconds):
        self.now += seconds


def page(url, html, status=200):
    return RawPage(url=url, status_code=status, body=html.encode("utf-8"), fetched_at="t0")


class FakeSite:
    def __init__(self, pages, clock=None, fetch_cost=0.0):
        self.pages = pages
        self.fetched = []
        self.fetch_times = []
        self.clock = clock
        self.fetch_cost = fetch_cost

    def __call__(self, url):
        if self.clock is not None:
            self.fetch_times.append((url, self.clock.monotonic()))
            if self.fetch_cost:
                self.clock.tick(self.fetch_cost)
        self.fetched.append(url)
        if url not in self.pages:
            return RawPage(url=url, status_code=404, body=b"", fetched_at="t")
        return page(url, self.pages[url])


THREE_PAGE_SITE = {
    "http://site.test/": '<html><body><a href="/a">A</a> <a href="/b">B</a></body></html>',
    "http://site.test/a": '<html><body><a href="/b">B again</a></body></html>',
    "http://site.test/b": "<html><body><p>leaf</p></body></html>",
}


class TestCrawl:
    def test_fixture_site_exhausted(self):
        site = FakeSite(THREE_PAGE_SITE)
        sink = []
        stats = crawl(
            CrawlConfig(seed_urls=("http://site.test/",), min_delay_ms=0, max_pages=10),
            sink.append,
            fetch=site,
            clock=FakeClock(),
        )
        assert stats.fetched == 3
        assert len(sink) == 3
        assert sorted(site.fetched) == sorted(THREE_PAGE_SITE)

    def test_max_pages_one(self):
        site = FakeSite(THREE_PAGE_SITE)
        stats = crawl(
            CrawlConfig(seed_urls=("http://site.test/",), min_delay_ms=0, max_pages=1),
            lambda p: None,
            fetch=site,
            clock=FakeClock(),
        )
        assert stats.fetched == 1
        assert site.fetched == ["http://site.test/"]

    def test_duplicate_links_fetched_once(self):
        pages = {
            "http://site.test/": '<a href="/x">1</a><a href="/x">2</a>',
            "http://site.test/x": "<p>x</p>",
        }
        site = FakeSite(pages)
        stats = crawl(
            CrawlConfig(seed_urls=("http://site.test/",), min_delay_ms=0, max_pages=10),
            lambda p: None,
            fetch=site,
            clock=FakeClock(),
        )
        assert stats.fetched == 2
        assert site.fetched.count("http://site.test/x") == 1

    def test_politeness_gap_with_injected_clock(self):
        clock = FakeClock()
        # 100-page chain: page i links to page i+1
        pages = {
            f"http://host.test/{i}": f'<a href="/{i + 1}">next</a>' for i in range(100)
        }
        site = FakeSite(pages, clock=clock, fetch_cost=0.01)
        stats = crawl(
            CrawlConfig(seed_urls=("http://host.test/0",), min_delay_ms=250, max_pages=100),
            lambda p: None,
            fetch=site,
            clock=clock,
        )
        assert stats.fetched == 100
        times = [t for _, t in site.fetch_times]
        gaps = [b - a for a, b in zip(times, times[1:])]
        assert all(gap >= 0.25 - 1e-9 for gap in gaps)
        # visited-set: no URL fetched twice
        assert len(set(site.fetched)) == len(site.fetched)

    def test_no_delay_between_distinct_hosts(self):
        clock = FakeClock()
        pages = {
            "http://h1.test/": '<a href="http://h2.test/">x</a>',
            "http://h2.test/": "<p>y</p>",
        }
        site = FakeSite(pages, clock=clock)
        crawl(
            CrawlConfig(seed_urls=("http://h1.test/",), min_delay_ms=1000, max_pages=5),
            lambda p: None,
            fetch=site,
            clock=clock,
        )
        assert clock.sleeps == []

    def test_network_error_recorded_and_continues(self):
        def flaky(url):
            if url.endswith("/bad"):
                return RawPage(url=url, status_code=0, body=b"", fetched_at="t", error="boom")
            return page(url, '<a href="/bad">bad</a><a href="/ok">ok</a>' if url.endswith("/") else "<p>ok</p>")

        sink = []
        stats = crawl(
            CrawlConfig(seed_urls=("http://s.test/",), min_delay_ms=0, max_pages=10),
            sink.append,
            fetch=flaky,
            clock=FakeClock(),
        )
        assert stats.errors == 1
        assert stats.fetched == 3

    def test_host_suffix_filter(self):
        pages = {
            "http://good.test/": '<a href="http://evil.example/">out</a><a href="/in">in</a>',
            "http://good.test/in": "<p>in</p>",
        }
        site = FakeSite(pages)
        stats = crawl(
            CrawlConfig(
                seed_urls=("http://good.test/",),
                min_delay_ms=0,
                max_pages=10,
                allowed_host_suffixes=("good.test",),
            ),
            lambda p: None,
            fetch=site,
            clock=FakeClock(),
        )
        assert stats.fetched == 2
        assert "http://evil.example/" not in site.fetched

    def test_empty_seeds_rejected(self):
        with pytest.raises(ValueError):
            crawl(CrawlConfig(seed_urls=()), lambda p: None)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CrawlConfig(seed_urls=("u",), max_pages=0)
        with pytest.raises(ValueError):
            CrawlConfig(seed_urls=("u",), min_delay_ms=-1)

    def test_archive_mode_oldest_first(self):
        base = "https://web.archive.org/web"
        pages = {
            f"{base}/0/http://n.test/": (
                f'<a href="{base}/20150101000000/http://n.test/new">new</a>'
                f'<a href="{base}/20090101000000/http://n.test/old">old</a>'
            ),
            f"{base}/20090101000000/http://n.test/old": "<p>old</p>",
            f"{base}/20150101000000/http://n.test/new": "<p>new</p>",
        }
        site = FakeSite(pages)
        crawl(
            CrawlConfig(
                seed_urls=("http://n.test/",),
                min_delay_ms=0,
                max_pages=10,
                archive_mode=ArchiveMode.EARLIEST_SNAPSHOT_FIRST,
            ),
            lambda p: None,
            fetch=site,
            clock=FakeClock(),
        )
        old_pos = site.fetched.index(f"{base}/20090101000000/http://n.test/old")
        new_pos = site.fetched.index(f"{base}/20150101000000/http://n.test/new")
        assert old_pos < new_pos


class TestArchiveUrls:
    def test_wrap_unwrap(self):
        wrapped = to_archive_url("http://x.test/page")
        ts, target = unwrap_archive_url(wrapped)
        assert ts == 0
        assert target == "http://x.test/page"

    def test_live_url_passthrough(self):
        assert unwrap_archive_url("http://x.test/") == (None, "http://x.test/")


class TestExtractLinks:
    def test_relative_resolution_and_fragments(self):
        html = '<a href="/a#frag">a</a><a href="mailto:x@y">m</a><a href="b">b</a>'
        assert extract_links("http://s.test/dir/", html) == [
            "http://s.test/a",
            "http://s.test/dir/b",
        ]


FIGURE_STYLE_HTML = """
<html><head><title>fallback</title></head><body>
<h1>Why the new ferries are late</h1>
<time datetime="2022-06-22T10:00:00Z">22 June 2022</time>
<p>Para one.</p>
<p>Para two.</p>
<h2>Why are the ferries late?</h2>
<p>Para three.</p>
<p>Para four.</p>
<h2>A troubled yard</h2>
<p>Para five.</p>
<p>Para six.</p>
</body></html>
"""


class TestExtractArticle:
    def test_figure_style_layout(self, en_profile):
        article = extract_article(page("http://s.test/a", FIGURE_STYLE_HTML), en_profile)
        assert article is not None
        assert article.title == "Why the new ferries are late"
        assert len(article.blocks) == 8
        kinds = [b.kind for b in article.blocks]
        assert kinds == [
            BlockKind.PARAGRAPH,
            BlockKind.PARAGRAPH,
            BlockKind.SUBHEADING,
            BlockKind.PARAGRAPH,
            BlockKind.PARAGRAPH,
            BlockKind.SUBHEADING,
            BlockKind.PARAGRAPH,
            BlockKind.PARAGRAPH,
        ]
        assert [b.index for b in article.blocks] == list(range(8))
        assert article.published_year == 2022

    def test_no_paragraphs_returns_none(self, en_profile):
        assert extract_article(page("http://s.test/x", "<h1>Only a title</h1>"), en_profile) is None

    def test_empty_body_returns_none(self, en_profile):
        raw = RawPage(url="u", status_code=200, body=b"", fetched_at="t")
        assert extract_article(raw, en_profile) is None

    def test_unclosed_tags_match_well_formed(self, en_profile):
        well_formed = "<h1>T</h1><p>One.</p><h2>Q?</h2><p>Two.</p>"
        unclosed = "<h1>T</h1><p>One.<h2>Q?</h2><p>Two."
        a = extract_article(page("http://s.test/1", well_formed), en_profile)
        b = extract_article(page("http://s.test/1", unclosed), en_profile)
        assert a is not None and b is not None
        assert [(x.kind, x.text) for x in a.blocks] == [(x.kind, x.text) for x in b.blocks]

    def test_document_order_monotone(self, en_profile):
        article = extract_article(page("http://s.test/a", FIGURE_STYLE_HTML), en_profile)
        assert [b.index for b in article.blocks] == sorted(b.index for b in article.blocks)

    def test_calendar_offset_applied(self):
        fa = LanguageProfile(code="fa", terminators=frozenset({"?", "؟"}), calendar_offset_years=621)
        html = '<h1>T</h1><time datetime="1401-01-01">x</time><p>body</p>'
        article = extract_article(page("http://s.test/fa", html), fa)
        assert article.published_year == 1401 + 621
        assert shift_year(1401, fa) == 2022

    def test_custom_rules(self, en_profile):
        rules = ExtractionRules(subheading_tags=("h4",), paragraph_tags=("div",))
        html = "<h4>Q?</h4><div>answer</div><p>ignored-as-paragraph? no</p>"
        article = extract_article(page("http://s.test/c", html), en_profile, rules)
        assert [(b.kind, b.text) for b in article.blocks] == [
            (BlockKind.SUBHEADING, "Q?"),
            (BlockKind.PARAGRAPH, "answer"),
        ]

    def test_script_content_ignored(self, en_profile):
        html = "<script>var x = '<p>not a para</p>';</script><p>real</p>"
        article = extract_article(page("http://s.test/s", html), en_profile)
        assert [b.text for b in article.blocks] == ["real"]


class TestJsonlPageStore:
    def test_round_trip(self, tmp_path):
        store = JsonlPageStore(tmp_path)
        p = page("http://s.test/p", "<p>hello</p>")
        store.add(p)
        pages = list(store.pages())
        assert len(pages) == 1
        assert pages[0].body == p.body
        assert pages[0].url == p.url
