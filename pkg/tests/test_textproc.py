import sys

import pytest
from hypothesis import given, strategies as st

from nfqa.textproc import (
    PluginError,
    StopwordSource,
    TokenizerKind,
    TokenizerSpec,
    derive_stopwords,
    segment_sentences,
    strip_punct_and_stopwords,
    tokenize,
    trim_punct,
)


class TestTokenize:
    def test_whitespace_split(self):
        assert tokenize("What is the situation?") == ["What", "is", "the", "situation?"]

    def test_empty(self):
        assert tokenize("") == []

    def test_unicode_whitespace(self):
        assert tokenize("a b c") == ["a", "b", "c"]

    @given(st.text(max_size=100))
    def test_character_preservation(self, text):
        joined = "".join(tokenize(text))
        assert sorted(joined) == sorted(c for c in text if not c.isspace())

    def test_plugin_passthrough(self):
        spec = TokenizerSpec(
            id="echo",
            kind=TokenizerKind.PLUGIN,
            plugin_command=(
                sys.executable,
                "-c",
                "import sys; line=sys.stdin.readline().strip(); print('\\t'.join(line))",
            ),
        )
        assert tokenize("abc", spec) == ["a", "b", "c"]

    def test_plugin_failure_surfaces_status(self):
        spec = TokenizerSpec(
            id="boom",
            kind=TokenizerKind.PLUGIN,
            plugin_command=(sys.executable, "-c", "import sys; sys.exit(3)"),
        )
        with pytest.raises(PluginError, match="status 3"):
            tokenize("x", spec)

    def test_plugin_requires_command(self):
        with pytest.raises(ValueError):
            TokenizerSpec(id="p", kind=TokenizerKind.PLUGIN)


class TestSegmentSentences:
    def test_basic(self):
        assert segment_sentences("A b. C d?") == ["A b.", "C d?"]

    def test_no_terminal_punctuation(self):
        assert segment_sentences("no punctuation here") == ["no punctuation here"]

    def test_hindi_danda(self):
        text = "यह पहला वाक्य है। यह दूसरा है।"
        assert segment_sentences(text) == ["यह पहला वाक्य है।", "यह दूसरा है।"]

    def test_abbrev_period_without_space_not_split(self):
        assert segment_sentences("See fig.1 for details.") == ["See fig.1 for details."]

    @given(st.text(alphabet="ab .!?", max_size=80))
    def test_reconstruction_modulo_whitespace(self, text):
        sentences = segment_sentences(text)
        assert "".join(sentences).replace(" ", "") == text.replace(" ", "")


class TestTrimPunct:
    def test_trailing(self):
        assert trim_punct("situation?") == "situation"

    def test_pure_punct(self):
        assert trim_punct("—") == ""

    def test_symbols_count_as_punct(self):
        assert trim_punct("$100€") == "100"


class TestStripPunctAndStopwords:
    def test_example(self):
        tokens = ["What", "is", "the", "situation?"]
        assert strip_punct_and_stopwords(tokens, {"what", "is", "the"}) == ["situation"]

    def test_empty(self):
        assert strip_punct_and_stopwords([], {"a"}) == []

    def test_pure_punct_removed(self):
        assert strip_punct_and_stopwords(["—", "ok"], set()) == ["ok"]

    def test_casefold_matching(self):
        assert strip_punct_and_stopwords(["THE", "Cat"], {"the"}) == ["Cat"]


class TestDeriveStopwords:
    def test_provided_list_wins(self):
        result = derive_stopwords(["ignored text"], "en", provided=("a", "b"))
        assert result.source is StopwordSource.PROVIDED
        assert result.words == ("a", "b")

    def test_planted_frequencies(self):
        # token0 occurs 5x, token1 4x, ..., token4 1x
        corpus = []
        for rank, count in enumerate((5, 4, 3, 2, 1)):
            corpus.extend([f"tok{rank}"] * count)
        result = derive_stopwords([" ".join(corpus)], "xx")
        assert result.words == ("tok0", "tok1", "tok2", "tok3", "tok4")
        assert result.source is StopwordSource.TOP260_DERIVED

    def test_min_rule_small_vocab(self):
        result = derive_stopwords(["one two three"], "xx")
        assert len(result.words) == 3

    def test_caps_at_260(self):
        text = " ".join(f"w{i:04d}" for i in range(300))
        result = derive_stopwords([text], "xx")
        assert len(result.words) == 260

    def test_tie_break_codepoint_order(self):
        result = derive_stopwords(["b a c a b c"], "xx")
        assert result.words == ("a", "b", "c")

    def test_empty_corpus_errors(self):
        with pytest.raises(ValueError):
            derive_stopwords([""], "xx")

    def test_deterministic(self):
        texts = ["z y x w v u", "u v w", "x y z"]
        assert derive_stopwords(texts, "xx") == derive_stopwords(texts, "xx")
