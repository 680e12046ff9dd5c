import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from nfqa.cli import main
from nfqa.model import Corpus, read_jsonl

from .conftest import make_article


def seeded_corpus(root: Path, n_articles: int = 10) -> Path:
    corpus_dir = root / "corpus"
    articles = []
    for i in range(n_articles):
        articles.append(
            make_article(
                [
                    ("p", f"intro text number {i} about ferries"),
                    ("s", f"Why is item {i} delayed?"),
                    ("p", f"item {i} answer part one about delays"),
                    ("p", f"item {i} answer part two with reasons"),
                    ("s", "Background"),
                    ("p", f"background text for item {i}"),
                ],
                article_id=f"art{i:03d}",
                url=f"https://example.org/{i}",
            )
        )
    corpus = Corpus(corpus_dir)
    corpus.write_articles("en", articles)
    return corpus_dir


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def corpus_dir(tmp_path):
    return seeded_corpus(tmp_path)


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestCurateAndSplit:
    def test_curate_writes_pairs(self, runner, corpus_dir):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        pairs = Corpus(corpus_dir).read_qapairs("en")
        assert len(pairs) == 10
        assert all(p.silver_ids for p in pairs)

    def test_split_deterministic_byte_identical(self, runner, tmp_path):
        outputs = []
        for name in ("one", "two"):
            corpus_dir = seeded_corpus(tmp_path / name)
            run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
            run_ok(runner, ["split", "--corpus", str(corpus_dir), "--seed", "7"])
            outputs.append((corpus_dir / "qapairs.en.jsonl").read_bytes())
        assert outputs[0] == outputs[1]

    def test_split_writes_manifest(self, runner, corpus_dir):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        run_ok(runner, ["split", "--corpus", str(corpus_dir), "--seed", "1"])
        manifest = json.loads((corpus_dir / "manifest.json").read_text())
        assert manifest["qa_count"] == 10
        assert manifest["seed"] == 1

    def test_invalid_ratios_exit_code(self, runner, corpus_dir):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        result = runner.invoke(main, ["split", "--corpus", str(corpus_dir), "--ratios", "0.5,0.1,0.1"])
        assert result.exit_code == 1


class TestStatsAndNgrams:
    def test_stats_json(self, runner, corpus_dir):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        result = run_ok(runner, ["stats", "--corpus", str(corpus_dir), "--json"])
        payload = json.loads(result.output)
        assert payload["n_qa_pairs"] == 10
        assert payload["n_articles"] == 10

    def test_stats_figure_written(self, runner, corpus_dir, tmp_path):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        figures = tmp_path / "figs"
        run_ok(runner, ["stats", "--corpus", str(corpus_dir), "--figures", str(figures)])
        assert (figures / "qa_per_language.png").stat().st_size > 0

    def test_ngrams(self, runner, corpus_dir):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        result = run_ok(runner, ["ngrams", "--corpus", str(corpus_dir), "-n", "2", "--json"])
        rows = json.loads(result.output)["rows"]
        top_two = {r["ngram"] for r in rows[:2]}
        assert top_two == {"why is", "is item"}
        assert all(r["count"] == 10 for r in rows[:2])


def build_pipeline(runner, corpus_dir, tmp_path):
    run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
    run_ok(runner, ["split", "--corpus", str(corpus_dir), "--seed", "7", "--ratios", "1.0,0.0,0.0"])
    instances_path = tmp_path / "instances.jsonl"
    run_ok(runner, ["build-instances", "--corpus", str(corpus_dir), "--out", str(instances_path)])
    return instances_path


class TestInstancesAndScoring:
    def test_build_instances_counts(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        rows = list(read_jsonl(instances_path))
        # each article: 1 question x 4 context paragraphs
        assert len(rows) == 40
        assert {r["label"] for r in rows} == {0, 1}

    def test_zeros_scorer_and_evaluate(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        scores_path = tmp_path / "scores.jsonl"
        run_ok(runner, ["score", "--instances", str(instances_path), "--scorer", "zeros", "--out", str(scores_path)])
        result = run_ok(
            runner,
            ["evaluate", "--scores", str(scores_path), "--instances", str(instances_path), "--json"],
        )
        payload = json.loads(result.output)
        # half the instances are silver answers here
        assert payload["accuracy"] == pytest.approx(0.5)
        assert payload["success_rate"] == 0.0
        assert payload["label1"]["f1"] == 0.0

    def test_ones_scorer_full_success(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        scores_path = tmp_path / "scores.jsonl"
        run_ok(runner, ["score", "--instances", str(instances_path), "--scorer", "ones", "--out", str(scores_path)])
        result = run_ok(
            runner,
            ["evaluate", "--scores", str(scores_path), "--instances", str(instances_path), "--json"],
        )
        assert json.loads(result.output)["success_rate"] == 1.0

    def test_tfidf_pipeline(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        tfidf_path = tmp_path / "tfidf.json"
        run_ok(runner, ["fit-tfidf", "--corpus", str(corpus_dir), "--language", "en", "--out", str(tfidf_path)])
        scores_path = tmp_path / "scores.jsonl"
        run_ok(
            runner,
            [
                "score",
                "--instances", str(instances_path),
                "--scorer", "tfidf",
                "--tfidf", str(tfidf_path),
                "--out", str(scores_path),
            ],
        )
        rows = list(read_jsonl(scores_path))
        assert len(rows) == 40
        assert all(0.0 <= r["score"] <= 1.0 for r in rows)

    def test_lexical_training_pipeline(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        tfidf_path = tmp_path / "tfidf.json"
        run_ok(runner, ["fit-tfidf", "--corpus", str(corpus_dir), "--language", "en", "--out", str(tfidf_path)])
        model_path = tmp_path / "lexical.json"
        run_ok(
            runner,
            [
                "train-lexical",
                "--instances", str(instances_path),
                "--tfidf", str(tfidf_path),
                "--out", str(model_path),
                "--steps", "50",
            ],
        )
        model = json.loads(model_path.read_text())
        assert len(model["weights"]) == 6
        scores_path = tmp_path / "scores.jsonl"
        run_ok(
            runner,
            [
                "score",
                "--instances", str(instances_path),
                "--scorer", "lexical",
                "--tfidf", str(tfidf_path),
                "--lexical", str(model_path),
                "--out", str(scores_path),
            ],
        )
        assert len(list(read_jsonl(scores_path))) == 40

    def test_sweep_writes_csv_and_figure(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        scores_path = tmp_path / "scores.jsonl"
        run_ok(runner, ["score", "--instances", str(instances_path), "--scorer", "random", "--out", str(scores_path)])
        csv_path = tmp_path / "sweep.csv"
        figures = tmp_path / "figs"
        run_ok(
            runner,
            [
                "sweep",
                "--scores", str(scores_path),
                "--instances", str(instances_path),
                "--grid", "0.1:0.9:0.2",
                "--out-csv", str(csv_path),
                "--figures", str(figures),
            ],
        )
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0].startswith("threshold,")
        assert len(lines) == 6
        assert (figures / "threshold_sweep.png").stat().st_size > 0

    def test_reduce_top_k(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        scores_path = tmp_path / "scores.jsonl"
        run_ok(runner, ["score", "--instances", str(instances_path), "--scorer", "random", "--out", str(scores_path)])
        out_path = tmp_path / "reduced.jsonl"
        run_ok(
            runner,
            [
                "reduce",
                "--corpus", str(corpus_dir),
                "--scores", str(scores_path),
                "--top-k", "2",
                "--out", str(out_path),
            ],
        )
        rows = list(read_jsonl(out_path))
        assert len(rows) == 10
        assert all(len(r["paragraph_ids"]) == 2 for r in rows)

    def test_reduce_requires_exactly_one_policy(self, runner, corpus_dir, tmp_path):
        instances_path = build_pipeline(runner, corpus_dir, tmp_path)
        scores_path = tmp_path / "scores.jsonl"
        run_ok(runner, ["score", "--instances", str(instances_path), "--scorer", "zeros", "--out", str(scores_path)])
        result = runner.invoke(
            main,
            ["reduce", "--corpus", str(corpus_dir), "--scores", str(scores_path), "--out", str(tmp_path / "r.jsonl")],
        )
        assert result.exit_code == 1


class TestStopwordsCommand:
    def test_derived_stopwords_written(self, runner, corpus_dir, tmp_path):
        out = tmp_path / "stop.txt"
        run_ok(runner, ["stopwords", "--corpus", str(corpus_dir), "--language", "en", "--out", str(out)])
        words = out.read_text().split()
        assert words
        assert len(words) == len(set(words))


class TestWinRatio:
    def test_line_aligned_files(self, runner, tmp_path):
        gen = tmp_path / "gen.txt"
        gold = tmp_path / "gold.txt"
        gen.write_text("the answer is paris\nno clue\n")
        gold.write_text("paris\nlondon\n")
        result = run_ok(runner, ["win-ratio", "--generations", str(gen), "--gold", str(gold), "--json"])
        assert json.loads(result.output)["win_ratio"] == 0.5


class TestGoldCommands:
    def responses_log(self, corpus_dir, tmp_path, runner):
        run_ok(runner, ["curate", "--corpus", str(corpus_dir)])
        pairs = Corpus(corpus_dir).read_qapairs("en")
        log = tmp_path / "responses.jsonl"
        with log.open("w") as fh:
            for pair in pairs[:4]:
                first = sorted(pair.context_paragraph_ids)[0]
                for annotator in ("a", "b"):
                    fh.write(
                        json.dumps(
                            {
                                "task_id": pair.id,
                                "annotator_id": annotator,
                                "verdict_kind": "selections",
                                "selections": [first] if annotator == "a" else [first, sorted(pair.context_paragraph_ids)[1]],
                                "submitted_at": 1.0,
                            }
                        )
                        + "\n"
                    )
        return log

    def test_derive_gold(self, runner, corpus_dir, tmp_path):
        log = self.responses_log(corpus_dir, tmp_path, runner)
        out = tmp_path / "gold.jsonl"
        run_ok(
            runner,
            ["derive-gold", "--corpus", str(corpus_dir), "--responses-log", str(log), "--out", str(out)],
        )
        rows = list(read_jsonl(out))
        assert len(rows) == 4
        assert all(len(r["gold_ids"]) == 2 for r in rows)  # union of a and b

    def test_kappa_command(self, runner, corpus_dir, tmp_path):
        log = self.responses_log(corpus_dir, tmp_path, runner)
        result = run_ok(
            runner,
            ["kappa", "--corpus", str(corpus_dir), "--responses-log", str(log), "-a", "a", "-b", "b", "--json"],
        )
        payload = json.loads(result.output)
        assert 0.0 < payload["kappa"] < 1.0

    def test_kappa_no_shared_tasks(self, runner, corpus_dir, tmp_path):
        log = self.responses_log(corpus_dir, tmp_path, runner)
        result = runner.invoke(
            main,
            ["kappa", "--corpus", str(corpus_dir), "--responses-log", str(log), "-a", "a", "-b", "ghost"],
        )
        assert result.exit_code == 1


class TestExtractCommand:
    def test_pages_to_articles(self, runner, tmp_path):
        from nfqa.ingestion import JsonlPageStore, RawPage

        pages_dir = tmp_path / "pages"
        store = JsonlPageStore(pages_dir)
        html = "<h1>T</h1><p>Intro.</p><h2>Why so?</h2><p>Because.</p>"
        store.add(RawPage(url="http://s.test/a", status_code=200, body=html.encode(), fetched_at="t"))
        corpus_dir = tmp_path / "corpus"
        run_ok(
            runner,
            ["extract", "--pages", str(pages_dir), "--language", "en", "--corpus", str(corpus_dir)],
        )
        articles = Corpus(corpus_dir).read_articles("en")
        assert len(articles) == 1
        assert articles[0].title == "T"


class TestHelp:
    def test_main_help_lists_commands(self, runner):
        result = run_ok(runner, ["--help"])
        for command in ("crawl", "curate", "split", "evaluate", "sweep", "serve"):
            assert command in result.output
