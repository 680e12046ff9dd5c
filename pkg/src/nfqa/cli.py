"""Command-line entry point: the full pipeline as subcommands.

All subcommands are re-runnable: identical config and inputs produce
identical outputs for a fixed seed. Machine-readable reports go to stdout
with --json; figures are rendered next to the delimited outputs.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import curation, evaluation, ingestion, instances as instances_mod, scorers
from .model import Corpus, read_jsonl, write_jsonl
from .profiles import ProfileRegistry
from .textproc import StopwordSource, derive_stopwords


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _registry(profiles_path: str | None) -> ProfileRegistry:
    if profiles_path:
        return ProfileRegistry.from_file(profiles_path)
    return ProfileRegistry.default()


def _emit(payload: dict, as_json: bool, text: str | None = None) -> None:
    if as_json:
        click.echo(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
    elif text is not None:
        click.echo(text)


def _fail(message: str) -> None:
    raise click.ClickException(message)


@click.group()
def main() -> None:
    """Silver-labeled multilingual non-factoid QA toolkit."""


# --- ingestion -----------------------------------------------------------

@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), help="TOML config with a [crawl] section.")
@click.option("--seed-url", "seed_urls", multiple=True)
@click.option("--out", "out_dir", type=click.Path(), default="pages")
@click.option("--max-pages", type=int, default=None)
@click.option("--min-delay-ms", type=int, default=None)
@click.option("--archive", is_flag=True, help="Crawl web-archive snapshots, oldest first.")
@click.option("--allow-host", "allowed_hosts", multiple=True)
@click.option("--user-agent", default=None)
def crawl(config_path, seed_urls, out_dir, max_pages, min_delay_ms, archive, allowed_hosts, user_agent):
    """Politely crawl seed URLs into a raw page store."""
    cfg = _load_config(config_path).get("crawl", {})
    seeds = tuple(seed_urls) or tuple(cfg.get("seed_urls", ()))
    if not seeds:
        _fail("no seed URLs (use --seed-url or [crawl].seed_urls)")
    try:
        crawl_config = ingestion.CrawlConfig(
            seed_urls=seeds,
            min_delay_ms=min_delay_ms if min_delay_ms is not None else cfg.get("min_delay_ms", 1000),
            max_pages=max_pages if max_pages is not None else cfg.get("max_pages", 100),
            allowed_host_suffixes=tuple(allowed_hosts) or tuple(cfg.get("allowed_host_suffixes", ())),
            archive_mode=(
                ingestion.ArchiveMode.EARLIEST_SNAPSHOT_FIRST
                if (archive or cfg.get("archive_mode") == "earliest_snapshot_first")
                else ingestion.ArchiveMode.LIVE
            ),
            user_agent=user_agent or cfg.get("user_agent", ingestion.DEFAULT_USER_AGENT),
        )
    except ValueError as exc:
        _fail(str(exc))
    store = ingestion.JsonlPageStore(out_dir)
    stats = ingestion.crawl(crawl_config, store)
    click.echo(f"fetched={stats.fetched} skipped={stats.skipped} errors={stats.errors}", err=True)


@main.command()
@click.option("--pages", "pages_dir", type=click.Path(exists=True), required=True)
@click.option("--language", required=True)
@click.option("--corpus", "corpus_dir", type=click.Path(), default="corpus")
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None)
def extract(pages_dir, language, corpus_dir, profiles_path):
    """Extract Articles from stored raw pages."""
    registry = _registry(profiles_path)
    try:
        profile = registry.get(language)
    except KeyError as exc:
        _fail(str(exc))
    store = ingestion.JsonlPageStore(pages_dir)
    articles = []
    for page in store.pages():
        if page.error is not None or page.status_code >= 400:
            continue
        article = ingestion.extract_article(page, profile)
        if article is not None:
            articles.append(article)
    corpus = Corpus(corpus_dir)
    n = corpus.write_articles(language, articles)
    click.echo(f"extracted {n} articles -> {corpus.articles_path(language)}", err=True)


# --- curation ------------------------------------------------------------

@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--language", "languages", multiple=True, help="Default: every language present.")
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None)
def curate(corpus_dir, languages, profiles_path):
    """Extract silver-labeled QA pairs from stored articles."""
    registry = _registry(profiles_path)
    corpus = Corpus(corpus_dir)
    langs = list(languages) or corpus.languages()
    total = 0
    for language in langs:
        try:
            profile = registry.get(language)
        except KeyError as exc:
            _fail(str(exc))
        pairs = []
        for article in corpus.read_articles(language):
            pairs.extend(curation.extract_qa_pairs(article, profile))
        corpus.write_qapairs(language, pairs)
        total += len(pairs)
    click.echo(f"curated {total} QA pairs across {len(langs)} language(s)", err=True)


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--ratios", default="0.7,0.2,0.1", show_default=True)
def split(corpus_dir, seed, ratios):
    """Assign train/dev/test splits at article granularity."""
    try:
        train, dev, test = (float(x) for x in ratios.split(","))
        split_ratios = curation.SplitRatios(train=train, dev=dev, test=test)
    except ValueError as exc:
        _fail(f"invalid ratios {ratios!r}: {exc}")
    corpus = Corpus(corpus_dir)
    for language in corpus.languages():
        pairs = corpus.read_qapairs(language)
        if not pairs:
            continue
        assigned = curation.split_dataset(pairs, split_ratios, seed)
        corpus.write_qapairs(language, assigned)
    corpus.write_manifest(corpus.build_manifest(ratios=(train, dev, test), seed=seed))
    click.echo(f"splits assigned (seed={seed})", err=True)


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--figures", "figures_dir", type=click.Path(), default=None)
def stats(corpus_dir, as_json, figures_dir):
    """Corpus statistics table (and optional per-language figure)."""
    corpus = Corpus(corpus_dir)
    articles = {l: corpus.read_articles(l) for l in corpus.languages()}
    pairs = {l: corpus.read_qapairs(l) for l in corpus.languages()}
    report = curation.corpus_stats(articles, pairs)
    text = "\n".join(f"{label:<34} {value:,.1f}" for label, value in report.to_rows())
    _emit(report.to_dict(), as_json, text)
    if figures_dir:
        from .plots import plot_language_counts

        path = plot_language_counts(report.per_language_qa, Path(figures_dir) / "qa_per_language.png")
        click.echo(f"figure -> {path}", err=True)


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("-n", "n", type=int, default=2, show_default=True)
@click.option("--top", type=int, default=20, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def ngrams(corpus_dir, n, top, as_json):
    """Most frequent question n-grams with percentages."""
    corpus = Corpus(corpus_dir)
    questions = [p.question for l in corpus.languages() for p in corpus.read_qapairs(l)]
    try:
        rows = curation.ngram_table(questions, n, top=top)
    except ValueError as exc:
        _fail(str(exc))
    payload = {"n": n, "rows": [{"ngram": r.ngram, "count": r.count, "percent": r.percent} for r in rows]}
    text = "\n".join(f"{r.ngram:<40} {100 * r.percent:5.1f}%  ({r.count})" for r in rows)
    _emit(payload, as_json, text)


# --- textproc ------------------------------------------------------------

@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--language", required=True)
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
def stopwords(corpus_dir, language, profiles_path, out_path):
    """Write the language's stopword list (provided or top-260 derived)."""
    registry = _registry(profiles_path)
    try:
        profile = registry.get(language)
    except KeyError as exc:
        _fail(str(exc))
    corpus = Corpus(corpus_dir)
    texts = []
    for article in corpus.read_articles(language):
        texts.extend(b.text for b in article.blocks)
    try:
        result = derive_stopwords(texts, language, provided=profile.stopwords)
    except ValueError as exc:
        _fail(str(exc))
    Path(out_path).write_text("\n".join(result.words) + "\n", encoding="utf-8")
    source = "provided" if result.source is StopwordSource.PROVIDED else "derived"
    click.echo(f"{len(result.words)} stopwords ({source}) -> {out_path}", err=True)


# --- instances and models ------------------------------------------------

def _load_split_pairs(corpus: Corpus, split_name: str | None):
    from .model import Split

    wanted = Split(split_name) if split_name else None
    for language in corpus.languages():
        articles = {a.id: a for a in corpus.read_articles(language)}
        for pair in corpus.read_qapairs(language):
            if wanted is None or pair.split is wanted:
                yield language, pair, articles.get(pair.article_id)


@main.command("build-instances")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--split", "split_name", default=None, help="train/dev/test; default all.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--token-budget", type=int, default=instances_mod.DEFAULT_TOKEN_BUDGET, show_default=True)
@click.option("--prior-context/--no-prior-context", default=True, show_default=True)
@click.option("--title/--no-title", "include_title", default=False, show_default=True)
def build_instances_cmd(corpus_dir, split_name, out_path, token_budget, prior_context, include_title):
    """Emit one JSONL instance per (question, paragraph)."""
    try:
        opts = instances_mod.InstanceOptions(
            token_budget=token_budget,
            include_prior_context=prior_context,
            include_title=include_title,
        )
    except ValueError as exc:
        _fail(str(exc))
    corpus = Corpus(corpus_dir)
    records = []
    for _, pair, article in _load_split_pairs(corpus, split_name):
        if article is None:
            _fail(f"pair {pair.id!r} references a missing article")
        for inst in instances_mod.build_instances(pair, article, opts):
            records.append(inst.to_dict())
    n = write_jsonl(out_path, records)
    click.echo(f"{n} instances -> {out_path}", err=True)


@main.command("fit-tfidf")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--language", required=True)
@click.option("--stopwords", "stopwords_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
def fit_tfidf_cmd(corpus_dir, language, stopwords_path, out_path):
    """Fit the TF-IDF vectorizer on one language's Train-split texts."""
    from .model import Split

    corpus = Corpus(corpus_dir)
    articles = {a.id: a for a in corpus.read_articles(language)}
    texts: list[str] = []
    for pair in corpus.read_qapairs(language):
        if pair.split is not Split.TRAIN:
            continue
        texts.append(pair.question)
        article = articles.get(pair.article_id)
        if article:
            text_by_index = {b.index: b.text for b in article.blocks}
            texts.extend(text_by_index[i] for i in pair.context_paragraph_ids)
    stop = ()
    if stopwords_path:
        stop = tuple(Path(stopwords_path).read_text(encoding="utf-8").split())
    try:
        model = scorers.fit_tfidf(texts, stopwords=stop, fitted_on=f"train/{language}")
    except ValueError as exc:
        _fail(str(exc))
    Path(out_path).write_text(json.dumps(scorers.tfidf_to_dict(model), ensure_ascii=False), encoding="utf-8")
    click.echo(f"vocabulary={len(model.vocabulary)} -> {out_path}", err=True)


def _read_instances(path: str) -> list:
    return [instances_mod.instance_from_dict(d) for d in read_jsonl(path)]


def _instance_positions(insts) -> list[tuple[int, int]]:
    """(position within question, context size) per instance, in file order."""
    groups: dict[str, int] = {}
    for inst in insts:
        groups[inst.qa_id] = groups.get(inst.qa_id, 0) + 1
    seen: dict[str, int] = {}
    out = []
    for inst in insts:
        pos = seen.get(inst.qa_id, 0)
        seen[inst.qa_id] = pos + 1
        out.append((pos, groups[inst.qa_id]))
    return out


@main.command("train-lexical")
@click.option("--instances", "instances_path", type=click.Path(exists=True), required=True)
@click.option("--tfidf", "tfidf_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--loss", type=click.Choice(["wfl", "wbce"]), default="wfl", show_default=True)
@click.option("--gamma", type=float, default=2.0, show_default=True)
@click.option("--lr", type=float, default=0.1, show_default=True)
@click.option("--steps", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--figures", "figures_dir", type=click.Path(), default=None)
def train_lexical_cmd(instances_path, tfidf_path, out_path, loss, gamma, lr, steps, seed, figures_dir):
    """Train the lexical paragraph classifier with weighted focal loss."""
    import numpy as np

    insts = _read_instances(instances_path)
    tfidf = scorers.tfidf_from_dict(json.loads(Path(tfidf_path).read_text(encoding="utf-8")))
    labels = [inst.label for inst in insts]
    try:
        a0, a1 = scorers.balanced_alphas(labels)
        cfg = scorers.LossConfig(kind=loss, gamma=gamma, alpha0=a0, alpha1=a1)
        features = np.stack(
            [
                scorers.featurize(inst, tfidf, pos, total)
                for inst, (pos, total) in zip(insts, _instance_positions(insts))
            ]
        )
        model = scorers.train_lexical(features, labels, cfg, lr=lr, steps=steps, seed=seed)
    except ValueError as exc:
        _fail(str(exc))
    Path(out_path).write_text(json.dumps(scorers.lexical_to_dict(model)), encoding="utf-8")
    click.echo(f"final loss={model.training_log[-1]:.6f} -> {out_path}", err=True)
    if figures_dir:
        from .plots import plot_training_loss

        path = plot_training_loss(model.training_log, Path(figures_dir) / "training_loss.png")
        click.echo(f"figure -> {path}", err=True)


@main.command()
@click.option("--instances", "instances_path", type=click.Path(exists=True), required=True)
@click.option("--scorer", type=click.Choice(["ones", "zeros", "random", "tfidf", "lexical", "external"]), required=True)
@click.option("--tfidf", "tfidf_path", type=click.Path(exists=True), default=None)
@click.option("--lexical", "lexical_path", type=click.Path(exists=True), default=None)
@click.option("--command", "external_command", default=None, help="External scorer command line.")
@click.option("--tcp", "tcp_address", default=None, help="host:port of a TCP scorer.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def score(instances_path, scorer, tfidf_path, lexical_path, external_command, tcp_address, seed, out_path):
    """Score instances with the selected backend."""
    insts = _read_instances(instances_path)
    records: list[scorers.ScoreRecord] = []
    if scorer in ("ones", "zeros", "random"):
        for inst in insts:
            value = scorers.score_trivial(scorer, f"{inst.qa_id}#{inst.paragraph_index}", seed)
            records.append(scorers.ScoreRecord(inst.qa_id, inst.paragraph_index, value, scorer))
    elif scorer == "tfidf":
        if not tfidf_path:
            _fail("--tfidf model path required for the tfidf scorer")
        model = scorers.tfidf_from_dict(json.loads(Path(tfidf_path).read_text(encoding="utf-8")))
        for inst in insts:
            value = scorers.score_tfidf(model, inst.question, inst.candidate)
            records.append(scorers.ScoreRecord(inst.qa_id, inst.paragraph_index, value, "tfidf"))
    elif scorer == "lexical":
        if not tfidf_path or not lexical_path:
            _fail("--tfidf and --lexical model paths required for the lexical scorer")
        tfidf = scorers.tfidf_from_dict(json.loads(Path(tfidf_path).read_text(encoding="utf-8")))
        model = scorers.lexical_from_dict(json.loads(Path(lexical_path).read_text(encoding="utf-8")))
        for inst, (pos, total) in zip(insts, _instance_positions(insts)):
            value = model.score(scorers.featurize(inst, tfidf, pos, total))
            records.append(scorers.ScoreRecord(inst.qa_id, inst.paragraph_index, value, "lexical"))
    else:
        if external_command:
            endpoint = scorers.EndpointSpec(command=tuple(external_command.split()))
        elif tcp_address:
            host, _, port = tcp_address.rpartition(":")
            endpoint = scorers.EndpointSpec(tcp_address=(host, int(port)))
        else:
            _fail("external scorer needs --command or --tcp")
        try:
            records = scorers.external_score(insts, endpoint)
        except scorers.ExternalScorerError as exc:
            _fail(str(exc))
    n = write_jsonl(out_path, (r.to_dict() for r in records))
    click.echo(f"{n} scores -> {out_path}", err=True)


# --- evaluation ----------------------------------------------------------

def _load_scores_and_labels(scores_path: str, instances_path: str):
    records = [scorers.score_record_from_dict(d) for d in read_jsonl(scores_path)]
    labels_by_key = {
        (d["qa_id"], d["paragraph_index"]): d["label"] for d in read_jsonl(instances_path)
    }
    labels = []
    for rec in records:
        key = (rec.qa_id, rec.paragraph_index)
        if key not in labels_by_key:
            _fail(f"score for unknown instance {key}")
        labels.append(labels_by_key[key])
    return records, labels


def _resolve_threshold(threshold: str, records) -> float:
    if threshold == "default":
        if not records:
            _fail("no score records")
        return scorers.default_threshold(records[0].score_range)
    try:
        return float(threshold)
    except ValueError:
        _fail(f"invalid threshold {threshold!r}")


@main.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--instances", "instances_path", type=click.Path(exists=True), required=True)
@click.option("--threshold", default="default", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def evaluate(scores_path, instances_path, threshold, as_json):
    """Accuracy, per-label P/R/F1, macro F1, and Success Rate."""
    records, labels = _load_scores_and_labels(scores_path, instances_path)
    t = _resolve_threshold(threshold, records)
    try:
        report = evaluation.evaluate_scores(records, labels, t)
    except ValueError as exc:
        _fail(str(exc))
    _emit(report.to_dict(), as_json, evaluation.format_report_table({report.scorer_id or "scores": report}))


@main.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--instances", "instances_path", type=click.Path(exists=True), required=True)
@click.option("--grid", default="0.0:1.0:0.1", show_default=True, help="lo:hi:step inclusive.")
@click.option("--out-csv", type=click.Path(), required=True)
@click.option("--figures", "figures_dir", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
def sweep(scores_path, instances_path, grid, out_csv, figures_dir, as_json):
    """Threshold sweep: CSV (and figure) of metrics per threshold."""
    records, labels = _load_scores_and_labels(scores_path, instances_path)
    try:
        lo, hi, step = (float(x) for x in grid.split(":"))
    except ValueError:
        _fail(f"invalid grid {grid!r}, expected lo:hi:step")
    thresholds = []
    t = lo
    while t <= hi + 1e-9:
        thresholds.append(round(t, 10))
        t += step
    try:
        report = evaluation.threshold_sweep(records, labels, thresholds)
    except ValueError as exc:
        _fail(str(exc))
    Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
    Path(out_csv).write_text(report.to_csv(), encoding="utf-8")
    click.echo(f"sweep -> {out_csv}", err=True)
    if figures_dir:
        from .plots import plot_sweep

        path = plot_sweep(report, Path(figures_dir) / "threshold_sweep.png")
        click.echo(f"figure -> {path}", err=True)
    best_t, best = report.best_macro_f1()
    _emit(
        {"best_threshold": best_t, "best_macro_f1": best.macro_f1},
        as_json,
        f"best threshold {best_t:.2f} (macro F1 {best.macro_f1:.3f})",
    )


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--top-k", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
def reduce(corpus_dir, scores_path, top_k, threshold, out_path):
    """Reduce each question's context to its highest-scoring paragraphs."""
    if (top_k is None) == (threshold is None):
        _fail("choose exactly one of --top-k or --threshold")
    try:
        policy = evaluation.TopK(top_k) if top_k is not None else evaluation.AboveThreshold(threshold)
    except ValueError as exc:
        _fail(str(exc))
    scores_by_qa: dict[str, dict[int, float]] = {}
    for d in read_jsonl(scores_path):
        scores_by_qa.setdefault(d["qa_id"], {})[d["paragraph_index"]] = d["score"]
    corpus = Corpus(corpus_dir)
    out = []
    for language in corpus.languages():
        articles = {a.id: a for a in corpus.read_articles(language)}
        for pair in corpus.read_qapairs(language):
            if pair.id not in scores_by_qa:
                continue
            article = articles[pair.article_id]
            indices = evaluation.reduce_context(pair, article, scores_by_qa[pair.id], policy)
            out.append(
                {
                    "qa_id": pair.id,
                    "question": pair.question,
                    "paragraph_ids": indices,
                    "paragraphs": evaluation.reduced_paragraph_texts(article, indices),
                }
            )
    n = write_jsonl(out_path, out)
    click.echo(f"{n} reduced contexts -> {out_path}", err=True)


@main.command("win-ratio")
@click.option("--generations", "generations_path", type=click.Path(exists=True), required=True)
@click.option("--gold", "gold_path", type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True)
def win_ratio_cmd(generations_path, gold_path, as_json):
    """Fraction of generations containing their gold answer."""
    generations = Path(generations_path).read_text(encoding="utf-8").splitlines()
    gold = Path(gold_path).read_text(encoding="utf-8").splitlines()
    try:
        ratio = evaluation.win_ratio(generations, gold)
    except ValueError as exc:
        _fail(str(exc))
    _emit({"win_ratio": ratio, "n": len(generations)}, as_json, f"win ratio: {100 * ratio:.1f}% ({len(generations)} generations)")


# --- gold annotation -----------------------------------------------------

def _build_store(corpus_dir: str, responses_log: str | None, sample: int | None, required_annotators: int):
    from .goldserve import AnnotationStore, create_tasks

    corpus = Corpus(corpus_dir)
    pairs = []
    articles = {}
    for language in corpus.languages():
        for article in corpus.read_articles(language):
            articles[article.id] = article
        pairs.extend(corpus.read_qapairs(language))
    pairs.sort(key=lambda p: p.id)
    if sample:
        pairs = pairs[:sample]
    tasks, errors = create_tasks(pairs, articles)
    for err in errors:
        click.echo(f"warning: {err}", err=True)
    store = AnnotationStore(log_path=responses_log, required_annotators=required_annotators)
    store.add_tasks(tasks)
    return store


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
@click.option("--responses-log", type=click.Path(), default="responses.jsonl", show_default=True)
@click.option("--sample", type=int, default=None, help="Annotate only the first N pairs.")
@click.option("--annotators", "required_annotators", type=int, default=1, show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True), default=None, help="UI bundle directory.")
def serve(corpus_dir, bind, responses_log, sample, required_annotators, static_dir):
    """Serve the annotation API (and the static UI bundle, if given)."""
    import uvicorn

    from .goldserve import create_app

    store = _build_store(corpus_dir, responses_log, sample, required_annotators)
    app = create_app(store, static_dir=static_dir)
    host, _, port = bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


@main.command("derive-gold")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--responses-log", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def derive_gold_cmd(corpus_dir, responses_log, out_path):
    """Union-derive gold records from the annotation response log."""
    store = _build_store(corpus_dir, responses_log, None, 1)
    records = store.derive_all_gold()
    n = write_jsonl(out_path, (g.to_dict() for g in records))
    click.echo(f"{n} gold records -> {out_path}", err=True)


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--responses-log", type=click.Path(exists=True), required=True)
@click.option("-a", "annotator_a", required=True)
@click.option("-b", "annotator_b", required=True)
@click.option("--json", "as_json", is_flag=True)
def kappa(corpus_dir, responses_log, annotator_a, annotator_b, as_json):
    """Cohen's kappa between two annotators over shared tasks."""
    from .goldserve import DegenerateAgreementError, cohen_kappa

    store = _build_store(corpus_dir, responses_log, None, 1)
    sel_a = store.selections_by_annotator(annotator_a)
    sel_b = store.selections_by_annotator(annotator_b)
    shared = sorted(set(sel_a) & set(sel_b))
    if not shared:
        _fail(f"annotators {annotator_a!r} and {annotator_b!r} share no tasks")
    sizes = store.task_sizes()
    try:
        result = cohen_kappa(
            {t: sel_a[t] for t in shared},
            {t: sel_b[t] for t in shared},
            {t: sizes[t] for t in shared},
        )
    except (DegenerateAgreementError, ValueError) as exc:
        _fail(str(exc))
    _emit(
        {"kappa": result.kappa, "p_o": result.p_o, "p_e": result.p_e, "items": result.item_count},
        as_json,
        f"kappa={result.kappa:.3f} (p_o={result.p_o:.3f}, p_e={result.p_e:.3f}, items={result.item_count})",
    )


if __name__ == "__main__":
    sys.exit(main())
