"""Paragraph-scoring backends.

Four families: trivial baselines (ones/zeros/random), TF-IDF cosine,
precomputed-embedding cosine, and the external-scorer wire protocol for
neural or LLM models. A small trainable lexical classifier, optimized
with weighted focal loss, serves as the in-repo trainable scorer.
"""

from __future__ import annotations

import hashlib
import json
import math
import socket
import subprocess
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .instances import TrainingInstance
from .textproc import TokenizerSpec, strip_punct_and_stopwords, tokenize

EPS = 1e-12


@dataclass(frozen=True)
class ScoreRecord:
    qa_id: str
    paragraph_index: int
    score: float
    scorer_id: str
    score_range: tuple[float, float] = (0.0, 1.0)
    error: str | None = None

    def to_dict(self) -> dict:
        d = {
            "qa_id": self.qa_id,
            "paragraph_index": self.paragraph_index,
            "score": self.score,
            "scorer_id": self.scorer_id,
            "score_range": list(self.score_range),
        }
        if self.error is not None:
            d["error"] = self.error
        return d


def score_record_from_dict(d: dict) -> ScoreRecord:
    return ScoreRecord(
        qa_id=d["qa_id"],
        paragraph_index=d["paragraph_index"],
        score=d["score"],
        scorer_id=d["scorer_id"],
        score_range=tuple(d.get("score_range", (0.0, 1.0))),
        error=d.get("error"),
    )


def default_threshold(score_range: tuple[float, float]) -> float:
    """Half the potential range of confidence scores."""
    lo, hi = score_range
    if lo >= hi:
        raise ValueError(f"invalid score range [{lo}, {hi}]")
    return (lo + hi) / 2.0


# --- TF-IDF --------------------------------------------------------------

@dataclass
class TfidfModel:
    """Sparse TF-IDF vectorizer: weight(t, d) = tf * (ln((1+N)/(1+df)) + 1),
    document vectors L2-normalized, so cosine is a plain dot product in [0, 1].
    """

    vocabulary: dict[str, int]
    idf: np.ndarray
    fitted_on: str = ""
    stopwords: tuple[str, ...] = ()
    tokenizer: TokenizerSpec = field(default_factory=TokenizerSpec)

    def preprocess(self, text: str) -> list[str]:
        tokens = strip_punct_and_stopwords(tokenize(text, self.tokenizer), self.stopwords)
        return [t.casefold() for t in tokens]

    def transform(self, text: str) -> dict[int, float]:
        counts = Counter(self.preprocess(text))
        vec = {
            self.vocabulary[t]: tf * self.idf[self.vocabulary[t]]
            for t, tf in counts.items()
            if t in self.vocabulary
        }
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm == 0.0:
            return {}
        return {i: w / norm for i, w in vec.items()}


def fit_tfidf(
    texts: Sequence[str],
    stopwords: Iterable[str] = (),
    spec: TokenizerSpec = TokenizerSpec(),
    fitted_on: str = "",
) -> TfidfModel:
    """Fit on the train-split texts of a single language."""
    stopwords = tuple(stopwords)
    df: Counter[str] = Counter()
    n_docs = 0
    for text in texts:
        tokens = {t.casefold() for t in strip_punct_and_stopwords(tokenize(text, spec), stopwords)}
        if tokens:
            df.update(tokens)
        n_docs += 1
    if not df:
        raise ValueError("empty vocabulary after preprocessing")
    vocabulary = {t: i for i, t in enumerate(sorted(df))}
    idf = np.zeros(len(vocabulary))
    for term, index in vocabulary.items():
        idf[index] = math.log((1 + n_docs) / (1 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, fitted_on=fitted_on, stopwords=stopwords, tokenizer=spec)


def score_tfidf(model: TfidfModel, question: str, paragraph: str) -> float:
    """Cosine of the two normalized TF-IDF vectors; OOV-only text scores 0."""
    qv = model.transform(question)
    pv = model.transform(paragraph)
    if len(pv) < len(qv):
        qv, pv = pv, qv
    score = sum(w * pv.get(i, 0.0) for i, w in qv.items())
    return min(max(score, 0.0), 1.0)


def tfidf_to_dict(model: TfidfModel) -> dict:
    terms = sorted(model.vocabulary, key=model.vocabulary.get)
    return {
        "terms": terms,
        "idf": [float(x) for x in model.idf],
        "fitted_on": model.fitted_on,
        "stopwords": list(model.stopwords),
    }


def tfidf_from_dict(d: dict, spec: TokenizerSpec = TokenizerSpec()) -> TfidfModel:
    vocabulary = {t: i for i, t in enumerate(d["terms"])}
    return TfidfModel(
        vocabulary=vocabulary,
        idf=np.asarray(d["idf"], dtype=float),
        fitted_on=d.get("fitted_on", ""),
        stopwords=tuple(d.get("stopwords", [])),
        tokenizer=spec,
    )


# --- trivial baselines ---------------------------------------------------

class TrivialKind:
    ONES = "ones"
    ZEROS = "zeros"
    RANDOM = "random"


def score_trivial(kind: str, instance_id: str, seed: int = 0) -> float:
    """Ones -> 1.0, Zeros -> 0.0, Random -> coin flip keyed by (seed, id)."""
    if kind == TrivialKind.ONES:
        return 1.0
    if kind == TrivialKind.ZEROS:
        return 0.0
    if kind == TrivialKind.RANDOM:
        digest = hashlib.blake2b(f"{seed}:{instance_id}".encode("utf-8"), digest_size=8).digest()
        return float(digest[0] & 1)
    raise ValueError(f"unknown trivial scorer kind {kind!r}")


def score_embedding(q_vec: Sequence[float], p_vec: Sequence[float]) -> float:
    """Cosine similarity of two dense vectors, in [-1, 1]."""
    q = np.asarray(q_vec, dtype=float)
    p = np.asarray(p_vec, dtype=float)
    if q.shape != p.shape:
        raise ValueError("embedding dimensions differ")
    qn = np.linalg.norm(q)
    pn = np.linalg.norm(p)
    if qn == 0.0 or pn == 0.0:
        raise ValueError("zero vector has no cosine similarity")
    return float(np.clip(np.dot(q, p) / (qn * pn), -1.0, 1.0))


# --- focal loss and the lexical classifier -------------------------------

class LossKind:
    WEIGHTED_FOCAL = "wfl"
    WEIGHTED_BCE = "wbce"


@dataclass(frozen=True)
class LossConfig:
    kind: str = LossKind.WEIGHTED_FOCAL
    gamma: float = 2.0
    alpha0: float = 1.0
    alpha1: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.alpha0 <= 0 or self.alpha1 <= 0:
            raise ValueError("class weights must be > 0")

    @property
    def effective_gamma(self) -> float:
        return 0.0 if self.kind == LossKind.WEIGHTED_BCE else self.gamma


def focal_loss(p: float, y: int, cfg: LossConfig = LossConfig()) -> tuple[float, float]:
    """Loss -a_t * (1 - p_t)^g * ln(p_t) and its derivative w.r.t. the logit.

    p_t = p for label 1, 1 - p for label 0; g = 0 recovers weighted
    cross-entropy. Caller clamps p into (0, 1).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly in (0, 1)")
    if y not in (0, 1):
        raise ValueError("label must be 0 or 1")
    gamma = cfg.effective_gamma
    alpha = cfg.alpha1 if y == 1 else cfg.alpha0
    pt = p if y == 1 else 1.0 - p
    one_minus = 1.0 - pt
    loss = -alpha * (one_minus**gamma) * math.log(pt)
    # dL/dpt, then chain through dpt/dz = +-p(1-p)
    if gamma == 0.0:
        dl_dpt = -alpha / pt
    else:
        dl_dpt = alpha * gamma * (one_minus ** (gamma - 1.0)) * math.log(pt) - alpha * (one_minus**gamma) / pt
    dpt_dz = p * (1.0 - p) if y == 1 else -p * (1.0 - p)
    return loss, dl_dpt * dpt_dz


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def _batch_focal(p: np.ndarray, y: np.ndarray, cfg: LossConfig) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized focal loss and dL/dz per sample."""
    p = np.clip(p, EPS, 1.0 - EPS)
    gamma = cfg.effective_gamma
    alpha = np.where(y == 1, cfg.alpha1, cfg.alpha0)
    pt = np.where(y == 1, p, 1.0 - p)
    one_minus = 1.0 - pt
    loss = -alpha * (one_minus**gamma) * np.log(pt)
    if gamma == 0.0:
        dl_dpt = -alpha / pt
    else:
        dl_dpt = alpha * gamma * (one_minus ** (gamma - 1.0)) * np.log(pt) - alpha * (one_minus**gamma) / pt
    dpt_dz = np.where(y == 1, p * (1.0 - p), -p * (1.0 - p))
    return loss, dl_dpt * dpt_dz


def balanced_alphas(labels: Sequence[int]) -> tuple[float, float]:
    """Inverse-frequency class weights normalized so a0*N0 + a1*N1 = N."""
    n = len(labels)
    n1 = sum(labels)
    n0 = n - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes required to balance weights")
    return n / (2.0 * n0), n / (2.0 * n1)


@dataclass
class LexicalModel:
    weights: np.ndarray
    bias: float
    feature_spec: tuple[str, ...]
    training_log: list[float] = field(default_factory=list)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        z = np.asarray(features, dtype=float) @ self.weights + self.bias
        return _sigmoid(np.atleast_1d(z))

    def score(self, feature_vector: Sequence[float]) -> float:
        return float(self.predict_proba(np.asarray(feature_vector, dtype=float).reshape(1, -1))[0])


def lexical_to_dict(model: LexicalModel) -> dict:
    return {
        "weights": [float(x) for x in model.weights],
        "bias": float(model.bias),
        "feature_spec": list(model.feature_spec),
        "training_log": [float(x) for x in model.training_log],
    }


def lexical_from_dict(d: dict) -> LexicalModel:
    return LexicalModel(
        weights=np.asarray(d["weights"], dtype=float),
        bias=float(d["bias"]),
        feature_spec=tuple(d["feature_spec"]),
        training_log=[float(x) for x in d.get("training_log", [])],
    )


FEATURE_SPEC = (
    "tfidf_cosine_question_candidate",
    "jaccard_question_candidate",
    "candidate_position_ratio",
    "candidate_length_log_tokens",
    "question_length_tokens",
    "tfidf_cosine_question_prior",
)


def featurize(
    instance: TrainingInstance,
    model: TfidfModel,
    position: int,
    total_paragraphs: int,
) -> np.ndarray:
    """Fixed-order lexical feature vector for one instance."""
    q_tokens = set(t.casefold() for t in model.preprocess(instance.question))
    c_tokens = set(t.casefold() for t in model.preprocess(instance.candidate))
    union = q_tokens | c_tokens
    jaccard = len(q_tokens & c_tokens) / len(union) if union else 0.0
    prior_text = " ".join(instance.prior)
    return np.array(
        [
            score_tfidf(model, instance.question, instance.candidate),
            jaccard,
            position / total_paragraphs if total_paragraphs else 0.0,
            math.log1p(len(tokenize(instance.candidate, model.tokenizer))),
            float(len(tokenize(instance.question, model.tokenizer))),
            score_tfidf(model, instance.question, prior_text) if prior_text else 0.0,
        ]
    )


def train_lexical(
    features: np.ndarray,
    labels: Sequence[int],
    cfg: LossConfig | None = None,
    lr: float = 0.1,
    steps: int = 500,
    seed: int = 0,
    batch_size: int | None = None,
) -> LexicalModel:
    """Logistic model trained by seeded mini-batch gradient descent.

    Default class weights are inverse-frequency balanced; pass an explicit
    LossConfig to override. Deterministic for a fixed seed.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be (n, d) matching labels")
    if len(set(y.tolist())) < 2:
        raise ValueError("training requires at least one instance of each label")
    if cfg is None:
        a0, a1 = balanced_alphas(y.tolist())
        cfg = LossConfig(alpha0=a0, alpha1=a1)

    rng = np.random.default_rng(seed)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    batch = batch_size or n
    log: list[float] = []
    for _ in range(steps):
        if batch >= n:
            idx = np.arange(n)
        else:
            idx = rng.choice(n, size=batch, replace=False)
        xb, yb = X[idx], y[idx]
        p = _sigmoid(xb @ w + b)
        loss, dz = _batch_focal(p, yb, cfg)
        log.append(float(loss.mean()))
        w -= lr * (xb.T @ dz) / len(idx)
        b -= lr * float(dz.mean())
    return LexicalModel(weights=w, bias=b, feature_spec=FEATURE_SPEC, training_log=log)


# --- external scorer protocol --------------------------------------------

@dataclass(frozen=True)
class EndpointSpec:
    """Line-delimited JSON scorer endpoint: child-process stdio or TCP."""

    command: tuple[str, ...] | None = None
    tcp_address: tuple[str, int] | None = None
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if (self.command is None) == (self.tcp_address is None):
            raise ValueError("specify exactly one of command or tcp_address")


class ExternalScorerError(RuntimeError):
    pass


def _instance_request(instance: TrainingInstance) -> dict:
    return {
        "id": f"{instance.qa_id}#{instance.paragraph_index}",
        "question": instance.question,
        "title": instance.title,
        "prior": list(instance.prior),
        "candidate": instance.candidate,
    }


def _read_lines(stream, out: list[str]) -> None:
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.strip()
        if line:
            out.append(line)


def external_score(
    instances: Sequence[TrainingInstance],
    endpoint: EndpointSpec,
    scorer_id: str = "external",
) -> list[ScoreRecord]:
    """Score a batch over the wire protocol; one record per input instance.

    Handshake: first line from the scorer declares {"score_range": [lo, hi]}.
    Missing or malformed responses become per-instance error records; the
    batch never silently drops an instance.
    """
    requests = [_instance_request(inst) for inst in instances]
    lines: list[str] = []
    if endpoint.command is not None:
        proc = subprocess.Popen(
            list(endpoint.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        reader = threading.Thread(target=_read_lines, args=(proc.stdout, lines), daemon=True)
        reader.start()
        try:
            for req in requests:
                proc.stdin.write(json.dumps(req, ensure_ascii=False) + "\n")
            proc.stdin.close()
            proc.wait(timeout=endpoint.timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
        reader.join(timeout=endpoint.timeout)
    else:
        host, port = endpoint.tcp_address
        with socket.create_connection((host, port), timeout=endpoint.timeout) as sock:
            sock_file = sock.makefile("rw", encoding="utf-8", newline="\n")
            for req in requests:
                sock_file.write(json.dumps(req, ensure_ascii=False) + "\n")
            sock_file.flush()
            sock.shutdown(socket.SHUT_WR)
            _read_lines(sock_file, lines)

    if not lines:
        raise ExternalScorerError("no handshake from external scorer")
    try:
        handshake = json.loads(lines[0])
        lo, hi = handshake["score_range"]
        score_range = (float(lo), float(hi))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ExternalScorerError(f"bad handshake line: {lines[0]!r}") from exc

    responses: dict[str, dict] = {}
    for line in lines[1:]:
        try:
            msg = json.loads(line)
            responses[str(msg["id"])] = msg
        except (json.JSONDecodeError, KeyError, TypeError):
            continue  # malformed lines surface as missing-id errors below

    records: list[ScoreRecord] = []
    for inst, req in zip(instances, requests):
        msg = responses.get(req["id"])
        if msg is None:
            records.append(
                ScoreRecord(inst.qa_id, inst.paragraph_index, math.nan, scorer_id, score_range, error="missing response")
            )
        elif "error" in msg:
            records.append(
                ScoreRecord(inst.qa_id, inst.paragraph_index, math.nan, scorer_id, score_range, error=str(msg["error"]))
            )
        else:
            try:
                score = float(msg["score"])
            except (KeyError, TypeError, ValueError):
                records.append(
                    ScoreRecord(inst.qa_id, inst.paragraph_index, math.nan, scorer_id, score_range, error="malformed response")
                )
                continue
            records.append(ScoreRecord(inst.qa_id, inst.paragraph_index, score, scorer_id, score_range))
    return records
