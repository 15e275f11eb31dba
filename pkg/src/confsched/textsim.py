"""TF-IDF similarity over paper titles, abstracts, and keywords.

Term weight is raw term frequency times smoothed inverse document frequency
``ln((1 + N) / (1 + df)) + 1``; document vectors are L2-normalized. Tokens are
lowercased alphanumeric runs of length >= 2 (no stemming, no stopword list).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .corpus import Dataset, Paper, UnknownIdError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


@dataclass
class TfIdfModel:
    vocabulary: dict[str, int]
    document_vectors: dict[str, dict[int, float]]  # paper id -> {term index: weight}
    corpus_size: int


def _paper_tokens(paper: Paper) -> list[str]:
    text = " ".join([paper.title, paper.abstract, " ".join(paper.keywords)])
    tokens = tokenize(text)
    if not tokens:
        # Degenerate documents (nothing tokenizes to a >=2-char run) would
        # otherwise produce a zero vector; fall back to the id as a token.
        tokens = [paper.id.lower() or "untitled"]
    return tokens


def build_tfidf(papers: dict[str, Paper] | list[Paper]) -> TfIdfModel:
    """Build normalized TF-IDF vectors for every paper in the corpus."""
    paper_list = list(papers.values()) if isinstance(papers, dict) else list(papers)
    if not paper_list:
        raise ValueError("cannot build a TF-IDF model over an empty corpus")

    token_lists = {p.id: _paper_tokens(p) for p in paper_list}
    df: dict[str, int] = {}
    for tokens in token_lists.values():
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    vocabulary = {term: i for i, term in enumerate(sorted(df))}

    n = len(paper_list)
    idf = {term: math.log((1 + n) / (1 + count)) + 1.0 for term, count in df.items()}

    vectors: dict[str, dict[int, float]] = {}
    for pid, tokens in token_lists.items():
        tf: dict[str, int] = {}
        for term in tokens:
            tf[term] = tf.get(term, 0) + 1
        vec = {vocabulary[term]: count * idf[term] for term, count in tf.items()}
        norm = math.sqrt(sum(w * w for w in vec.values()))
        vectors[pid] = {i: w / norm for i, w in vec.items()}
    return TfIdfModel(vocabulary, vectors, n)


def cosine(model: TfIdfModel, p: str, q: str) -> float:
    """Cosine similarity of two papers' TF-IDF vectors, in [0, 1]."""
    try:
        vp = model.document_vectors[p]
        vq = model.document_vectors[q]
    except KeyError as exc:
        raise UnknownIdError(f"unknown paper id {exc.args[0]!r}") from exc
    if len(vq) < len(vp):
        vp, vq = vq, vp
    dot = sum(w * vq.get(i, 0.0) for i, w in vp.items())
    return min(dot, 1.0)


def candidate_list(model: TfIdfModel, dataset: Dataset, p: str, k: int = 20) -> list[str]:
    """The k most similar papers to ``p``, for presenting to its authors.

    Papers sharing ``p``'s committee group (when groups are present) come
    first, ordered by descending cosine; the rest follow, also by descending
    cosine. Ties break by ascending paper id. ``p`` itself is excluded.
    """
    if p not in model.document_vectors:
        raise UnknownIdError(f"unknown paper id {p!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    group = dataset.committee_groups.get(p)
    scored = []
    for pid in dataset.papers:
        if pid == p:
            continue
        in_group = group is not None and dataset.committee_groups.get(pid) == group
        scored.append((0 if in_group else 1, -cosine(model, p, pid), pid))
    scored.sort()
    return [pid for _, _, pid in scored[:k]]
