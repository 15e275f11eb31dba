"""Item-item collaborative filtering over bookmark columns, with TF-IDF fallback.

A candidate's collaborative score is the sum of its column-cosine similarity
to each of the user's bookmarked papers. When those positive scores cannot
fill the requested list (or the user has no bookmarks at all) the remainder is
content-based: ranked by best TF-IDF cosine against the user's bookmarks, or
by global bookmark popularity for a cold user.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, UnknownIdError
from .textsim import TfIdfModel, cosine

COLLABORATIVE = "collaborative"
CONTENT = "content"


@dataclass
class RatingsMatrix:
    attendee_ids: list[str]
    paper_ids: list[str]
    matrix: np.ndarray  # (attendees, papers) binary
    row_index: dict[str, int]
    col_index: dict[str, int]

    def bookmarks_of(self, person: str) -> frozenset[str]:
        row = self.row_index.get(person)
        if row is None:
            return frozenset()
        cols = np.nonzero(self.matrix[row])[0]
        return frozenset(self.paper_ids[c] for c in cols)


@dataclass(frozen=True)
class Recommendation:
    paper_id: str
    score: float
    basis: str  # "collaborative" or "content"


def build_ratings(dataset: Dataset) -> RatingsMatrix:
    """Binary attendee-by-paper matrix; attendees with empty sets are dropped."""
    attendees = [b.attendee_id for b in dataset.bookmarks if b.paper_ids]
    papers = sorted(dataset.papers)
    col_index = {pid: i for i, pid in enumerate(papers)}
    matrix = np.zeros((len(attendees), len(papers)), np.float64)
    for row, bookmark in enumerate(b for b in dataset.bookmarks if b.paper_ids):
        for pid in bookmark.paper_ids:
            matrix[row, col_index[pid]] = 1.0
    return RatingsMatrix(attendees, papers, matrix, {a: i for i, a in enumerate(attendees)}, col_index)


def item_similarity(ratings: RatingsMatrix, p: str, q: str) -> float:
    """Cosine of two binary bookmark columns; zero when either column is empty."""
    try:
        cp = ratings.matrix[:, ratings.col_index[p]]
        cq = ratings.matrix[:, ratings.col_index[q]]
    except KeyError as exc:
        raise UnknownIdError(f"unknown paper id {exc.args[0]!r}") from exc
    np_count = cp.sum()
    nq_count = cq.sum()
    if np_count == 0 or nq_count == 0:
        return 0.0
    return float((cp @ cq) / math.sqrt(np_count * nq_count))


def recommend(
    ratings: RatingsMatrix, tfidf_model: TfIdfModel, user: str, k: int
) -> list[Recommendation]:
    """Top-k papers for ``user``, never including their own bookmarks."""
    if k < 1:
        raise ValueError("k must be >= 1")
    marked = ratings.bookmarks_of(user)
    candidates = [pid for pid in ratings.paper_ids if pid not in marked]

    results: list[Recommendation] = []
    if marked:
        co = ratings.matrix.T @ ratings.matrix  # exact integer co-bookmark counts
        counts = np.diag(co)
        marked_cols = [ratings.col_index[pid] for pid in sorted(marked)]
        scored = []
        for pid in candidates:
            i = ratings.col_index[pid]
            if counts[i] == 0:
                continue
            # summed in sorted-bookmark order so the score is reproducible
            score = 0.0
            for j in marked_cols:
                if counts[j] and co[i, j]:
                    score += co[i, j] / math.sqrt(counts[i] * counts[j])
            if score > 0.0:
                scored.append((float(score), pid))
        scored.sort(key=lambda t: (-t[0], t[1]))
        results = [Recommendation(pid, score, COLLABORATIVE) for score, pid in scored[:k]]
        if len(results) < k:
            chosen = {r.paper_id for r in results}
            padding = [
                (max(cosine(tfidf_model, pid, b) for b in marked), pid)
                for pid in candidates
                if pid not in chosen
            ]
            padding.sort(key=lambda t: (-t[0], t[1]))
            results.extend(
                Recommendation(pid, score, CONTENT) for score, pid in padding[: k - len(results)]
            )
    else:
        counts = ratings.matrix.sum(axis=0)
        ranked = sorted(candidates, key=lambda pid: (-counts[ratings.col_index[pid]], pid))
        results = [
            Recommendation(pid, float(counts[ratings.col_index[pid]]), CONTENT)
            for pid in ranked[:k]
        ]
    return results


def recommendation_records(recs: list[Recommendation]) -> list[dict]:
    return [{"paper_id": r.paper_id, "score": r.score, "basis": r.basis} for r in recs]
