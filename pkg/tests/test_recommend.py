from __future__ import annotations

import math
import random

import pytest

from confsched.corpus import UnknownIdError
from confsched.recommend import (
    COLLABORATIVE,
    CONTENT,
    Recommendation,
    build_ratings,
    item_similarity,
    recommend,
)
from confsched.textsim import build_tfidf, cosine
from conftest import make_dataset, random_preference_dataset


def brute_force_recommend(dataset, user, k):
    """Independent oracle: explicit two-phase scoring over raw bookmark sets."""
    sets = {b.attendee_id: set(b.paper_ids) for b in dataset.bookmarks}
    marked = sets.get(user, set())
    papers = sorted(dataset.papers)
    model = build_tfidf(dataset.papers)

    def col(p):
        return {u for u, s in sets.items() if p in s}

    def sim(p, q):
        cp, cq = col(p), col(q)
        if not cp or not cq:
            return 0.0
        return len(cp & cq) / math.sqrt(len(cp) * len(cq))

    candidates = [p for p in papers if p not in marked]
    out = []
    if marked:
        scored = [(sum(sim(c, j) for j in sorted(marked)), c) for c in candidates]
        positive = sorted([(s, c) for s, c in scored if s > 0], key=lambda t: (-t[0], t[1]))
        out = [Recommendation(c, s, COLLABORATIVE) for s, c in positive[:k]]
        if len(out) < k:
            chosen = {r.paper_id for r in out}
            padding = sorted(
                ((max(cosine(model, c, j) for j in marked), c) for c in candidates if c not in chosen),
                key=lambda t: (-t[0], t[1]),
            )
            out += [Recommendation(c, s, CONTENT) for s, c in padding[: k - len(out)]]
    else:
        by_pop = sorted(candidates, key=lambda c: (-len(col(c)), c))
        out = [Recommendation(c, float(len(col(c))), CONTENT) for c in by_pop[:k]]
    return out


# -- item similarity -------------------------------------------------------------


def test_identical_columns_similarity_one(ratings_dataset):
    dataset = make_dataset(["p1", "p2"], bookmarks={"u1": {"p1", "p2"}, "u2": {"p1", "p2"}})
    ratings = build_ratings(dataset)
    assert item_similarity(ratings, "p1", "p2") == pytest.approx(1.0)


def test_empty_column_similarity_zero(ratings_dataset):
    ratings = build_ratings(ratings_dataset)
    # q5 is never bookmarked
    for other in ("q1", "q2", "q3", "q4"):
        assert item_similarity(ratings, "q5", other) == 0.0


def test_half_overlap_column_cosine():
    dataset = make_dataset(["p", "q"], bookmarks={"a1": {"p"}, "a2": {"p", "q"}, "a3": {"q"}})
    ratings = build_ratings(dataset)
    assert item_similarity(ratings, "p", "q") == pytest.approx(0.5)  # 1 / (sqrt(2)*sqrt(2))


def test_similarity_symmetric_and_unknown_raises(ratings_dataset):
    ratings = build_ratings(ratings_dataset)
    assert item_similarity(ratings, "q1", "q2") == item_similarity(ratings, "q2", "q1")
    with pytest.raises(UnknownIdError):
        item_similarity(ratings, "q1", "zz")


# -- recommend --------------------------------------------------------------------


def test_cold_user_gets_popularity_ranked_content(ratings_dataset):
    ratings = build_ratings(ratings_dataset)
    model = build_tfidf(ratings_dataset.papers)
    recs = recommend(ratings, model, "stranger", k=3)
    # bookmark counts: q1:2 q2:2 q3:2 q4:1 q5:0 -> ties by ascending id
    assert [r.paper_id for r in recs] == ["q1", "q2", "q3"]
    assert all(r.basis == CONTENT for r in recs)
    assert recs == brute_force_recommend(ratings_dataset, "stranger", 3)


def test_user_with_everything_bookmarked_gets_nothing():
    dataset = make_dataset(["p1", "p2"], bookmarks={"u1": {"p1", "p2"}, "u2": {"p1"}})
    ratings = build_ratings(dataset)
    model = build_tfidf(dataset.papers)
    assert recommend(ratings, model, "u1", k=5) == []


def test_fixture_matches_bruteforce_oracle(ratings_dataset):
    ratings = build_ratings(ratings_dataset)
    model = build_tfidf(ratings_dataset.papers)
    for user in ("u1", "u2", "u3", "u4", "nobody"):
        for k in (1, 2, 3, 5):
            assert recommend(ratings, model, user, k) == brute_force_recommend(
                ratings_dataset, user, k
            ), f"user={user} k={k}"


def test_fixture_u1_shape(ratings_dataset):
    # u1 bookmarked q1,q2; q3 is co-bookmarked (collaborative), q4/q5 pad by text
    ratings = build_ratings(ratings_dataset)
    model = build_tfidf(ratings_dataset.papers)
    recs = recommend(ratings, model, "u1", k=3)
    assert [r.paper_id for r in recs] == ["q3", "q4", "q5"]
    assert [r.basis for r in recs] == [COLLABORATIVE, CONTENT, CONTENT]
    assert recs[0].score == pytest.approx(1.0)  # sim(q3,q1)+sim(q3,q2) = 0.5+0.5


def test_k_must_be_positive(ratings_dataset):
    ratings = build_ratings(ratings_dataset)
    model = build_tfidf(ratings_dataset.papers)
    with pytest.raises(ValueError):
        recommend(ratings, model, "u1", k=0)


@pytest.mark.parametrize("seed", range(15))
def test_random_instances_match_bruteforce_and_never_leak_bookmarks(seed):
    rng = random.Random(seed)
    dataset = random_preference_dataset(rng, max_persons=8, max_papers=8)
    ratings = build_ratings(dataset)
    model = build_tfidf(dataset.papers)
    users = [b.attendee_id for b in dataset.bookmarks] + ["cold"]
    for user in users:
        k = rng.randint(1, 6)
        recs = recommend(ratings, model, user, k)
        assert recs == brute_force_recommend(dataset, user, k)
        marked = ratings.bookmarks_of(user)
        assert not marked & {r.paper_id for r in recs}
        assert len({r.paper_id for r in recs}) == len(recs)
        # two-phase ordering: collaborative block first, then content
        bases = [r.basis for r in recs]
        if CONTENT in bases and COLLABORATIVE in bases:
            assert bases.index(CONTENT) > max(i for i, b in enumerate(bases) if b == COLLABORATIVE)
        for r in recs:
            if r.basis == COLLABORATIVE:
                assert r.score > 0


def test_locality_on_disjoint_submatrices():
    # two communities with disjoint papers; a new bookmark in one never
    # changes recommendations in the other
    papers_a = ["a1", "a2", "a3"]
    papers_b = ["b1", "b2", "b3"]
    base = {
        "ua1": {"a1", "a2"},
        "ua2": {"a2", "a3"},
        "ub1": {"b1", "b2"},
        "ub2": {"b2", "b3"},
    }
    d1 = make_dataset(papers_a + papers_b, bookmarks=base)
    extended = dict(base)
    extended["ub3"] = {"b1", "b3"}
    d2 = make_dataset(papers_a + papers_b, bookmarks=extended)
    m1, m2 = build_tfidf(d1.papers), build_tfidf(d2.papers)
    r1, r2 = build_ratings(d1), build_ratings(d2)
    before = recommend(r1, m1, "ua1", k=2)
    after = recommend(r2, m2, "ua1", k=2)
    collab_before = [r for r in before if r.basis == COLLABORATIVE]
    collab_after = [r for r in after if r.basis == COLLABORATIVE]
    assert collab_before == collab_after
