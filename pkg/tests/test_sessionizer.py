from __future__ import annotations

import math
import random

import pytest

from confsched.affinity import (
    ATTENDEE_BOOKMARK,
    AffinityMatrix,
    build_affinity,
    extract_preferences,
    popularity,
)
from confsched.sessionizer import (
    InstanceTooLargeError,
    SessionConfig,
    coherence,
    exact_mix_exists,
    objective_of,
    sessionization_from_records,
    sessionization_records,
    sessionize,
    sessionize_exact,
    _partitions,
)
from conftest import make_dataset


def random_instance(rng: random.Random, n_papers: int = 8):
    """Random bookmark-driven affinity over exactly n_papers."""
    paper_ids = [f"p{i}" for i in range(n_papers)]
    bookmarks = {}
    for u in range(rng.randint(3, 10)):
        size = rng.randint(2, max(2, n_papers // 2))
        bookmarks[f"u{u}"] = set(rng.sample(paper_ids, size))
    dataset = make_dataset(paper_ids, bookmarks)
    prefs = extract_preferences(dataset, ATTENDEE_BOOKMARK)
    return dataset, build_affinity(prefs), popularity(prefs)


def partition_of(result):
    return sorted(tuple(sorted(s.paper_ids)) for s in result.sessions)


def assert_valid_partition(result, paper_ids, config):
    seen = [p for s in result.sessions for p in s.paper_ids]
    assert sorted(seen) == sorted(paper_ids)
    sizes = sorted(len(s.paper_ids) for s in result.sessions)
    small = [z for z in sizes if z < config.min_size]
    if exact_mix_exists(len(paper_ids), config.min_size, config.max_size):
        assert not small
    else:
        assert len(small) <= 1
    assert all(z <= config.max_size for z in sizes)


# -- coherence ----------------------------------------------------------------


def test_singleton_coherence_is_zero():
    assert coherence({"p1"}, AffinityMatrix("x")) == 0


def test_triangle_coherence_hand_sum():
    matrix = AffinityMatrix("x", {("p1", "p2"): 2.0, ("p2", "p3"): 2.0, ("p1", "p3"): 1.0})
    assert coherence({"p1", "p2", "p3"}, matrix) == 5.0


def test_disjoint_preferences_zero_coherence():
    matrix = AffinityMatrix("x", {("q1", "q2"): 4.0})
    assert coherence({"p1", "p2", "p3"}, matrix) == 0.0


# -- enumeration oracle ---------------------------------------------------------


def test_partition_enumeration_count_8_choose_blocks():
    # 8 papers into two blocks of 4: 8! / (4! 4! 2!) = 35
    items = tuple(f"p{i}" for i in range(8))
    assert sum(1 for _ in _partitions(items, 4, 4, 0)) == 35


def test_partition_enumeration_undersized_only_when_forced():
    items = tuple(f"p{i}" for i in range(6))
    # 6 papers with sizes 4..4 force one undersized block
    parts = list(_partitions(items, 4, 4, 1))
    assert parts and all(sorted(len(b) for b in p) == [2, 4] for p in parts)
    # with sizes 3..4 an exact mix exists, so no undersized blocks
    parts = list(_partitions(items, 3, 4, 0))
    assert parts and all(all(3 <= len(b) <= 4 for b in p) for p in parts)


def test_exact_four_papers_single_partition():
    dataset, matrix, pop = random_instance(random.Random(0), 4)
    config = SessionConfig(min_size=4, max_size=4, restarts=1, seed=0)
    result = sessionize_exact(dataset, matrix, pop, config)
    assert partition_of(result) == [tuple(sorted(dataset.papers))]


def test_exact_too_large_rejected():
    dataset, matrix, pop = random_instance(random.Random(0), 13)
    with pytest.raises(InstanceTooLargeError):
        sessionize_exact(dataset, matrix, pop, SessionConfig())


# -- sessionize ------------------------------------------------------------------


def test_four_papers_forced_single_session():
    dataset, matrix, pop = random_instance(random.Random(1), 4)
    config = SessionConfig(min_size=4, max_size=4, restarts=2, seed=0)
    result = sessionize(dataset, matrix, pop, config)
    assert partition_of(result) == [tuple(sorted(dataset.papers))]


def test_two_cliques_recovered(cliques_dataset):
    prefs = extract_preferences(cliques_dataset, ATTENDEE_BOOKMARK)
    matrix = build_affinity(prefs)
    pop = popularity(prefs)
    config = SessionConfig(restarts=4, seed=0)
    result = sessionize(cliques_dataset, matrix, pop, config)
    assert partition_of(result) == [("c1", "c2", "c3", "c4"), ("c5", "c6", "c7", "c8")]
    exact = sessionize_exact(cliques_dataset, matrix, pop, config)
    assert partition_of(exact) == partition_of(result)
    assert result.objective == exact.objective == 24.0


def test_undersized_corpus_single_session_with_warning():
    dataset, matrix, pop = random_instance(random.Random(2), 3)
    result = sessionize(dataset, matrix, pop, SessionConfig(min_size=4, max_size=5, restarts=1))
    assert len(result.sessions) == 1
    assert result.warnings


def test_objective_equals_recomputation():
    for seed in range(10):
        dataset, matrix, pop = random_instance(random.Random(seed), 9)
        config = SessionConfig(restarts=4, seed=seed, balance_weight=0.5)
        result = sessionize(dataset, matrix, pop, config)
        blocks = [s.paper_ids for s in result.sessions]
        assert result.objective == pytest.approx(
            objective_of(blocks, matrix, pop, config.balance_weight), abs=1e-9
        )
        for s in result.sessions:
            assert s.coherence == pytest.approx(coherence(s.paper_ids, matrix), abs=1e-12)


def test_partition_validity_random_sizes():
    for seed in range(12):
        rng = random.Random(seed)
        n = rng.randint(4, 14)
        dataset, matrix, pop = random_instance(rng, n)
        config = SessionConfig(restarts=3, seed=seed)
        result = sessionize(dataset, matrix, pop, config)
        assert_valid_partition(result, list(dataset.papers), config)


def test_heuristic_never_beats_exact_and_usually_matches():
    hits = 0
    total = 30
    for seed in range(total):
        dataset, matrix, pop = random_instance(random.Random(1000 + seed), 8)
        config = SessionConfig(min_size=4, max_size=4, restarts=20, seed=seed)
        got = sessionize(dataset, matrix, pop, config)
        exact = sessionize_exact(dataset, matrix, pop, config)
        assert got.objective <= exact.objective + 1e-9
        if math.isclose(got.objective, exact.objective, abs_tol=1e-9):
            hits += 1
    assert hits >= int(total * 0.9)


def test_exact_monotone_in_added_affinity():
    dataset, matrix, pop = random_instance(random.Random(5), 8)
    config = SessionConfig(min_size=4, max_size=4, restarts=1, balance_weight=0.0)
    before = sessionize_exact(dataset, matrix, pop, config).objective
    bumped = AffinityMatrix(matrix.source, dict(matrix.counts))
    bumped.add("p0", "p1", 3.0)
    after = sessionize_exact(dataset, bumped, pop, config).objective
    assert after >= before


def test_exact_permutation_invariance():
    dataset, matrix, pop = random_instance(random.Random(6), 8)
    config = SessionConfig(min_size=4, max_size=4, restarts=1)
    base = sessionize_exact(dataset, matrix, pop, config)

    relabel = {pid: f"z{9 - i}" for i, pid in enumerate(sorted(dataset.papers))}
    dataset2 = make_dataset([relabel[p] for p in dataset.papers])
    matrix2 = AffinityMatrix(matrix.source)
    for (p, q), c in matrix.counts.items():
        matrix2.add(relabel[p], relabel[q], c)
    pop2 = {relabel[p]: c for p, c in pop.items()}
    swapped = sessionize_exact(dataset2, matrix2, pop2, config)
    assert swapped.objective == pytest.approx(base.objective, abs=1e-9)


def test_balance_weight_penalizes_popularity_spread():
    # two high-popularity papers: with a huge beta the optimum splits them
    paper_ids = [f"p{i}" for i in range(8)]
    dataset = make_dataset(paper_ids)
    matrix = AffinityMatrix("x", {("p0", "p1"): 1.0})
    pop = {"p0": 50, "p1": 50}
    config = SessionConfig(min_size=4, max_size=4, restarts=1, balance_weight=100.0)
    result = sessionize_exact(dataset, matrix, pop, config)
    together = any({"p0", "p1"} <= s.paper_ids for s in result.sessions)
    assert not together


def test_records_roundtrip():
    dataset, matrix, pop = random_instance(random.Random(7), 9)
    result = sessionize(dataset, matrix, pop, SessionConfig(restarts=2, seed=1))
    records = sessionization_records(result)
    back = sessionization_from_records(records)
    assert partition_of(back) == partition_of(result)
    assert back.objective == result.objective
    assert back.min_size == result.min_size and back.max_size == result.max_size


def test_deterministic_given_seed():
    dataset, matrix, pop = random_instance(random.Random(8), 10)
    a = sessionize(dataset, matrix, pop, SessionConfig(restarts=5, seed=42))
    b = sessionize(dataset, matrix, pop, SessionConfig(restarts=5, seed=42))
    assert partition_of(a) == partition_of(b)
    assert a.objective == b.objective
