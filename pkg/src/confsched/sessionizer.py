"""Partition papers into capacity-bounded, affinity-coherent sessions.

The heuristic path seeds sessions greedily from high-affinity pairs and then
runs first-improvement local search (relocations and swaps) over several
randomized restarts; ``sessionize_exact`` enumerates every feasible partition
of small instances and serves as the optimality oracle.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _kernels
from .affinity import AffinityMatrix
from .corpus import Dataset

MAX_EXACT_PAPERS = 12


class InstanceTooLargeError(ValueError):
    """Exhaustive enumeration was asked for an instance beyond its size cap."""


@dataclass(frozen=True)
class SessionConfig:
    min_size: int = 4
    max_size: int = 5
    balance_weight: float = 0.0  # beta: popularity-variance penalty, off by default
    restarts: int = 8
    seed: int = 0
    max_passes: int = 200

    def __post_init__(self):
        if not (1 <= self.min_size <= self.max_size):
            raise ValueError("need 1 <= min_size <= max_size")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class Session:
    id: str
    paper_ids: frozenset[str]
    coherence: float


@dataclass
class Sessionization:
    sessions: list[Session]
    objective: float
    min_size: int = 4
    max_size: int = 5
    balance_weight: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def session_of(self) -> dict[str, str]:
        return {pid: s.id for s in self.sessions for pid in s.paper_ids}

    def by_id(self) -> dict[str, Session]:
        return {s.id: s for s in self.sessions}


def coherence(paper_set, affinity: AffinityMatrix) -> float:
    """Sum of pairwise affinity over all internal pairs of the set."""
    papers = sorted(paper_set)
    return sum(affinity.get(p, q) for p, q in combinations(papers, 2))


def exact_mix_exists(n: int, min_size: int, max_size: int) -> bool:
    """Whether n papers split into sessions whose sizes all fit [min, max]."""
    k = 1
    while k * min_size <= n:
        if n <= k * max_size:
            return True
        k += 1
    return False


def objective_of(partition, affinity: AffinityMatrix, popularity: dict[str, int], beta: float) -> float:
    """Recompute the objective from scratch: total coherence minus beta * popularity variance."""
    total = sum(coherence(block, affinity) for block in partition)
    if beta > 0.0 and partition:
        spop = [float(sum(popularity.get(p, 0) for p in block)) for block in partition]
        mean = sum(spop) / len(spop)
        total -= beta * (sum((v - mean) ** 2 for v in spop) / len(spop))
    return total


def _canonical(partition) -> tuple[tuple[str, ...], ...]:
    return tuple(sorted(tuple(sorted(block)) for block in partition))


def _build_sessionization(partition, affinity, popularity, config, warnings) -> Sessionization:
    blocks = _canonical(partition)
    width = max(2, len(str(len(blocks))))
    sessions = [
        Session(f"S{i + 1:0{width}d}", frozenset(block), coherence(block, affinity))
        for i, block in enumerate(blocks)
    ]
    objective = objective_of(blocks, affinity, popularity, config.balance_weight)
    return Sessionization(
        sessions,
        objective,
        config.min_size,
        config.max_size,
        config.balance_weight,
        list(warnings),
    )


def _dense_affinity(paper_ids: list[str], affinity: AffinityMatrix) -> np.ndarray:
    index = {pid: i for i, pid in enumerate(paper_ids)}
    dense = np.zeros((len(paper_ids), len(paper_ids)), np.float64)
    for (p, q), count in affinity.counts.items():
        i = index.get(p)
        j = index.get(q)
        if i is not None and j is not None:
            dense[i, j] = count
            dense[j, i] = count
    return dense


def _greedy_seed(dense: np.ndarray, rank: np.ndarray, min_size: int, max_size: int) -> list[list[int]]:
    """Grow sessions from the strongest unassigned pair; ties follow ``rank``."""
    n = dense.shape[0]
    unassigned = list(range(n))
    blocks: list[list[int]] = []
    while unassigned:
        if len(unassigned) <= max_size:
            blocks.append(sorted(unassigned))
            break
        ua = np.array(unassigned, np.int64)
        sub = dense[np.ix_(ua, ua)]
        best_value = sub.max()
        rows, cols = np.nonzero(sub >= best_value)
        best_pair = None
        best_key = None
        for r, c in zip(rows, cols):
            if r >= c:
                continue
            i, j = int(ua[r]), int(ua[c])
            key = (min(rank[i], rank[j]), max(rank[i], rank[j]))
            if best_key is None or key < best_key:
                best_key = key
                best_pair = (i, j)
        current = list(best_pair)
        members = set(current)
        while len(current) < max_size:
            rest = np.array([i for i in unassigned if i not in members], np.int64)
            if rest.size == 0:
                break
            gains = dense[np.ix_(rest, np.array(current, np.int64))].sum(axis=1)
            top = gains.max()
            candidates = rest[gains >= top]
            pick = int(min(candidates, key=lambda i: rank[i]))
            if len(current) >= min_size and top <= 0.0:
                break
            current.append(pick)
            members.add(pick)
        blocks.append(sorted(current))
        unassigned = [i for i in unassigned if i not in members]
    return blocks


def _repair_sizes(blocks: list[list[int]], dense: np.ndarray, rank: np.ndarray, min_size: int, max_size: int) -> list[list[int]]:
    """Fix an undersized trailing block when an in-bounds size mix exists.

    Either absorbs the trailing block into the others' spare capacity or
    steals papers from oversize-of-min blocks until the trailing block
    reaches ``min_size``.
    """
    n = sum(len(b) for b in blocks)
    if len(blocks) < 2 or not exact_mix_exists(n, min_size, max_size):
        return blocks
    last = blocks[-1]
    if len(last) >= min_size:
        return blocks
    others = [list(b) for b in blocks[:-1]]
    spare = sum(max_size - len(b) for b in others)
    if spare >= len(last):
        for i in sorted(last, key=lambda i: rank[i]):
            gains = [
                (dense[i, b].sum() if len(b) < max_size else -np.inf, -len(b), bi)
                for bi, b in enumerate(others)
            ]
            _, _, bi = max(gains)
            others[bi].append(i)
        return [sorted(b) for b in others]
    while len(last) < min_size:
        best = None
        for bi, b in enumerate(others):
            if len(b) <= min_size:
                continue
            for i in b:
                gain = dense[i, last].sum() - dense[i, [m for m in b if m != i]].sum()
                key = (gain, -rank[i])
                if best is None or key > best[0]:
                    best = (key, bi, i)
        if best is None:
            break
        _, bi, i = best
        others[bi].remove(i)
        last.append(i)
    return [sorted(b) for b in others] + [sorted(last)]


def sessionize(
    dataset: Dataset,
    affinity: AffinityMatrix,
    popularity: dict[str, int],
    config: SessionConfig | None = None,
) -> Sessionization:
    """Best partition found by multi-restart greedy seeding plus local search."""
    config = config or SessionConfig()
    paper_ids = sorted(dataset.papers)
    if not paper_ids:
        raise ValueError("dataset has zero papers")
    warnings: list[str] = []
    if len(paper_ids) < config.min_size:
        warnings.append(
            f"only {len(paper_ids)} papers: single undersized session below min_size={config.min_size}"
        )
        return _build_sessionization([paper_ids], affinity, popularity, config, warnings)

    n = len(paper_ids)
    dense = _dense_affinity(paper_ids, affinity)
    pop = np.array([float(popularity.get(pid, 0)) for pid in paper_ids], np.float64)
    small_budget = 0 if exact_mix_exists(n, config.min_size, config.max_size) else 1
    if small_budget:
        warnings.append("corpus size forces one session below min_size")

    master = random.Random(config.seed)
    restart_seeds = [master.randrange(2**32) for _ in range(config.restarts)]
    best: tuple[float, tuple, list[list[int]]] | None = None
    for rseed in restart_seeds:
        rng = random.Random(rseed)
        perm = list(range(n))
        rng.shuffle(perm)
        rank = np.empty(n, np.int64)
        for position, i in enumerate(perm):
            rank[i] = position
        blocks = _greedy_seed(dense, rank, config.min_size, config.max_size)
        blocks = _repair_sizes(blocks, dense, rank, config.min_size, config.max_size)
        labels = np.empty(n, np.int64)
        for bi, block in enumerate(blocks):
            for i in block:
                labels[i] = bi
        order = np.array(perm, np.int64)
        objective = float(
            _kernels.improve_partition(
                dense,
                pop,
                labels,
                len(blocks),
                config.min_size,
                config.max_size,
                small_budget,
                config.balance_weight,
                order,
                config.max_passes,
            )
        )
        partition = [[] for _ in range(len(blocks))]
        for i, label in enumerate(labels):
            partition[label].append(paper_ids[i])
        rep = _canonical(partition)
        if best is None or objective > best[0] + 1e-9 or (abs(objective - best[0]) <= 1e-9 and rep < best[1]):
            best = (objective, rep, [list(block) for block in rep])
    return _build_sessionization(best[2], affinity, popularity, config, warnings)


def _remaining_feasible(r: int, min_size: int, max_size: int, small_budget: int) -> bool:
    if r == 0:
        return True
    if exact_mix_exists(r, min_size, max_size):
        return True
    if small_budget >= 1:
        k = 1
        while (k - 1) * min_size + 1 <= r:
            if r <= (k - 1) * max_size + (min_size - 1):
                return True
            k += 1
    return False


def _partitions(items: tuple[str, ...], min_size: int, max_size: int, small_budget: int):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for size in range(1, min(max_size, len(items)) + 1):
        undersized = size < min_size
        if undersized and small_budget < 1:
            continue
        budget = small_budget - (1 if undersized else 0)
        for combo in combinations(rest, size - 1):
            block = (first,) + combo
            remaining = tuple(x for x in rest if x not in set(combo))
            if not _remaining_feasible(len(remaining), min_size, max_size, budget):
                continue
            for tail in _partitions(remaining, min_size, max_size, budget):
                yield [block] + tail


def sessionize_exact(
    dataset: Dataset,
    affinity: AffinityMatrix,
    popularity: dict[str, int],
    config: SessionConfig | None = None,
) -> Sessionization:
    """Exhaustive argmax over all feasible partitions (test oracle, <= 12 papers)."""
    config = config or SessionConfig()
    paper_ids = tuple(sorted(dataset.papers))
    if len(paper_ids) > MAX_EXACT_PAPERS:
        raise InstanceTooLargeError(
            f"{len(paper_ids)} papers exceeds the exhaustive cap of {MAX_EXACT_PAPERS}"
        )
    if not paper_ids:
        raise ValueError("dataset has zero papers")
    warnings: list[str] = []
    if len(paper_ids) < config.min_size:
        warnings.append(
            f"only {len(paper_ids)} papers: single undersized session below min_size={config.min_size}"
        )
        return _build_sessionization([list(paper_ids)], affinity, popularity, config, warnings)
    small_budget = 0 if exact_mix_exists(len(paper_ids), config.min_size, config.max_size) else 1
    if small_budget:
        warnings.append("corpus size forces one session below min_size")
    best = None
    for partition in _partitions(paper_ids, config.min_size, config.max_size, small_budget):
        objective = objective_of(partition, affinity, popularity, config.balance_weight)
        rep = _canonical(partition)
        if best is None or objective > best[0] + 1e-12 or (abs(objective - best[0]) <= 1e-12 and rep < best[1]):
            best = (objective, rep)
    return _build_sessionization([list(b) for b in best[1]], affinity, popularity, config, warnings)


def sessionization_records(s: Sessionization) -> list[dict]:
    records = [
        {"session_id": sess.id, "papers": sorted(sess.paper_ids), "coherence": sess.coherence}
        for sess in s.sessions
    ]
    records.append(
        {
            "meta": {
                "objective": s.objective,
                "min_size": s.min_size,
                "max_size": s.max_size,
                "balance_weight": s.balance_weight,
                "warnings": s.warnings,
            }
        }
    )
    return records


def sessionization_from_records(records, affinity: AffinityMatrix | None = None) -> Sessionization:
    sessions = []
    meta = {}
    for rec in records:
        if "meta" in rec:
            meta = rec["meta"]
            continue
        papers = frozenset(rec["papers"])
        coh = rec.get("coherence")
        if coh is None:
            coh = coherence(papers, affinity) if affinity is not None else 0.0
        sessions.append(Session(rec["session_id"], papers, coh))
    return Sessionization(
        sessions,
        meta.get("objective", sum(s.coherence for s in sessions)),
        meta.get("min_size", 4),
        meta.get("max_size", 5),
        meta.get("balance_weight", 0.0),
        list(meta.get("warnings", [])),
    )
