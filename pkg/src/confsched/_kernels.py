"""Hot local-search kernels, numba-jitted with a pure-Python/NumPy fallback.

Set ``CONFSCHED_NUMBA=0`` to force the fallback path (the ``*_py`` functions
are the uncompiled originals either way, so both paths stay importable for
equivalence tests and benchmarks). Both paths run the identical algorithm and
produce bit-identical results.
"""
from __future__ import annotations

import os

import numpy as np

_EPS = 1e-9


def numba_requested() -> bool:
    flag = os.environ.get("CONFSCHED_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


NUMBA_ENABLED = False
if numba_requested():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def _jit(func):
    if NUMBA_ENABLED:
        return njit(cache=True)(func)
    return func


def _pop_variance(spop, k):
    mean = 0.0
    for s in range(k):
        mean += spop[s]
    mean /= k
    var = 0.0
    for s in range(k):
        d = spop[s] - mean
        var += d * d
    return var / k


_pop_variance = _jit(_pop_variance)


def partition_objective_py(aff, labels, pop, n_sessions, beta):
    """Total internal-pair affinity minus beta times variance of session popularity."""
    n = labels.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if labels[i] == labels[j]:
                total += aff[i, j]
    if beta > 0.0:
        spop = np.zeros(n_sessions, np.float64)
        for i in range(n):
            spop[labels[i]] += pop[i]
        total -= beta * _pop_variance(spop, n_sessions)
    return total


partition_objective = _jit(partition_objective_py)


def improve_partition_py(aff, pop, labels, n_sessions, min_size, max_size, small_budget, beta, order, max_passes):
    """First-improvement relocations and swaps over a partition, in place.

    ``order`` fixes the scan order (restart diversification); ``small_budget``
    is how many sessions may sit below ``min_size`` (0, or 1 when the corpus
    size forces an undersized session). Returns the recomputed objective.
    """
    n = labels.shape[0]
    k = n_sessions
    sizes = np.zeros(k, np.int64)
    spop = np.zeros(k, np.float64)
    for i in range(n):
        sizes[labels[i]] += 1
        spop[labels[i]] += pop[i]
    n_small = 0
    for s in range(k):
        if sizes[s] < min_size:
            n_small += 1
    # contrib[s, i] = total affinity between paper i and the members of session s
    contrib = np.zeros((k, n), np.float64)
    for i in range(n):
        s = labels[i]
        for m in range(n):
            contrib[s, m] += aff[i, m]

    improved = True
    passes = 0
    while improved and passes < max_passes:
        improved = False
        passes += 1
        # single-paper relocations
        for oi in range(n):
            i = order[oi]
            a = labels[i]
            for b in range(k):
                if b == a:
                    continue
                if sizes[b] >= max_size:
                    continue
                if sizes[a] <= 1:
                    continue
                small_after = n_small
                if sizes[a] < min_size:
                    small_after -= 1
                if sizes[b] < min_size:
                    small_after -= 1
                if sizes[a] - 1 < min_size:
                    small_after += 1
                if sizes[b] + 1 < min_size:
                    small_after += 1
                if small_after > small_budget:
                    continue
                delta = contrib[b, i] - contrib[a, i]
                if beta > 0.0:
                    var_old = _pop_variance(spop, k)
                    spop[a] -= pop[i]
                    spop[b] += pop[i]
                    var_new = _pop_variance(spop, k)
                    spop[a] += pop[i]
                    spop[b] -= pop[i]
                    delta -= beta * (var_new - var_old)
                if delta > _EPS:
                    labels[i] = b
                    sizes[a] -= 1
                    sizes[b] += 1
                    spop[a] -= pop[i]
                    spop[b] += pop[i]
                    n_small = small_after
                    for m in range(n):
                        contrib[a, m] -= aff[i, m]
                        contrib[b, m] += aff[i, m]
                    improved = True
                    a = labels[i]
        # pairwise swaps between sessions
        for oi in range(n):
            i = order[oi]
            for oj in range(oi + 1, n):
                j = order[oj]
                a = labels[i]
                b = labels[j]
                if a == b:
                    continue
                delta = (
                    contrib[b, i] - contrib[a, i] + contrib[a, j] - contrib[b, j] - 2.0 * aff[i, j]
                )
                if beta > 0.0:
                    var_old = _pop_variance(spop, k)
                    diff = pop[j] - pop[i]
                    spop[a] += diff
                    spop[b] -= diff
                    var_new = _pop_variance(spop, k)
                    spop[a] -= diff
                    spop[b] += diff
                    delta -= beta * (var_new - var_old)
                if delta > _EPS:
                    labels[i] = b
                    labels[j] = a
                    diff = pop[j] - pop[i]
                    spop[a] += diff
                    spop[b] -= diff
                    for m in range(n):
                        contrib[a, m] += aff[j, m] - aff[i, m]
                        contrib[b, m] += aff[i, m] - aff[j, m]
                    improved = True
    return partition_objective(aff, labels, pop, k, beta)


improve_partition = _jit(improve_partition_py)


def slot_cost_py(weight, slot_of):
    """Total pairwise weight between sessions sharing a slot."""
    k = slot_of.shape[0]
    total = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            if slot_of[a] == slot_of[b]:
                total += weight[a, b]
    return total


slot_cost = _jit(slot_cost_py)


def improve_slots_py(weight, clash, slot_of, n_slots, n_rooms, hard, order, slot_order, max_passes):
    """First-improvement slot relocations and swaps for sessions, in place.

    ``weight`` is the symmetric cross-session conflict matrix (penalty terms
    already folded in when running relaxed); ``clash`` marks session pairs
    sharing an author. With ``hard`` set, moves that would co-schedule
    clashing sessions are skipped. Returns the recomputed cost.
    """
    k = slot_of.shape[0]
    occupancy = np.zeros(n_slots, np.int64)
    slot_weight = np.zeros((n_slots, k), np.float64)
    slot_clash = np.zeros((n_slots, k), np.int64)
    for s in range(k):
        occupancy[slot_of[s]] += 1
        for m in range(k):
            slot_weight[slot_of[s], m] += weight[s, m]
            slot_clash[slot_of[s], m] += clash[s, m]

    improved = True
    passes = 0
    while improved and passes < max_passes:
        improved = False
        passes += 1
        # relocate one session to a slot with a free room
        for oi in range(k):
            s = order[oi]
            a = slot_of[s]
            for ot in range(n_slots):
                b = slot_order[ot]
                if b == a or occupancy[b] >= n_rooms:
                    continue
                if hard and slot_clash[b, s] > 0:
                    continue
                delta = slot_weight[b, s] - slot_weight[a, s]
                if delta < -_EPS:
                    slot_of[s] = b
                    occupancy[a] -= 1
                    occupancy[b] += 1
                    for m in range(k):
                        slot_weight[a, m] -= weight[s, m]
                        slot_weight[b, m] += weight[s, m]
                        slot_clash[a, m] -= clash[s, m]
                        slot_clash[b, m] += clash[s, m]
                    improved = True
                    a = b
        # swap the slots of two sessions
        for oi in range(k):
            s1 = order[oi]
            for oj in range(oi + 1, k):
                s2 = order[oj]
                a = slot_of[s1]
                b = slot_of[s2]
                if a == b:
                    continue
                if hard:
                    if slot_clash[b, s1] - clash[s1, s2] > 0:
                        continue
                    if slot_clash[a, s2] - clash[s1, s2] > 0:
                        continue
                delta = (
                    slot_weight[b, s1]
                    + slot_weight[a, s2]
                    - slot_weight[a, s1]
                    - slot_weight[b, s2]
                    - 2.0 * weight[s1, s2]
                )
                if delta < -_EPS:
                    slot_of[s1] = b
                    slot_of[s2] = a
                    for m in range(k):
                        slot_weight[a, m] += weight[s2, m] - weight[s1, m]
                        slot_weight[b, m] += weight[s1, m] - weight[s2, m]
                        slot_clash[a, m] += clash[s2, m] - clash[s1, m]
                        slot_clash[b, m] += clash[s1, m] - clash[s2, m]
                    improved = True
    return slot_cost(weight, slot_of)


improve_slots = _jit(improve_slots_py)


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs (no-op on the fallback path)."""
    aff = np.zeros((2, 2), np.float64)
    pop = np.zeros(2, np.float64)
    labels = np.array([0, 1], np.int64)
    order = np.array([0, 1], np.int64)
    partition_objective(aff, labels, pop, 2, 0.0)
    improve_partition(aff, pop, labels, 2, 1, 1, 0, 0.0, order, 1)
    weight = np.zeros((2, 2), np.float64)
    clash = np.zeros((2, 2), np.int64)
    slot_of = np.array([0, 1], np.int64)
    slot_cost(weight, slot_of)
    improve_slots(weight, clash, slot_of, 2, 1, False, order, order.copy(), 1)
