"""Assign sessions to (timeslot, room) cells with low attendee conflict.

Conflicts are counted in person-pair units: each person contributes one unit
per pair of wanted papers that lands in the same slot but different sessions.
That makes the person-level count exactly equal to the cross-session affinity
sum per slot, which is what the local-search kernel minimizes. Room choice is
decoupled: within a slot, popular sessions go to big rooms, which is
overflow-optimal.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations, permutations, product

import numpy as np

from . import _kernels
from .affinity import AffinityMatrix, PreferenceSets, build_affinity
from .corpus import Dataset, UnknownIdError, Venue
from .sessionizer import InstanceTooLargeError, Session, Sessionization, coherence

MAX_EXACT_SESSIONS = 8
MAX_EXACT_SLOTS = 4
CLASH_PENALTY = 1000.0


class SchedulingError(Exception):
    """Raised for infeasible venues or inconsistent schedule inputs."""


@dataclass(frozen=True)
class ScheduleConfig:
    restarts: int = 8
    seed: int = 0
    max_iterations: int = 200
    hard_author_constraint: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class ScheduleMetrics:
    conflict_count: float | None = None
    author_clashes: list[tuple[str, str]] = field(default_factory=list)
    room_overflow: float = 0.0


@dataclass
class Schedule:
    assignment: dict[str, tuple[str, str]]  # session id -> (slot id, room id)
    metrics: ScheduleMetrics = field(default_factory=ScheduleMetrics)
    warnings: list[str] = field(default_factory=list)

    def slot_of(self) -> dict[str, str]:
        return {sid: cell[0] for sid, cell in self.assignment.items()}


@dataclass
class MoveDelta:
    d_conflicts: float = 0.0
    d_coherence: float = 0.0
    new_violations: list[tuple[str, str]] = field(default_factory=list)
    feasible: bool = True


def _as_affinity(prefs_or_affinity) -> AffinityMatrix:
    if isinstance(prefs_or_affinity, PreferenceSets):
        return build_affinity(prefs_or_affinity)
    if isinstance(prefs_or_affinity, AffinityMatrix):
        return prefs_or_affinity
    raise TypeError("expected PreferenceSets or AffinityMatrix")


def check_schedule(schedule: Schedule, sessionization: Sessionization, venue: Venue) -> None:
    """Structural validity: every session on a distinct in-venue cell."""
    slot_ids = {s.id for s in venue.slots}
    room_ids = {r.id for r in venue.rooms}
    cells = set()
    for session in sessionization.sessions:
        if session.id not in schedule.assignment:
            raise SchedulingError(f"session '{session.id}' is not assigned")
        slot, room = schedule.assignment[session.id]
        if slot not in slot_ids or room not in room_ids:
            raise SchedulingError(f"session '{session.id}' assigned to unknown cell ({slot}, {room})")
        if (slot, room) in cells:
            raise SchedulingError(f"cell ({slot}, {room}) is double-booked")
        cells.add((slot, room))


def conflict_count(schedule: Schedule, sessionization: Sessionization, prefs: PreferenceSets) -> int:
    """Person-pair conflicts: wanted pairs in the same slot but different sessions."""
    session_of = sessionization.session_of()
    slot_of_session = schedule.slot_of()
    total = 0
    for pset in prefs.sets.values():
        placed = []
        for pid in sorted(pset):
            sid = session_of.get(pid)
            if sid is None or sid not in slot_of_session:
                raise SchedulingError(f"paper not scheduled: '{pid}'")
            placed.append((pid, sid, slot_of_session[sid]))
        for (p, sp, tp), (q, sq, tq) in combinations(placed, 2):
            if tp == tq and sp != sq:
                total += 1
    return total


def session_cross_matrix(sessionization: Sessionization, affinity: AffinityMatrix) -> tuple[list[str], np.ndarray]:
    """Symmetric cross-session affinity sums over session ids in sorted order."""
    ids = sorted(s.id for s in sessionization.sessions)
    index = {sid: i for i, sid in enumerate(ids)}
    session_of = sessionization.session_of()
    cross = np.zeros((len(ids), len(ids)), np.float64)
    for (p, q), count in affinity.counts.items():
        sp = session_of.get(p)
        sq = session_of.get(q)
        if sp is None or sq is None or sp == sq:
            continue
        i, j = index[sp], index[sq]
        cross[i, j] += count
        cross[j, i] += count
    return ids, cross


def conflict_count_from_affinity(
    schedule: Schedule, sessionization: Sessionization, affinity: AffinityMatrix
) -> float:
    """Sum, per slot, of cross-session pair affinities; equals conflict_count."""
    ids, cross = session_cross_matrix(sessionization, affinity)
    slot_of_session = schedule.slot_of()
    slot_index = {slot: i for i, slot in enumerate(sorted({s for s in slot_of_session.values()}))}
    slot_of = np.array([slot_index[slot_of_session[sid]] for sid in ids], np.int64)
    return float(_kernels.slot_cost(cross, slot_of))


def slot_conflict_heat(
    schedule: Schedule, sessionization: Sessionization, affinity: AffinityMatrix
) -> dict[str, float]:
    """Per-slot cross-session affinity; sums to the total conflict count."""
    ids, cross = session_cross_matrix(sessionization, affinity)
    slot_of_session = schedule.slot_of()
    heat: dict[str, float] = {}
    by_slot: dict[str, list[int]] = {}
    for i, sid in enumerate(ids):
        by_slot.setdefault(slot_of_session[sid], []).append(i)
    for slot, members in by_slot.items():
        heat[slot] = float(sum(cross[i, j] for i, j in combinations(members, 2)))
    return heat


def author_clashes(
    schedule: Schedule, sessionization: Sessionization, dataset: Dataset
) -> list[tuple[str, str]]:
    """All (author, slot) pairs where the author's papers sit in >= 2 parallel sessions."""
    session_of = sessionization.session_of()
    slot_of_session = schedule.slot_of()
    seen: dict[tuple[str, str], set[str]] = {}
    for pid, paper in dataset.papers.items():
        sid = session_of.get(pid)
        if sid is None or sid not in slot_of_session:
            continue
        slot = slot_of_session[sid]
        for author in paper.author_ids:
            seen.setdefault((author, slot), set()).add(sid)
    return sorted(key for key, sessions in seen.items() if len(sessions) >= 2)


def session_popularity(sessionization: Sessionization, prefs_list: list[PreferenceSets]) -> dict[str, int]:
    """Seat demand: distinct persons whose preference set intersects each session."""
    demand: dict[str, set[str]] = {s.id: set() for s in sessionization.sessions}
    for prefs in prefs_list:
        for person, pset in prefs.sets.items():
            for session in sessionization.sessions:
                if pset & session.paper_ids:
                    demand[session.id].add(person)
    return {sid: len(persons) for sid, persons in demand.items()}


def assign_rooms(
    slot_assignment: dict[str, str],
    popularity: dict[str, float] | dict[str, int],
    venue: Venue,
) -> Schedule:
    """Within each slot, match sessions to rooms by descending popularity/capacity.

    This per-slot sort minimizes total overflow (sum of demand above capacity)
    among all per-slot bijections.
    """
    slot_ids = {s.id for s in venue.slots}
    by_slot: dict[str, list[str]] = {}
    for sid, slot in slot_assignment.items():
        if slot not in slot_ids:
            raise SchedulingError(f"unknown slot '{slot}' for session '{sid}'")
        by_slot.setdefault(slot, []).append(sid)
    rooms = sorted(venue.rooms, key=lambda r: (-r.capacity, r.id))
    assignment: dict[str, tuple[str, str]] = {}
    overflow = 0.0
    for slot, sids in by_slot.items():
        if len(sids) > len(rooms):
            raise SchedulingError(
                f"slot '{slot}' holds {len(sids)} sessions but the venue has {len(rooms)} rooms"
            )
        ordered = sorted(sids, key=lambda sid: (-float(popularity.get(sid, 0)), sid))
        for session_id, room in zip(ordered, rooms):
            assignment[session_id] = (slot, room.id)
            overflow += max(0.0, float(popularity.get(session_id, 0)) - room.capacity)
    return Schedule(assignment, ScheduleMetrics(room_overflow=overflow))


def _min_overflow_brute(popularities: list[float], capacities: list[float]) -> float:
    best = None
    for perm in permutations(capacities):
        total = sum(max(0.0, p - c) for p, c in zip(popularities, perm))
        if best is None or total < best:
            best = total
    return 0.0 if best is None else best


def _clash_matrix(ids: list[str], sessionization: Sessionization, dataset: Dataset | None) -> np.ndarray:
    k = len(ids)
    clash = np.zeros((k, k), np.int64)
    if dataset is None:
        return clash
    by_id = sessionization.by_id()
    authors: list[set[str]] = []
    for sid in ids:
        acc: set[str] = set()
        for pid in by_id[sid].paper_ids:
            paper = dataset.papers.get(pid)
            if paper is not None:
                acc.update(paper.author_ids)
        authors.append(acc)
    for i in range(k):
        for j in range(i + 1, k):
            if authors[i] & authors[j]:
                clash[i, j] = 1
                clash[j, i] = 1
    return clash


def _random_feasible_slots(
    k: int, n_slots: int, n_rooms: int, clash: np.ndarray, hard: bool, rng: random.Random, tries: int = 50
) -> np.ndarray | None:
    sessions = list(range(k))
    for _ in range(tries):
        rng.shuffle(sessions)
        slot_of = np.full(k, -1, np.int64)
        occupancy = [0] * n_slots
        ok = True
        for s in sessions:
            options = []
            for t in range(n_slots):
                if occupancy[t] >= n_rooms:
                    continue
                if hard and any(clash[s, m] and slot_of[m] == t for m in range(k)):
                    continue
                options.append(t)
            if not options:
                ok = False
                break
            t = rng.choice(options)
            slot_of[s] = t
            occupancy[t] += 1
        if ok:
            return slot_of
    return None


def optimize_schedule(
    sessionization: Sessionization,
    venue: Venue,
    prefs_or_affinity,
    config: ScheduleConfig | None = None,
    dataset: Dataset | None = None,
    popularity: dict[str, float] | dict[str, int] | None = None,
    initial: dict[str, str] | None = None,
) -> Schedule:
    """Multi-restart first-improvement search over slot assignments.

    Author clashes are a hard constraint by default (skipped moves); when no
    clash-free assignment can be found the constraint degrades to a 1000-per-
    clashing-pair penalty with a warning. Rooms are assigned per slot after
    convergence. ``initial`` seeds the first restart (used by reoptimize).
    """
    config = config or ScheduleConfig()
    affinity = _as_affinity(prefs_or_affinity)
    ids, cross = session_cross_matrix(sessionization, affinity)
    k = len(ids)
    n_slots = len(venue.slots)
    n_rooms = len(venue.rooms)
    if k > n_slots * n_rooms:
        raise SchedulingError(f"{k} sessions exceed the venue's {n_slots * n_rooms} cells")
    slot_ids = [s.id for s in venue.slots]
    slot_index = {sid: i for i, sid in enumerate(slot_ids)}

    clash = _clash_matrix(ids, sessionization, dataset)
    hard = bool(config.hard_author_constraint and clash.any())
    relaxed = False
    warnings: list[str] = []

    master = random.Random(config.seed)
    feasible_seed = None
    if hard:
        feasible_seed = _random_feasible_slots(k, n_slots, n_rooms, clash, True, master, tries=200)
        if feasible_seed is None:
            warnings.append(
                "no clash-free assignment found: author constraint relaxed to a penalty"
            )
            hard = False
            relaxed = True
    # the penalty applies only when the constraint was requested but infeasible
    weight = cross + CLASH_PENALTY * clash if relaxed else cross
    clash_f = clash.astype(np.float64)

    best: tuple[float, tuple, np.ndarray] | None = None
    for restart in range(config.restarts):
        rng = random.Random(master.randrange(2**32))
        if restart == 0 and initial is not None:
            slot_of = np.array([slot_index[initial[sid]] for sid in ids], np.int64)
            occupancy = np.bincount(slot_of, minlength=n_slots)
            if occupancy.max(initial=0) > n_rooms:
                raise SchedulingError("initial assignment over-packs a slot")
        else:
            slot_of = _random_feasible_slots(k, n_slots, n_rooms, clash, hard, rng)
            if slot_of is None:
                slot_of = feasible_seed.copy()
        order = np.array(rng.sample(range(k), k), np.int64)
        slot_order = np.array(rng.sample(range(n_slots), n_slots), np.int64)
        cost = float(
            _kernels.improve_slots(
                weight, clash, slot_of, n_slots, n_rooms, hard, order, slot_order, config.max_iterations
            )
        )
        if hard and _kernels.slot_cost(clash_f, slot_of) > 0:
            continue  # a clashing seed (e.g. reoptimize from a hand-edited draft) stayed clashing
        rep = tuple(int(t) for t in slot_of)
        if best is None or cost < best[0] - 1e-9 or (abs(cost - best[0]) <= 1e-9 and rep < best[1]):
            best = (cost, rep, slot_of.copy())
    if best is None:
        slot_of = feasible_seed.copy()
        order = np.array(master.sample(range(k), k), np.int64)
        slot_order = np.array(master.sample(range(n_slots), n_slots), np.int64)
        cost = float(
            _kernels.improve_slots(
                weight, clash, slot_of, n_slots, n_rooms, True, order, slot_order, config.max_iterations
            )
        )
        best = (cost, tuple(int(t) for t in slot_of), slot_of)

    slot_assignment = {sid: slot_ids[int(t)] for sid, t in zip(ids, best[2])}
    if popularity is None and isinstance(prefs_or_affinity, PreferenceSets):
        popularity = session_popularity(sessionization, [prefs_or_affinity])
    schedule = assign_rooms(slot_assignment, popularity or {}, venue)
    schedule.warnings.extend(warnings)
    schedule.metrics.conflict_count = float(_kernels.slot_cost(cross, best[2]))
    if dataset is not None:
        schedule.metrics.author_clashes = author_clashes(schedule, sessionization, dataset)
    return schedule


def schedule_exact(
    sessionization: Sessionization,
    venue: Venue,
    prefs_or_affinity,
    popularity: dict[str, float] | dict[str, int] | None = None,
) -> Schedule:
    """Exhaustive slot-assignment minimum (test oracle, <= 8 sessions, <= 4 slots)."""
    affinity = _as_affinity(prefs_or_affinity)
    ids, cross = session_cross_matrix(sessionization, affinity)
    k = len(ids)
    n_slots = len(venue.slots)
    n_rooms = len(venue.rooms)
    if k > MAX_EXACT_SESSIONS or n_slots > MAX_EXACT_SLOTS:
        raise InstanceTooLargeError(
            f"{k} sessions x {n_slots} slots exceeds the exhaustive cap "
            f"({MAX_EXACT_SESSIONS} sessions, {MAX_EXACT_SLOTS} slots)"
        )
    if k > n_slots * n_rooms:
        raise SchedulingError(f"{k} sessions exceed the venue's {n_slots * n_rooms} cells")
    best = None
    for combo in product(range(n_slots), repeat=k):
        counts = [0] * n_slots
        ok = True
        for t in combo:
            counts[t] += 1
            if counts[t] > n_rooms:
                ok = False
                break
        if not ok:
            continue
        slot_of = np.array(combo, np.int64)
        cost = float(_kernels.slot_cost(cross, slot_of))
        if best is None or cost < best[0] - 1e-12 or (abs(cost - best[0]) <= 1e-12 and combo < best[1]):
            best = (cost, combo)
    slot_ids = [s.id for s in venue.slots]
    slot_assignment = {sid: slot_ids[t] for sid, t in zip(ids, best[1])}
    if popularity is None and isinstance(prefs_or_affinity, PreferenceSets):
        popularity = session_popularity(sessionization, [prefs_or_affinity])
    schedule = assign_rooms(slot_assignment, popularity or {}, venue)
    schedule.metrics.conflict_count = best[0]
    return schedule


def evaluate_move(
    schedule: Schedule,
    sessionization: Sessionization,
    paper: str,
    target_session: str,
    affinity: AffinityMatrix,
    prefs: PreferenceSets | None = None,
    dataset: Dataset | None = None,
) -> MoveDelta:
    """What-if for moving one paper into another session; never mutates state.

    Deltas are full recomputations of the conflict and coherence metrics on a
    copied sessionization; infeasible when the target is full, unchanged, or
    the move would empty the source session.
    """
    session_of = sessionization.session_of()
    if paper not in session_of:
        raise UnknownIdError(f"unknown paper id {paper!r}")
    by_id = sessionization.by_id()
    if target_session not in by_id:
        raise UnknownIdError(f"unknown session id {target_session!r}")
    source = session_of[paper]
    if target_session == source:
        return MoveDelta(feasible=False)
    if len(by_id[target_session].paper_ids) >= sessionization.max_size:
        return MoveDelta(feasible=False)
    if len(by_id[source].paper_ids) <= 1:
        return MoveDelta(feasible=False)

    moved = apply_paper_move(sessionization, paper, target_session, affinity)

    def conflicts(sz: Sessionization) -> float:
        if prefs is not None:
            return float(conflict_count(schedule, sz, prefs))
        return conflict_count_from_affinity(schedule, sz, affinity)

    d_conflicts = conflicts(moved) - conflicts(sessionization)
    d_coherence = sum(s.coherence for s in moved.sessions) - sum(
        s.coherence for s in sessionization.sessions
    )
    new_violations: list[tuple[str, str]] = []
    if dataset is not None:
        before = set(author_clashes(schedule, sessionization, dataset))
        after = set(author_clashes(schedule, moved, dataset))
        new_violations = sorted(after - before)
    return MoveDelta(d_conflicts, d_coherence, new_violations, True)


def apply_paper_move(
    sessionization: Sessionization, paper: str, target_session: str, affinity: AffinityMatrix
) -> Sessionization:
    """A new Sessionization with ``paper`` moved into ``target_session``."""
    source = sessionization.session_of()[paper]
    sessions = []
    for s in sessionization.sessions:
        papers = set(s.paper_ids)
        if s.id == source:
            papers.discard(paper)
        elif s.id == target_session:
            papers.add(paper)
        sessions.append(Session(s.id, frozenset(papers), coherence(papers, affinity)))
    objective = sum(s.coherence for s in sessions)
    return Sessionization(
        sessions,
        objective,
        sessionization.min_size,
        sessionization.max_size,
        sessionization.balance_weight,
        list(sessionization.warnings),
    )


def schedule_records(schedule: Schedule) -> list[dict]:
    records = [
        {"session_id": sid, "slot_id": slot, "room_id": room}
        for sid, (slot, room) in sorted(schedule.assignment.items())
    ]
    records.append(
        {
            "metrics": {
                "conflict_count": schedule.metrics.conflict_count,
                "author_clashes": [list(v) for v in schedule.metrics.author_clashes],
                "room_overflow": schedule.metrics.room_overflow,
            },
            "warnings": schedule.warnings,
        }
    )
    return records


def schedule_from_records(records) -> Schedule:
    assignment = {}
    metrics = ScheduleMetrics()
    warnings: list[str] = []
    for rec in records:
        if "metrics" in rec:
            m = rec["metrics"]
            metrics = ScheduleMetrics(
                m.get("conflict_count"),
                [tuple(v) for v in m.get("author_clashes", [])],
                m.get("room_overflow", 0.0),
            )
            warnings = list(rec.get("warnings", []))
            continue
        assignment[rec["session_id"]] = (rec["slot_id"], rec["room_id"])
    return Schedule(assignment, metrics, warnings)


def render_grid(schedule: Schedule, venue: Venue) -> str:
    """Plain-text slots-by-rooms grid of session ids."""
    rooms = sorted(venue.rooms, key=lambda r: (-r.capacity, r.id))
    slots = sorted(venue.slots, key=lambda s: (s.day, s.start, s.id))
    cell: dict[tuple[str, str], str] = {}
    for sid, (slot, room) in schedule.assignment.items():
        cell[(slot, room)] = sid
    header = ["slot"] + [f"{r.id}({r.capacity})" for r in rooms]
    rows = [header]
    for slot in slots:
        label = f"d{slot.day} {slot.start // 60:02d}:{slot.start % 60:02d} {slot.id}"
        rows.append([label] + [cell.get((slot.id, r.id), "-") for r in rooms])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(col.ljust(widths[c]) for c, col in enumerate(row)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
