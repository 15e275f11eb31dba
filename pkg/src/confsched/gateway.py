"""Draft state for organizer refinement: serialized mutations, undo, snapshots.

One process hosts one draft. Reads are lock-free against an immutable cached
view; mutations are serialized through a single lock, guarded by an optimistic
revision check, and persisted to a snapshot file with write-then-rename.
"""
from __future__ import annotations

import copy
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import affinity as aff
from . import recommend as rec
from . import scheduler as sched
from . import sessionizer as sess
from . import textsim
from .corpus import Dataset

MUTATION_KINDS = ("move_paper", "swap_sessions", "swap_slots", "reoptimize", "undo")


class GatewayError(Exception):
    pass


class RevisionMismatchError(GatewayError):
    """The client's expected_revision is stale; refetch the view."""


class InfeasibleMutationError(GatewayError):
    """The mutation cannot be applied; state is unchanged."""


@dataclass(frozen=True)
class Mutation:
    kind: str
    payload: dict = field(default_factory=dict)
    expected_revision: int = 0


@dataclass(frozen=True)
class DraftConfig:
    seed: int = 0
    restarts: int = 8
    beta: float = 0.0
    min_size: int = 4
    max_size: int = 5
    weights: aff.BlendWeights = field(default_factory=aff.BlendWeights)
    thresholds: aff.AffinityThresholds = field(default_factory=aff.AffinityThresholds)
    hard_author_constraint: bool = True


class DraftState:
    """The mutable schedule draft plus every immutable analytics input."""

    def __init__(
        self,
        dataset: Dataset,
        config: DraftConfig | None = None,
        persist_path: str | Path | None = None,
        sessionization: sess.Sessionization | None = None,
        schedule: sched.Schedule | None = None,
    ):
        self.dataset = dataset
        self.config = config or DraftConfig()
        self.persist_path = Path(persist_path) if persist_path else None

        self.attendee_prefs = aff.extract_preferences(dataset, aff.ATTENDEE_BOOKMARK)
        self.author_prefs = aff.extract_preferences(dataset, aff.AUTHOR_INTEREST)
        self.attendee_affinity = aff.build_affinity(self.attendee_prefs)
        self.author_affinity = aff.build_affinity(self.author_prefs)
        self.relevance_marks = aff.relevance_affinity(dataset.author_responses)
        self.blended_affinity = aff.blend_affinity(
            self.attendee_affinity, self.author_affinity, self.relevance_marks, self.config.weights
        )
        self.paper_popularity = _merged_popularity(self.attendee_prefs, self.author_prefs)
        self.tfidf = textsim.build_tfidf(dataset.papers)
        self.ratings = rec.build_ratings(dataset)

        if sessionization is None:
            sessionization = sess.sessionize(
                dataset,
                self.blended_affinity,
                self.paper_popularity,
                sess.SessionConfig(
                    min_size=self.config.min_size,
                    max_size=self.config.max_size,
                    balance_weight=self.config.beta,
                    restarts=self.config.restarts,
                    seed=self.config.seed,
                ),
            )
        self.sessionization = sessionization
        if schedule is None:
            schedule = sched.optimize_schedule(
                sessionization,
                dataset.venue,
                self.blended_affinity,
                sched.ScheduleConfig(
                    restarts=self.config.restarts,
                    seed=self.config.seed,
                    hard_author_constraint=self.config.hard_author_constraint,
                ),
                dataset=dataset,
                popularity=self._session_popularity(sessionization),
            )
        self.schedule = schedule

        self.revision = 0
        self._undo: list[tuple[sess.Sessionization, sched.Schedule]] = []
        self._lock = threading.Lock()
        self._view = self._build_view()
        self._persist()

    # -- read side ----------------------------------------------------------

    def snapshot(self) -> dict:
        """The current immutable view; safe to call concurrently with mutations."""
        return self._view

    def whatif(self, paper: str, target_session: str) -> sched.MoveDelta:
        return sched.evaluate_move(
            self.schedule,
            self.sessionization,
            paper,
            target_session,
            self.blended_affinity,
            dataset=self.dataset,
        )

    def recommend_for(self, person: str, k: int) -> list[rec.Recommendation]:
        return rec.recommend(self.ratings, self.tfidf, person, k)

    def compare(self) -> aff.AffinityComparison:
        return aff.compare_sources(self.attendee_affinity, self.author_affinity, self.config.thresholds)

    # -- write side ---------------------------------------------------------

    def apply(self, mutation: Mutation) -> dict:
        """Apply one mutation atomically; returns the new revision and metrics."""
        if mutation.kind not in MUTATION_KINDS:
            raise InfeasibleMutationError(f"unknown mutation kind {mutation.kind!r}")
        with self._lock:
            if mutation.expected_revision != self.revision:
                raise RevisionMismatchError(
                    f"expected revision {mutation.expected_revision}, current is {self.revision}"
                )
            handler = getattr(self, f"_apply_{mutation.kind}")
            new_sessionization, new_schedule = handler(mutation.payload)
            if mutation.kind != "undo":
                self._undo.append((self.sessionization, self.schedule))
            self.sessionization = new_sessionization
            self.schedule = new_schedule
            self.revision += 1
            self._view = self._build_view()
            self._persist()
            return {"revision": self.revision, "metrics": self._view["metrics"]}

    def _apply_move_paper(self, payload):
        paper = payload.get("paper")
        target = payload.get("target_session")
        delta = sched.evaluate_move(
            self.schedule, self.sessionization, paper, target, self.blended_affinity, dataset=self.dataset
        )
        if not delta.feasible:
            raise InfeasibleMutationError(
                f"cannot move paper {paper!r} into session {target!r} (full, unchanged, or emptying source)"
            )
        moved = sched.apply_paper_move(self.sessionization, paper, target, self.blended_affinity)
        return moved, self._refresh_metrics(moved, copy.deepcopy(self.schedule))

    def _apply_swap_sessions(self, payload):
        a, b = payload.get("session_a"), payload.get("session_b")
        assignment = dict(self.schedule.assignment)
        if a not in assignment or b not in assignment:
            raise InfeasibleMutationError(f"unknown session in swap: {a!r}, {b!r}")
        if a == b:
            raise InfeasibleMutationError("cannot swap a session with itself")
        assignment[a], assignment[b] = assignment[b], assignment[a]
        schedule = sched.Schedule(assignment, warnings=list(self.schedule.warnings))
        return self.sessionization, self._refresh_metrics(self.sessionization, schedule)

    def _apply_swap_slots(self, payload):
        sa, sb = payload.get("slot_a"), payload.get("slot_b")
        slot_ids = {s.id for s in self.dataset.venue.slots}
        if sa not in slot_ids or sb not in slot_ids:
            raise InfeasibleMutationError(f"unknown slot in swap: {sa!r}, {sb!r}")
        if sa == sb:
            raise InfeasibleMutationError("cannot swap a slot with itself")
        assignment = {}
        for sid, (slot, room) in self.schedule.assignment.items():
            if slot == sa:
                slot = sb
            elif slot == sb:
                slot = sa
            assignment[sid] = (slot, room)
        schedule = sched.Schedule(assignment, warnings=list(self.schedule.warnings))
        return self.sessionization, self._refresh_metrics(self.sessionization, schedule)

    def _apply_reoptimize(self, payload):
        seed = payload.get("seed", self.config.seed)
        restarts = payload.get("restarts", self.config.restarts)
        schedule = sched.optimize_schedule(
            self.sessionization,
            self.dataset.venue,
            self.blended_affinity,
            sched.ScheduleConfig(
                restarts=restarts, seed=seed, hard_author_constraint=self.config.hard_author_constraint
            ),
            dataset=self.dataset,
            popularity=self._session_popularity(self.sessionization),
            initial=self.schedule.slot_of(),
        )
        return self.sessionization, schedule

    def _apply_undo(self, payload):
        if not self._undo:
            raise InfeasibleMutationError("nothing to undo")
        return self._undo.pop()

    # -- internals ----------------------------------------------------------

    def _session_popularity(self, sessionization) -> dict[str, int]:
        return sched.session_popularity(sessionization, [self.attendee_prefs, self.author_prefs])

    def _refresh_metrics(self, sessionization, schedule: sched.Schedule) -> sched.Schedule:
        sched.check_schedule(schedule, sessionization, self.dataset.venue)
        popularity = self._session_popularity(sessionization)
        overflow = 0.0
        capacities = {r.id: r.capacity for r in self.dataset.venue.rooms}
        for sid, (_, room) in schedule.assignment.items():
            overflow += max(0.0, float(popularity.get(sid, 0)) - capacities[room])
        schedule.metrics = sched.ScheduleMetrics(
            conflict_count=sched.conflict_count_from_affinity(schedule, sessionization, self.blended_affinity),
            author_clashes=sched.author_clashes(schedule, sessionization, self.dataset),
            room_overflow=overflow,
        )
        return schedule

    def _top_conflicting_pairs(self, limit: int = 10) -> list[dict]:
        session_of = self.sessionization.session_of()
        slot_of_session = self.schedule.slot_of()
        rows = []
        for (p, q), count in self.blended_affinity.counts.items():
            sp, sq = session_of.get(p), session_of.get(q)
            if sp is None or sq is None or sp == sq:
                continue
            if slot_of_session[sp] == slot_of_session[sq]:
                rows.append({"p": p, "q": q, "affinity": count, "slot": slot_of_session[sp]})
        rows.sort(key=lambda r: (-r["affinity"], r["p"], r["q"]))
        return rows[:limit]

    def _build_view(self) -> dict:
        popularity = self._session_popularity(self.sessionization)
        heat = sched.slot_conflict_heat(self.schedule, self.sessionization, self.blended_affinity)
        metrics = self.schedule.metrics
        coherence_total = sum(s.coherence for s in self.sessionization.sessions)
        rooms = sorted(self.dataset.venue.rooms, key=lambda r: (-r.capacity, r.id))
        slots = sorted(self.dataset.venue.slots, key=lambda s: (s.day, s.start, s.id))
        capacities = {r.id: r.capacity for r in rooms}
        cell_of: dict[tuple[str, str], str] = {}
        for sid, (slot, room) in self.schedule.assignment.items():
            cell_of[(slot, room)] = sid
        sessions_payload = {
            s.id: {
                "session_id": s.id,
                "papers": sorted(s.paper_ids),
                "coherence": s.coherence,
                "popularity": popularity.get(s.id, 0),
            }
            for s in self.sessionization.sessions
        }
        grid = []
        for slot in slots:
            row = {
                "slot_id": slot.id,
                "day": slot.day,
                "start": slot.start,
                "duration": slot.duration,
                "conflict_heat": heat.get(slot.id, 0.0),
                "cells": [],
            }
            for room in rooms:
                sid = cell_of.get((slot.id, room.id))
                session = sessions_payload.get(sid) if sid else None
                overflow = 0.0
                if session is not None:
                    overflow = max(0.0, float(session["popularity"]) - capacities[room.id])
                row["cells"].append(
                    {
                        "slot_id": slot.id,
                        "room_id": room.id,
                        "capacity": capacities[room.id],
                        "session": session,
                        "overflow": overflow,
                    }
                )
            grid.append(row)
        return {
            "revision": self.revision,
            "sessions": sorted(sessions_payload.values(), key=lambda s: s["session_id"]),
            "grid": grid,
            "metrics": {
                "conflict_count": metrics.conflict_count,
                "author_clashes": [list(v) for v in metrics.author_clashes],
                "room_overflow": metrics.room_overflow,
                "coherence_total": coherence_total,
            },
            "top_conflicting_pairs": self._top_conflicting_pairs(),
            "warnings": list(self.schedule.warnings) + list(self.sessionization.warnings),
        }

    def _persist(self) -> None:
        if self.persist_path is None:
            return
        payload = {
            "revision": self.revision,
            "sessions": sess.sessionization_records(self.sessionization),
            "schedule": sched.schedule_records(self.schedule),
        }
        tmp = self.persist_path.with_suffix(self.persist_path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=None, sort_keys=True)
        os.replace(tmp, self.persist_path)

    @classmethod
    def resume(
        cls, dataset: Dataset, config: DraftConfig | None = None, persist_path: str | Path | None = None
    ) -> "DraftState":
        """Rebuild a draft from its snapshot file when one exists (undo history is not kept)."""
        if persist_path and Path(persist_path).exists():
            with open(persist_path, encoding="utf-8") as fh:
                payload = json.load(fh)
            sessionization = sess.sessionization_from_records(payload["sessions"])
            schedule = sched.schedule_from_records(payload["schedule"])
            state = cls(dataset, config, persist_path, sessionization, schedule)
            state.schedule = state._refresh_metrics(state.sessionization, state.schedule)
            state._view = state._build_view()
            return state
        return cls(dataset, config, persist_path)


def _merged_popularity(*prefs: aff.PreferenceSets) -> dict[str, int]:
    """Distinct persons (across sources) whose preference set contains each paper."""
    fans: dict[str, set[str]] = {}
    for p in prefs:
        for person, pset in p.sets.items():
            for pid in pset:
                fans.setdefault(pid, set()).add(person)
    return {pid: len(persons) for pid, persons in fans.items()}
