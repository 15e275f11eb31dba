#!/usr/bin/env python3
"""Benchmark the jitted local-search kernels against the pure-Python fallback.

Builds one synthetic conference-scale instance, then runs the sessionizer and
the slot optimizer once per mode in a subprocess (CONFSCHED_NUMBA=1 vs 0) so
each mode pays its own import/compile cost honestly.

    python3 benchmarks/bench_kernels.py --papers 120 --attendees 150
"""
from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))


def synthetic_instance(n_papers: int, n_attendees: int, seed: int):
    from confsched.affinity import ATTENDEE_BOOKMARK, build_affinity, extract_preferences, popularity
    from confsched.corpus import BookmarkSet, Dataset, Paper, Person, Room, Slot, Venue

    rng = random.Random(seed)
    papers = {
        f"p{i:03d}": Paper(f"p{i:03d}", f"paper {i}", "", (), (f"a{i:03d}",))
        for i in range(n_papers)
    }
    paper_ids = list(papers)
    bookmarks = []
    for u in range(n_attendees):
        size = min(n_papers, max(2, int(rng.gauss(15, 8))))
        bookmarks.append(BookmarkSet(f"u{u:03d}", frozenset(rng.sample(paper_ids, size))))
    persons = {f"a{i:03d}": Person(f"a{i:03d}", None, True) for i in range(n_papers)}
    persons.update({b.attendee_id: Person(b.attendee_id, None, False) for b in bookmarks})
    n_sessions = -(-n_papers // 5)
    n_slots = max(2, -(-n_sessions // 4))
    venue = Venue(
        tuple(Slot(f"t{i:02d}", i // 4, 540 + 100 * (i % 4), 80) for i in range(n_slots)),
        tuple(Room(f"r{i}", 60 - 10 * i) for i in range(4)),
    )
    dataset = Dataset(papers, persons, venue, [], bookmarks, {})
    prefs = extract_preferences(dataset, ATTENDEE_BOOKMARK)
    return dataset, build_affinity(prefs), popularity(prefs)


def run_worker(args) -> None:
    from confsched import _kernels
    from confsched.scheduler import ScheduleConfig, optimize_schedule
    from confsched.sessionizer import SessionConfig, sessionize

    dataset, affinity, pop = synthetic_instance(args.papers, args.attendees, args.seed)
    _kernels.warmup()  # compile (or no-op) before timing

    t0 = time.perf_counter()
    result = sessionize(
        dataset, affinity, pop, SessionConfig(restarts=args.restarts, seed=args.seed)
    )
    t_sessionize = time.perf_counter() - t0

    t0 = time.perf_counter()
    schedule = optimize_schedule(
        result,
        dataset.venue,
        affinity,
        ScheduleConfig(restarts=args.restarts, seed=args.seed),
        dataset=dataset,
    )
    t_schedule = time.perf_counter() - t0

    print(
        json.dumps(
            {
                "numba": _kernels.NUMBA_ENABLED,
                "sessionize_s": t_sessionize,
                "objective": result.objective,
                "schedule_s": t_schedule,
                "conflicts": schedule.metrics.conflict_count,
            }
        )
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--papers", type=int, default=120)
    parser.add_argument("--attendees", type=int, default=150)
    parser.add_argument("--restarts", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        run_worker(args)
        return 0

    results = {}
    for mode, flag in (("numba", "1"), ("fallback", "0")):
        env = dict(os.environ, CONFSCHED_NUMBA=flag)
        cmd = [
            sys.executable, __file__, "--worker",
            "--papers", str(args.papers), "--attendees", str(args.attendees),
            "--restarts", str(args.restarts), "--seed", str(args.seed),
        ]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[mode] = json.loads(out.stdout.strip().splitlines()[-1])

    a, b = results["numba"], results["fallback"]
    assert a["objective"] == b["objective"], "paths diverged on sessionize objective"
    assert a["conflicts"] == b["conflicts"], "paths diverged on schedule conflicts"
    print(f"instance: {args.papers} papers, {args.attendees} attendees, restarts={args.restarts}")
    print(f"{'phase':<12} {'numba':>10} {'fallback':>10} {'speedup':>9}")
    for phase in ("sessionize", "schedule"):
        ta, tb = a[f"{phase}_s"], b[f"{phase}_s"]
        print(f"{phase:<12} {ta:>9.3f}s {tb:>9.3f}s {tb / ta:>8.1f}x")
    print(f"identical results: objective={a['objective']:g}, conflicts={a['conflicts']:g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
