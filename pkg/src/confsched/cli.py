"""Command-line entry point for the full pipeline.

Exit codes: 0 success, 1 domain/input error, 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import affinity as aff
from . import recommend as rec
from . import scheduler as sched
from . import sessionizer as sess
from . import textsim
from .corpus import (
    Dataset,
    DatasetError,
    load_dataset,
    validate_dataset,
    write_records,
)
from .gateway import DraftConfig, DraftState


def _parse_thresholds(text: str) -> aff.AffinityThresholds:
    try:
        strong_author, strong_attendee = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected strong_author:strong_attendee, e.g. 5:10")
    return aff.AffinityThresholds(strong_author, strong_attendee)


def _parse_weights(text: str) -> aff.BlendWeights:
    try:
        w_att, w_int, w_rel = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected w_att:w_int:w_rel, e.g. 1:1:2")
    return aff.BlendWeights(w_att, w_int, w_rel)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, out=True):
        p.add_argument("--data-dir", required=True, help="directory holding the input files")
        if out:
            p.add_argument("--out", default=None, help="output path (file, or directory for export)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=8)
        p.add_argument("--thresholds", type=_parse_thresholds, default=aff.AffinityThresholds())
        p.add_argument("--weights", type=_parse_weights, default=aff.BlendWeights())
        p.add_argument("--beta", type=float, default=0.0, help="popularity-balance weight")
        p.add_argument("--min-size", type=int, default=4)
        p.add_argument("--max-size", type=int, default=5)

    add_common(sub.add_parser("ingest", help="load and validate the dataset"))
    add_common(sub.add_parser("stats", help="participation and coverage statistics"))
    add_common(sub.add_parser("affinity", help="export per-source and blended affinity matrices"))
    add_common(sub.add_parser("compare", help="author-vs-attendee affinity comparison report"))
    p_rec = sub.add_parser("recommend", help="paper recommendations for one person")
    add_common(p_rec)
    p_rec.add_argument("--person", required=True)
    p_rec.add_argument("--k", type=int, default=10)
    p_sess = sub.add_parser("sessionize", help="partition papers into coherent sessions")
    add_common(p_sess)
    p_sched = sub.add_parser("schedule", help="sessionize and assign sessions to slots and rooms")
    add_common(p_sched)
    p_serve = sub.add_parser("serve", help="serve the organizer wire API")
    add_common(p_serve, out=False)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--snapshot", default=None, help="draft snapshot file to persist/resume")
    add_common(sub.add_parser("export", help="write all pipeline artifacts to a directory"))
    return parser


def _load(args) -> Dataset:
    data_dir = Path(args.data_dir)
    papers = data_dir / "papers.jsonl"
    if not papers.exists() and (data_dir / "papers.csv").exists():
        papers = data_dir / "papers.csv"
    groups = data_dir / "groups.jsonl"
    return load_dataset(
        papers,
        data_dir / "responses.jsonl",
        data_dir / "bookmarks.jsonl",
        data_dir / "venue.jsonl",
        groups if groups.exists() else None,
    )


def _prefs(dataset: Dataset):
    return (
        aff.extract_preferences(dataset, aff.ATTENDEE_BOOKMARK),
        aff.extract_preferences(dataset, aff.AUTHOR_INTEREST),
    )


def _matrices(dataset: Dataset, weights: aff.BlendWeights):
    attendee_prefs, author_prefs = _prefs(dataset)
    attendee = aff.build_affinity(attendee_prefs)
    author = aff.build_affinity(author_prefs)
    relevance = aff.relevance_affinity(dataset.author_responses)
    blended = aff.blend_affinity(attendee, author, relevance, weights)
    return attendee_prefs, author_prefs, attendee, author, relevance, blended


def _write_out(args, records, default_name: str):
    if args.out:
        out = Path(args.out)
        if out.is_dir() or str(args.out).endswith(("/", os.sep)):
            out.mkdir(parents=True, exist_ok=True)
            out = out / default_name
        else:
            out.parent.mkdir(parents=True, exist_ok=True)
        write_records(out, records)
        print(f"wrote {out}")


def cmd_ingest(args) -> int:
    dataset = _load(args)
    report = validate_dataset(dataset, min_session_size=args.min_size)
    for error in report.errors:
        print(f"error: {error}")
    for warning in report.warnings:
        print(f"warning: {warning}")
    print(
        f"loaded {len(dataset.papers)} papers, {len(dataset.persons)} persons, "
        f"{len(dataset.author_responses)} author responses, {len(dataset.bookmarks)} bookmark sets"
    )
    records = [{"errors": report.errors, "warnings": report.warnings}]
    _write_out(args, records, "validation.jsonl")
    return 0 if report.ok else 1


def _stats_by_source(dataset: Dataset) -> dict[str, aff.ParticipationStats]:
    attendee_prefs, author_prefs = _prefs(dataset)
    n = len(dataset.papers)
    return {
        "author_sourcing": aff.participation_stats(author_prefs, n),
        "attendee_sourcing": aff.participation_stats(attendee_prefs, n),
    }


def cmd_stats(args) -> int:
    dataset = _load(args)
    stats = _stats_by_source(dataset)
    print(aff.render_participation_table(stats))
    _write_out(args, aff.participation_records(stats), "stats.jsonl")
    return 0


def cmd_affinity(args) -> int:
    dataset = _load(args)
    _, _, attendee, author, relevance, blended = _matrices(dataset, args.weights)
    records = []
    for matrix in (attendee, author, relevance, blended):
        records.extend(aff.affinity_records(matrix))
    print(
        f"attendee pairs: {len(attendee)}, author pairs: {len(author)}, "
        f"relevance pairs: {len(relevance)}, blended pairs: {len(blended)}"
    )
    _write_out(args, records, "affinity.jsonl")
    return 0


def cmd_compare(args) -> int:
    dataset = _load(args)
    _, _, attendee, author, _, _ = _matrices(dataset, args.weights)
    cmp = aff.compare_sources(attendee, author, args.thresholds)
    print(aff.render_comparison(cmp, attendee, author))
    _write_out(args, aff.comparison_records(cmp, attendee, author), "comparison.jsonl")
    return 0


def cmd_recommend(args) -> int:
    dataset = _load(args)
    ratings = rec.build_ratings(dataset)
    model = textsim.build_tfidf(dataset.papers)
    recs = rec.recommend(ratings, model, args.person, args.k)
    for r in recs:
        print(f"{r.paper_id}\t{r.score:.4f}\t{r.basis}")
    _write_out(args, rec.recommendation_records(recs), "recommendations.jsonl")
    return 0


def _sessionize(dataset, args):
    attendee_prefs, author_prefs, _, _, _, blended = _matrices(dataset, args.weights)
    popularity = {}
    fans: dict[str, set[str]] = {}
    for prefs in (attendee_prefs, author_prefs):
        for person, pset in prefs.sets.items():
            for pid in pset:
                fans.setdefault(pid, set()).add(person)
    popularity = {pid: len(s) for pid, s in fans.items()}
    config = sess.SessionConfig(
        min_size=args.min_size,
        max_size=args.max_size,
        balance_weight=args.beta,
        restarts=args.restarts,
        seed=args.seed,
    )
    return sess.sessionize(dataset, blended, popularity, config), blended, (attendee_prefs, author_prefs)


def cmd_sessionize(args) -> int:
    dataset = _load(args)
    result, _, _ = _sessionize(dataset, args)
    for s in result.sessions:
        print(f"{s.id}: {', '.join(sorted(s.paper_ids))} (coherence {s.coherence:g})")
    print(f"objective: {result.objective:g}")
    for warning in result.warnings:
        print(f"warning: {warning}")
    _write_out(args, sess.sessionization_records(result), "sessions.jsonl")
    return 0


def cmd_schedule(args) -> int:
    dataset = _load(args)
    result, blended, prefs = _sessionize(dataset, args)
    popularity = sched.session_popularity(result, list(prefs))
    schedule = sched.optimize_schedule(
        result,
        dataset.venue,
        blended,
        sched.ScheduleConfig(restarts=args.restarts, seed=args.seed),
        dataset=dataset,
        popularity=popularity,
    )
    print(sched.render_grid(schedule, dataset.venue))
    m = schedule.metrics
    print(
        f"conflicts: {m.conflict_count:g}, author clashes: {len(m.author_clashes)}, "
        f"room overflow: {m.room_overflow:g}"
    )
    for warning in schedule.warnings:
        print(f"warning: {warning}")
    if args.out:
        base = Path(args.out)  # the schedule subcommand treats --out as a directory
        base.mkdir(parents=True, exist_ok=True)
        write_records(base / "sessions.jsonl", sess.sessionization_records(result))
        write_records(base / "schedule.jsonl", sched.schedule_records(schedule))
        (base / "grid.txt").write_text(sched.render_grid(schedule, dataset.venue) + "\n", encoding="utf-8")
        print(f"wrote {base / 'sessions.jsonl'}, {base / 'schedule.jsonl'}, {base / 'grid.txt'}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    dataset = _load(args)
    config = DraftConfig(
        seed=args.seed,
        restarts=args.restarts,
        beta=args.beta,
        min_size=args.min_size,
        max_size=args.max_size,
        weights=args.weights,
        thresholds=args.thresholds,
    )
    state = DraftState.resume(dataset, config, args.snapshot)
    app = create_app(state)
    uvicorn.run(app, host="127.0.0.1", port=args.port)
    return 0


def cmd_export(args) -> int:
    dataset = _load(args)
    out = Path(args.out or "export")
    out.mkdir(parents=True, exist_ok=True)
    stats = _stats_by_source(dataset)
    write_records(out / "stats.jsonl", aff.participation_records(stats))
    (out / "stats.txt").write_text(aff.render_participation_table(stats) + "\n", encoding="utf-8")
    _, _, attendee, author, relevance, blended = _matrices(dataset, args.weights)
    records = []
    for matrix in (attendee, author, relevance, blended):
        records.extend(aff.affinity_records(matrix))
    write_records(out / "affinity.jsonl", records)
    cmp = aff.compare_sources(attendee, author, args.thresholds)
    write_records(out / "comparison.jsonl", aff.comparison_records(cmp, attendee, author))
    (out / "comparison.txt").write_text(aff.render_comparison(cmp, attendee, author) + "\n", encoding="utf-8")
    result, _, prefs = _sessionize(dataset, args)
    write_records(out / "sessions.jsonl", sess.sessionization_records(result))
    popularity = sched.session_popularity(result, list(prefs))
    schedule = sched.optimize_schedule(
        result,
        dataset.venue,
        blended,
        sched.ScheduleConfig(restarts=args.restarts, seed=args.seed),
        dataset=dataset,
        popularity=popularity,
    )
    write_records(out / "schedule.jsonl", sched.schedule_records(schedule))
    (out / "grid.txt").write_text(sched.render_grid(schedule, dataset.venue) + "\n", encoding="utf-8")
    print(f"exported artifacts to {out}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "affinity": cmd_affinity,
    "compare": cmd_compare,
    "recommend": cmd_recommend,
    "sessionize": cmd_sessionize,
    "schedule": cmd_schedule,
    "serve": cmd_serve,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: input not found: {exc.filename}", file=sys.stderr)
        return 1
    except (DatasetError, sched.SchedulingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
