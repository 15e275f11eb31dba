"""Preference extraction, participation statistics, and pairwise affinity.

The affinity score of a pair of papers is the number of people whose
preference set contains both. Raw matrices are kept per source
(author interest vs attendee bookmarks); a weighted blend combines them with
the authors' relevance judgments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import AuthorResponse, Dataset

AUTHOR_INTEREST = "author_interest"
ATTENDEE_BOOKMARK = "attendee_bookmark"
SOURCES = (AUTHOR_INTEREST, ATTENDEE_BOOKMARK)

Pair = tuple[str, str]


def pair_key(p: str, q: str) -> Pair:
    """Canonical unordered-pair key; self-pairs are rejected."""
    if p == q:
        raise ValueError(f"self-pair {p!r}")
    return (p, q) if p < q else (q, p)


@dataclass
class PreferenceSets:
    source: str
    sets: dict[str, frozenset[str]]  # person id -> papers they want to see


@dataclass
class AffinityMatrix:
    """Sparse symmetric pair counts; absent key means zero."""

    source: str
    counts: dict[Pair, float] = field(default_factory=dict)

    def get(self, p: str, q: str) -> float:
        if p == q:
            return 0.0
        return self.counts.get(pair_key(p, q), 0.0)

    def add(self, p: str, q: str, amount: float = 1.0) -> None:
        key = pair_key(p, q)
        self.counts[key] = self.counts.get(key, 0.0) + amount

    def total(self) -> float:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)


@dataclass
class DistributionStats:
    mean: float = 0.0
    median: float = 0.0
    stddev: float = 0.0
    min: float = 0.0
    max: float = 0.0


@dataclass
class ParticipationStats:
    n_participants: int
    n_unique_papers_marked: int
    n_preferences: int
    per_participant: DistributionStats
    per_paper: DistributionStats
    coverage_fraction: float
    empty: bool = False  # set when there were no preferences at all


@dataclass(frozen=True)
class AffinityThresholds:
    """Strong-signal cutoffs, strict (a count equal to the cutoff is not strong)."""

    strong_author: float = 5
    strong_attendee: float = 10
    big_difference: float = 10


@dataclass
class AffinityComparison:
    thresholds: AffinityThresholds
    superset_violations: list[Pair]
    weak_vs_strong: list[Pair]
    zero_vs_strong: list[Pair]
    big_difference: list[Pair]


def extract_preferences(dataset: Dataset, source: str) -> PreferenceSets:
    """Per-person want-to-see sets for one source.

    Authors with several accepted papers respond once per paper; their
    interest sets are merged into a single preference set so one person never
    counts twice toward a pair.
    """
    if source == ATTENDEE_BOOKMARK:
        return PreferenceSets(source, {b.attendee_id: b.paper_ids for b in dataset.bookmarks})
    if source == AUTHOR_INTEREST:
        merged: dict[str, set[str]] = {}
        for r in dataset.author_responses:
            if r.interest:
                merged.setdefault(r.author_id, set()).update(r.interest)
        return PreferenceSets(source, {a: frozenset(s) for a, s in merged.items()})
    raise ValueError(f"unknown preference source {source!r}")


def _distribution(values: list[int]) -> DistributionStats:
    if not values:
        return DistributionStats()
    ordered = sorted(values)
    n = len(ordered)
    mean = sum(ordered) / n
    median = float(ordered[(n - 1) // 2])  # lower middle for even counts
    stddev = math.sqrt(sum((v - mean) ** 2 for v in ordered) / n)  # population form
    return DistributionStats(mean, median, stddev, float(ordered[0]), float(ordered[-1]))


def participation_stats(prefs: PreferenceSets, corpus_size: int) -> ParticipationStats:
    """Participation and coverage metrics for one preference source.

    Per-paper statistics run over the papers that were marked at least once.
    """
    if corpus_size < 1:
        raise ValueError("corpus_size must be >= 1")
    if not prefs.sets:
        return ParticipationStats(0, 0, 0, DistributionStats(), DistributionStats(), 0.0, empty=True)
    per_participant = [len(s) for s in prefs.sets.values()]
    marks = popularity(prefs)
    return ParticipationStats(
        n_participants=len(prefs.sets),
        n_unique_papers_marked=len(marks),
        n_preferences=sum(per_participant),
        per_participant=_distribution(per_participant),
        per_paper=_distribution(list(marks.values())),
        coverage_fraction=len(marks) / corpus_size,
    )


def build_affinity(prefs: PreferenceSets) -> AffinityMatrix:
    """Count, for every unordered pair of papers, the people wanting to see both."""
    matrix = AffinityMatrix(prefs.source)
    counts = matrix.counts
    for pset in prefs.sets.values():
        papers = sorted(pset)
        for i in range(len(papers)):
            for j in range(i + 1, len(papers)):
                key = (papers[i], papers[j])
                counts[key] = counts.get(key, 0.0) + 1.0
    return matrix


def popularity(prefs: PreferenceSets) -> dict[str, int]:
    """Number of distinct persons whose preference set contains each paper."""
    counts: dict[str, int] = {}
    for pset in prefs.sets.values():
        for pid in pset:
            counts[pid] = counts.get(pid, 0) + 1
    return counts


def relevance_affinity(responses: list[AuthorResponse]) -> AffinityMatrix:
    """Pairwise sums of the relevance levels authors assigned against their anchor."""
    matrix = AffinityMatrix("author_relevance")
    for r in responses:
        for pid, level in r.relevance.items():
            if level > 0:
                matrix.add(r.anchor_paper_id, pid, float(level))
    return matrix


def compare_sources(
    attendee_aff: AffinityMatrix,
    author_aff: AffinityMatrix,
    thresholds: AffinityThresholds | None = None,
) -> AffinityComparison:
    """Where the two sources disagree, in four strict-threshold buckets.

    Only pairs present in at least one matrix are considered.
    """
    th = thresholds or AffinityThresholds()
    universe = sorted(set(attendee_aff.counts) | set(author_aff.counts))
    superset_violations: list[Pair] = []
    weak_vs_strong: list[Pair] = []
    zero_vs_strong: list[Pair] = []
    big_difference: list[Pair] = []
    for key in universe:
        att = attendee_aff.counts.get(key, 0.0)
        auth = author_aff.counts.get(key, 0.0)
        if att == 0 and auth > th.strong_author:
            superset_violations.append(key)
        if att <= th.strong_attendee and auth > th.strong_author:
            weak_vs_strong.append(key)
        if auth == 0 and att > th.strong_attendee:
            zero_vs_strong.append(key)
        if abs(att - auth) > th.big_difference:
            big_difference.append(key)
    return AffinityComparison(th, superset_violations, weak_vs_strong, zero_vs_strong, big_difference)


@dataclass(frozen=True)
class BlendWeights:
    w_att: float = 1.0
    w_int: float = 1.0
    w_rel: float = 2.0  # author relevance is the highest-precision similarity signal


def blend_affinity(
    attendee_aff: AffinityMatrix,
    author_interest_aff: AffinityMatrix,
    relevance_marks: AffinityMatrix,
    weights: BlendWeights | None = None,
) -> AffinityMatrix:
    """Weighted sum of the two raw matrices and the relevance-level matrix."""
    w = weights or BlendWeights()
    if w.w_att < 0 or w.w_int < 0 or w.w_rel < 0:
        raise ValueError("blend weights must be non-negative")
    if w.w_att == 0 and w.w_int == 0 and w.w_rel == 0:
        raise ValueError("blend weights must not all be zero")
    blended = AffinityMatrix("blended")
    keys = set(attendee_aff.counts) | set(author_interest_aff.counts) | set(relevance_marks.counts)
    for key in keys:
        value = (
            w.w_att * attendee_aff.counts.get(key, 0.0)
            + w.w_int * author_interest_aff.counts.get(key, 0.0)
            + w.w_rel * relevance_marks.counts.get(key, 0.0)
        )
        if value != 0.0:
            blended.counts[key] = value
    return blended


# ---------------------------------------------------------------------------
# Report rendering and record serialization


def _fmt(v: float) -> str:
    return f"{v:g}"


def render_participation_table(stats_by_source: dict[str, ParticipationStats]) -> str:
    """Plain-text participation/coverage table, one column per source."""
    sources = list(stats_by_source)
    rows: list[tuple[str, list[str]]] = []

    def dist(d: DistributionStats) -> str:
        return (
            f"mean: {d.mean:.2f} median: {_fmt(d.median)} "
            f"std-dev: {d.stddev:.2f} min: {_fmt(d.min)} max: {_fmt(d.max)}"
        )

    rows.append(("# of participants", [str(stats_by_source[s].n_participants) for s in sources]))
    rows.append(
        (
            "# unique papers marked",
            [
                f"{st.n_unique_papers_marked} ({st.coverage_fraction * 100:.2f}% of all the papers)"
                for st in (stats_by_source[s] for s in sources)
            ],
        )
    )
    rows.append(("# preferences marked", [str(stats_by_source[s].n_preferences) for s in sources]))
    rows.append(("# preferences per participant", [dist(stats_by_source[s].per_participant) for s in sources]))
    rows.append(("# of participants' preferences per paper", [dist(stats_by_source[s].per_paper) for s in sources]))

    header = ["Metric"] + sources
    table = [header] + [[label] + cells for label, cells in rows]
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    lines = []
    for i, row in enumerate(table):
        lines.append(" | ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
        if i == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def participation_records(stats_by_source: dict[str, ParticipationStats]) -> list[dict]:
    records = []
    for source, st in stats_by_source.items():
        records.append(
            {
                "source": source,
                "n_participants": st.n_participants,
                "n_unique_papers_marked": st.n_unique_papers_marked,
                "n_preferences": st.n_preferences,
                "per_participant": vars(st.per_participant),
                "per_paper": vars(st.per_paper),
                "coverage_fraction": st.coverage_fraction,
                "empty": st.empty,
            }
        )
    return records


def affinity_records(matrix: AffinityMatrix) -> list[dict]:
    return [
        {"source": matrix.source, "p": p, "q": q, "count": count}
        for (p, q), count in sorted(matrix.counts.items())
    ]


def comparison_records(
    cmp: AffinityComparison, attendee_aff: AffinityMatrix, author_aff: AffinityMatrix
) -> list[dict]:
    records: list[dict] = [
        {
            "thresholds": {
                "strong_author": cmp.thresholds.strong_author,
                "strong_attendee": cmp.thresholds.strong_attendee,
                "big_difference": cmp.thresholds.big_difference,
            }
        }
    ]
    buckets = [
        ("superset_violation", cmp.superset_violations),
        ("weak_vs_strong", cmp.weak_vs_strong),
        ("zero_vs_strong", cmp.zero_vs_strong),
        ("big_difference", cmp.big_difference),
    ]
    for kind, pairs in buckets:
        for p, q in pairs:
            records.append(
                {
                    "kind": kind,
                    "pair": [p, q],
                    "attendee": attendee_aff.get(p, q),
                    "author": author_aff.get(p, q),
                }
            )
    return records


def render_comparison(
    cmp: AffinityComparison, attendee_aff: AffinityMatrix, author_aff: AffinityMatrix
) -> str:
    th = cmp.thresholds
    lines = [
        f"strong thresholds: author > {_fmt(th.strong_author)}, attendee > {_fmt(th.strong_attendee)}",
        f"pairs with zero attendee affinity but strong author affinity: {len(cmp.superset_violations)}",
        f"pairs with weak (<= {_fmt(th.strong_attendee)}) attendee affinity but strong author affinity: "
        f"{len(cmp.weak_vs_strong)}",
        f"pairs with zero author affinity but strong attendee affinity: {len(cmp.zero_vs_strong)}",
        f"pairs where the sources differ by more than {_fmt(th.big_difference)}: {len(cmp.big_difference)}",
    ]
    for label, pairs in [
        ("zero-attendee/strong-author", cmp.superset_violations),
        ("weak-attendee/strong-author", cmp.weak_vs_strong),
        ("zero-author/strong-attendee", cmp.zero_vs_strong),
        ("big-difference", cmp.big_difference),
    ]:
        for p, q in pairs:
            lines.append(
                f"  [{label}] ({p}, {q}): attendee={_fmt(attendee_aff.get(p, q))} "
                f"author={_fmt(author_aff.get(p, q))}"
            )
    return "\n".join(lines)
