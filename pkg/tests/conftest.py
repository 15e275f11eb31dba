from __future__ import annotations

import random
from pathlib import Path

import pytest

from confsched.corpus import (
    AuthorResponse,
    BookmarkSet,
    Dataset,
    Paper,
    Person,
    Room,
    Slot,
    Venue,
    load_dataset,
)

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> Dataset:
    d = FIXTURES / name
    groups = d / "groups.jsonl"
    return load_dataset(
        d / "papers.jsonl",
        d / "responses.jsonl",
        d / "bookmarks.jsonl",
        d / "venue.jsonl",
        groups if groups.exists() else None,
    )


@pytest.fixture
def minimal_dataset() -> Dataset:
    return load_fixture("minimal")


@pytest.fixture
def ratings_dataset() -> Dataset:
    return load_fixture("ratings4x5")


@pytest.fixture
def cliques_dataset() -> Dataset:
    return load_fixture("cliques8")


def default_venue(n_slots: int = 2, n_rooms: int = 2) -> Venue:
    slots = tuple(Slot(f"t{i + 1}", i // 4, 540 + 100 * (i % 4), 80) for i in range(n_slots))
    rooms = tuple(Room(f"r{i + 1}", 50 - 10 * i) for i in range(n_rooms))
    return Venue(slots, rooms)


def make_dataset(
    paper_ids: list[str],
    bookmarks: dict[str, set[str]] | None = None,
    responses: list[AuthorResponse] | None = None,
    venue: Venue | None = None,
    authors_of: dict[str, list[str]] | None = None,
    groups: dict[str, str] | None = None,
) -> Dataset:
    """Hand-built dataset for unit tests; each paper gets its own author unless told otherwise."""
    authors_of = authors_of or {}
    papers = {
        pid: Paper(pid, f"title {pid}", f"abstract {pid}", (), tuple(authors_of.get(pid, [f"auth_{pid}"])))
        for pid in paper_ids
    }
    bookmark_list = [
        BookmarkSet(person, frozenset(pids)) for person, pids in sorted((bookmarks or {}).items())
    ]
    response_list = list(responses or [])
    author_ids = {a for p in papers.values() for a in p.author_ids}
    person_ids = set(author_ids)
    person_ids.update(b.attendee_id for b in bookmark_list)
    person_ids.update(r.author_id for r in response_list)
    persons = {pid: Person(pid, None, pid in author_ids) for pid in sorted(person_ids)}
    return Dataset(
        papers,
        persons,
        venue or default_venue(),
        response_list,
        bookmark_list,
        dict(groups or {}),
    )


def random_preference_dataset(rng: random.Random, max_persons: int = 20, max_papers: int = 15) -> Dataset:
    """Random bookmark-only dataset for affinity/recommender properties."""
    n_papers = rng.randint(1, max_papers)
    n_persons = rng.randint(1, max_persons)
    paper_ids = [f"p{i:02d}" for i in range(n_papers)]
    bookmarks = {}
    for u in range(n_persons):
        size = rng.randint(0, n_papers)
        if size:
            bookmarks[f"u{u:02d}"] = set(rng.sample(paper_ids, size))
    return make_dataset(paper_ids, bookmarks)
