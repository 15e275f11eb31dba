"""Conference corpus: papers, people, venue, preference inputs, and validation.

All inputs are line-delimited JSON (one object per line, UTF-8). Papers may
alternatively be given as CSV with a header row
``id,title,abstract,keywords,authors,award`` where keywords/authors are
';'-joined.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

AWARDS = ("none", "honorable_mention", "best_paper")
RELEVANCE_LEVELS = (0, 1, 2)

PAPERS_CSV_COLUMNS = ["id", "title", "abstract", "keywords", "authors", "award"]


class DatasetError(Exception):
    """Base class for corpus loading/validation failures."""


class ParseError(DatasetError):
    """Malformed record, with a file/line locator."""

    def __init__(self, path: str | Path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


class UnknownIdError(DatasetError):
    """A record references a paper/person id that does not exist."""


class DuplicateIdError(DatasetError):
    """An id that must be unique appears more than once."""


@dataclass(frozen=True)
class Paper:
    id: str
    title: str
    abstract: str = ""
    keywords: tuple[str, ...] = ()
    author_ids: tuple[str, ...] = ()
    award: str = "none"


@dataclass(frozen=True)
class Person:
    id: str
    display_name: str | None = None
    is_author: bool = False


@dataclass(frozen=True)
class Slot:
    id: str
    day: int
    start: int  # minute of day
    duration: int  # minutes


@dataclass(frozen=True)
class Room:
    id: str
    capacity: int


@dataclass(frozen=True)
class Venue:
    slots: tuple[Slot, ...]
    rooms: tuple[Room, ...]


@dataclass(frozen=True)
class AuthorResponse:
    author_id: str
    anchor_paper_id: str
    relevance: dict[str, int]  # candidate paper id -> 0 | 1 | 2
    interest: frozenset[str]

    def __hash__(self):  # relevance dict is never mutated after load
        return hash((self.author_id, self.anchor_paper_id))


@dataclass(frozen=True)
class BookmarkSet:
    attendee_id: str
    paper_ids: frozenset[str]


@dataclass
class Dataset:
    """The full conference corpus. Treated as immutable after load."""

    papers: dict[str, Paper]
    persons: dict[str, Person]
    venue: Venue
    author_responses: list[AuthorResponse]
    bookmarks: list[BookmarkSet]
    committee_groups: dict[str, str] = field(default_factory=dict)
    load_warnings: list[str] = field(default_factory=list, compare=False)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def read_records(path: str | Path):
    """Yield ``(lineno, record)`` for every non-blank line of a JSONL file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(path, lineno, "record is not an object")
            yield lineno, record


def write_records(path: str | Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def _require(record: dict, key: str, path, lineno):
    if key not in record:
        raise ParseError(path, lineno, f"missing field '{key}'")
    return record[key]


def _str_list(value, key, path, lineno) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(path, lineno, f"field '{key}' must be a list of strings")
    return value


def _load_papers(path: str | Path) -> dict[str, Paper]:
    if str(path).endswith(".csv"):
        return _load_papers_csv(path)
    papers: dict[str, Paper] = {}
    for lineno, rec in read_records(path):
        paper = Paper(
            id=str(_require(rec, "id", path, lineno)),
            title=str(_require(rec, "title", path, lineno)),
            abstract=str(rec.get("abstract", "")),
            keywords=tuple(_str_list(rec.get("keywords", []), "keywords", path, lineno)),
            author_ids=tuple(_str_list(_require(rec, "authors", path, lineno), "authors", path, lineno)),
            award=str(rec.get("award", "none")),
        )
        _check_paper(paper, path, lineno, papers)
        papers[paper.id] = paper
    return papers


def _load_papers_csv(path: str | Path) -> dict[str, Paper]:
    papers: dict[str, Paper] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != PAPERS_CSV_COLUMNS:
            raise ParseError(path, 1, f"CSV header must be {','.join(PAPERS_CSV_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if any(row[c] is None for c in PAPERS_CSV_COLUMNS):
                raise ParseError(path, lineno, "wrong number of columns")
            paper = Paper(
                id=row["id"],
                title=row["title"],
                abstract=row["abstract"],
                keywords=tuple(k for k in row["keywords"].split(";") if k),
                author_ids=tuple(a for a in row["authors"].split(";") if a),
                award=row["award"] or "none",
            )
            _check_paper(paper, path, lineno, papers)
            papers[paper.id] = paper
    return papers


def _check_paper(paper: Paper, path, lineno, seen: dict[str, Paper]) -> None:
    if not paper.id:
        raise ParseError(path, lineno, "empty paper id")
    if paper.id in seen:
        raise DuplicateIdError(f"{path}:{lineno}: duplicate paper id '{paper.id}'")
    if not paper.title:
        raise ParseError(path, lineno, f"paper '{paper.id}' has empty title")
    if not paper.author_ids:
        raise ParseError(path, lineno, f"paper '{paper.id}' has no authors")
    if paper.award not in AWARDS:
        raise ParseError(path, lineno, f"paper '{paper.id}' has unknown award '{paper.award}'")


def _load_responses(path: str | Path, papers: dict[str, Paper]) -> list[AuthorResponse]:
    responses: list[AuthorResponse] = []
    seen: set[tuple[str, str]] = set()
    for lineno, rec in read_records(path):
        author = str(_require(rec, "author", path, lineno))
        anchor = str(_require(rec, "anchor", path, lineno))
        relevance_raw = _require(rec, "relevance", path, lineno)
        if not isinstance(relevance_raw, dict):
            raise ParseError(path, lineno, "field 'relevance' must be an object")
        interest = _str_list(rec.get("interest", []), "interest", path, lineno)
        if anchor not in papers:
            raise UnknownIdError(f"{path}:{lineno}: unknown anchor paper '{anchor}'")
        if author not in papers[anchor].author_ids:
            raise DatasetError(
                f"{path}:{lineno}: anchor '{anchor}' is not authored by respondent '{author}'"
            )
        relevance: dict[str, int] = {}
        for pid, level in relevance_raw.items():
            if pid not in papers:
                raise UnknownIdError(f"{path}:{lineno}: unknown paper '{pid}' in relevance map")
            if pid == anchor:
                raise DatasetError(f"{path}:{lineno}: anchor '{anchor}' present in its own relevance map")
            if not isinstance(level, int) or level not in RELEVANCE_LEVELS:
                raise ParseError(path, lineno, f"relevance level for '{pid}' must be one of {RELEVANCE_LEVELS}")
            relevance[pid] = level
        for pid in interest:
            if pid not in papers:
                raise UnknownIdError(f"{path}:{lineno}: unknown paper '{pid}' in interest list")
        key = (author, anchor)
        if key in seen:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate response for author '{author}' anchor '{anchor}'")
        seen.add(key)
        responses.append(AuthorResponse(author, anchor, relevance, frozenset(interest)))
    return responses


def _load_bookmarks(path: str | Path, papers: dict[str, Paper], warnings: list[str]) -> list[BookmarkSet]:
    bookmarks: list[BookmarkSet] = []
    seen: set[str] = set()
    for lineno, rec in read_records(path):
        attendee = str(_require(rec, "attendee", path, lineno))
        pids = _str_list(_require(rec, "papers", path, lineno), "papers", path, lineno)
        if attendee in seen:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate bookmark set for attendee '{attendee}'")
        seen.add(attendee)
        for pid in pids:
            if pid not in papers:
                raise UnknownIdError(f"{path}:{lineno}: unknown paper '{pid}' in bookmarks of '{attendee}'")
        if not pids:
            warnings.append(f"dropped empty bookmark set for attendee '{attendee}'")
            continue
        bookmarks.append(BookmarkSet(attendee, frozenset(pids)))
    return bookmarks


def _load_venue(path: str | Path) -> Venue:
    records = list(read_records(path))
    if len(records) != 1:
        raise ParseError(path, 1, f"venue file must contain exactly one record, found {len(records)}")
    lineno, rec = records[0]
    slots = []
    slot_ids: set[str] = set()
    for s in _require(rec, "slots", path, lineno):
        slot = Slot(str(s["id"]), int(s["day"]), int(s["start"]), int(s["duration"]))
        if slot.id in slot_ids:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate slot id '{slot.id}'")
        slot_ids.add(slot.id)
        slots.append(slot)
    rooms = []
    room_ids: set[str] = set()
    for r in _require(rec, "rooms", path, lineno):
        room = Room(str(r["id"]), int(r["capacity"]))
        if room.id in room_ids:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate room id '{room.id}'")
        if room.capacity <= 0:
            raise ParseError(path, lineno, f"room '{room.id}' has non-positive capacity")
        room_ids.add(room.id)
        rooms.append(room)
    return Venue(tuple(slots), tuple(rooms))


def _load_groups(path: str | Path, papers: dict[str, Paper]) -> dict[str, str]:
    groups: dict[str, str] = {}
    for lineno, rec in read_records(path):
        pid = str(_require(rec, "paper", path, lineno))
        if pid not in papers:
            raise UnknownIdError(f"{path}:{lineno}: unknown paper '{pid}' in groups file")
        if pid in groups:
            raise DuplicateIdError(f"{path}:{lineno}: paper '{pid}' assigned to more than one group")
        groups[pid] = str(_require(rec, "group", path, lineno))
    return groups


def _derive_persons(papers, responses, bookmarks) -> dict[str, Person]:
    author_ids = {a for p in papers.values() for a in p.author_ids}
    ids = set(author_ids)
    ids.update(r.author_id for r in responses)
    ids.update(b.attendee_id for b in bookmarks)
    return {pid: Person(pid, None, pid in author_ids) for pid in sorted(ids)}


def load_dataset(
    papers_path: str | Path,
    responses_path: str | Path,
    bookmarks_path: str | Path,
    venue_path: str | Path,
    groups_path: str | Path | None = None,
) -> Dataset:
    """Load and cross-validate the full corpus, rejecting any dangling reference."""
    papers = _load_papers(papers_path)
    if not papers:
        raise DatasetError("dataset has zero papers")
    warnings: list[str] = []
    responses = _load_responses(responses_path, papers)
    bookmarks = _load_bookmarks(bookmarks_path, papers, warnings)
    venue = _load_venue(venue_path)
    groups = _load_groups(groups_path, papers) if groups_path else {}
    persons = _derive_persons(papers, responses, bookmarks)
    return Dataset(papers, persons, venue, responses, bookmarks, groups, warnings)


def save_dataset(dataset: Dataset, out_dir: str | Path) -> dict[str, Path]:
    """Serialize a Dataset back to its five line-delimited files; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "papers": out / "papers.jsonl",
        "responses": out / "responses.jsonl",
        "bookmarks": out / "bookmarks.jsonl",
        "venue": out / "venue.jsonl",
        "groups": out / "groups.jsonl",
    }
    write_records(
        paths["papers"],
        (
            {
                "id": p.id,
                "title": p.title,
                "abstract": p.abstract,
                "keywords": list(p.keywords),
                "authors": list(p.author_ids),
                "award": p.award,
            }
            for p in dataset.papers.values()
        ),
    )
    write_records(
        paths["responses"],
        (
            {
                "author": r.author_id,
                "anchor": r.anchor_paper_id,
                "relevance": r.relevance,
                "interest": sorted(r.interest),
            }
            for r in dataset.author_responses
        ),
    )
    write_records(
        paths["bookmarks"],
        ({"attendee": b.attendee_id, "papers": sorted(b.paper_ids)} for b in dataset.bookmarks),
    )
    write_records(
        paths["venue"],
        [
            {
                "slots": [
                    {"id": s.id, "day": s.day, "start": s.start, "duration": s.duration}
                    for s in dataset.venue.slots
                ],
                "rooms": [{"id": r.id, "capacity": r.capacity} for r in dataset.venue.rooms],
            }
        ],
    )
    write_records(
        paths["groups"],
        ({"paper": pid, "group": g} for pid, g in dataset.committee_groups.items()),
    )
    return paths


def validate_dataset(dataset: Dataset, min_session_size: int = 4) -> ValidationReport:
    """Check every corpus invariant; errors are empty iff all invariants hold.

    Warnings cover droppable or suspicious-but-legal situations: empty bookmark
    sets dropped at load, papers with no preference from either source, and
    committee groups too small to fill a session.
    """
    report = ValidationReport(warnings=list(dataset.load_warnings))
    err = report.errors.append

    if not dataset.papers:
        err("dataset has zero papers")
    for pid, paper in dataset.papers.items():
        if pid != paper.id:
            err(f"paper key '{pid}' does not match record id '{paper.id}'")
        if not paper.title:
            err(f"paper '{pid}' has empty title")
        if not paper.author_ids:
            err(f"paper '{pid}' has no authors")
        if paper.award not in AWARDS:
            err(f"paper '{pid}' has unknown award '{paper.award}'")

    author_ids = {a for p in dataset.papers.values() for a in p.author_ids}
    for pid, person in dataset.persons.items():
        if pid != person.id:
            err(f"person key '{pid}' does not match record id '{person.id}'")
        if person.is_author != (pid in author_ids):
            err(f"person '{pid}' has inconsistent is_author flag")
    for aid in author_ids:
        if aid not in dataset.persons:
            err(f"author '{aid}' missing from persons")

    slot_ids = [s.id for s in dataset.venue.slots]
    if len(slot_ids) != len(set(slot_ids)):
        err("duplicate slot ids in venue")
    room_ids = [r.id for r in dataset.venue.rooms]
    if len(room_ids) != len(set(room_ids)):
        err("duplicate room ids in venue")
    for room in dataset.venue.rooms:
        if room.capacity <= 0:
            err(f"room '{room.id}' has non-positive capacity")

    seen_responses: set[tuple[str, str]] = set()
    for r in dataset.author_responses:
        if r.anchor_paper_id not in dataset.papers:
            err(f"response anchor '{r.anchor_paper_id}' is not a corpus paper")
        elif r.author_id not in dataset.papers[r.anchor_paper_id].author_ids:
            err(f"response anchor '{r.anchor_paper_id}' is not authored by '{r.author_id}'")
        if r.author_id not in dataset.persons:
            err(f"respondent '{r.author_id}' missing from persons")
        if r.anchor_paper_id in r.relevance:
            err(f"anchor '{r.anchor_paper_id}' appears in its own relevance map")
        for pid, level in r.relevance.items():
            if pid not in dataset.papers:
                err(f"relevance entry references unknown paper '{pid}'")
            if level not in RELEVANCE_LEVELS:
                err(f"relevance level {level!r} for '{pid}' is not in {RELEVANCE_LEVELS}")
        for pid in r.interest:
            if pid not in dataset.papers:
                err(f"interest entry references unknown paper '{pid}'")
        key = (r.author_id, r.anchor_paper_id)
        if key in seen_responses:
            err(f"duplicate response for author '{r.author_id}' anchor '{r.anchor_paper_id}'")
        seen_responses.add(key)

    seen_attendees: set[str] = set()
    for b in dataset.bookmarks:
        if not b.paper_ids:
            err(f"bookmark set for '{b.attendee_id}' is empty")
        if b.attendee_id in seen_attendees:
            err(f"duplicate bookmark set for attendee '{b.attendee_id}'")
        seen_attendees.add(b.attendee_id)
        if b.attendee_id not in dataset.persons:
            err(f"attendee '{b.attendee_id}' missing from persons")
        for pid in b.paper_ids:
            if pid not in dataset.papers:
                err(f"bookmark references unknown paper '{pid}'")

    group_sizes: dict[str, int] = {}
    for pid, group in dataset.committee_groups.items():
        if pid not in dataset.papers:
            err(f"committee group references unknown paper '{pid}'")
        group_sizes[group] = group_sizes.get(group, 0) + 1
    for group, size in sorted(group_sizes.items()):
        if size < min_session_size:
            report.warnings.append(f"committee group '{group}' has only {size} papers")

    preferred: set[str] = set()
    for b in dataset.bookmarks:
        preferred.update(b.paper_ids)
    for r in dataset.author_responses:
        preferred.update(r.interest)
    for pid in dataset.papers:
        if pid not in preferred:
            report.warnings.append(f"uncovered paper: '{pid}' has no preference from either source")

    return report
