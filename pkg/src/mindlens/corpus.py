"""Corpus loading: NDJSON dump ingestion, filtering, and seeded sampling.

Input dumps use the Pushshift submission vocabulary (id, subreddit,
created_utc, title, selftext). Records are normalized into :class:`Post`
objects whose ``text`` field is the canonical content every downstream
stage consumes.
"""

from __future__ import annotations

import json
import random
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .util import DataError, MindlensError, read_ndjson, write_ndjson


def clean_text(raw: str) -> str:
    """NFC-normalize and strip control characters (newline and tab survive)."""
    normalized = unicodedata.normalize("NFC", raw)
    return "".join(
        ch
        for ch in normalized
        if ch in ("\n", "\t") or unicodedata.category(ch) != "Cc"
    )


def compose_text(title: str, body: str) -> str:
    """Canonical post text: title and body joined by a blank line, empty parts omitted."""
    parts = [p.strip() for p in (clean_text(title), clean_text(body))]
    return "\n\n".join(p for p in parts if p)


@dataclass(frozen=True)
class Post:
    """One social-media submission, treated as an independent unit."""

    id: str
    community: str
    created_at: int
    title: str
    body: str

    @property
    def text(self) -> str:
        return compose_text(self.title, self.body)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "community": self.community,
            "created_at": self.created_at,
            "title": self.title,
            "body": self.body,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Post":
        return cls(
            id=str(obj["id"]),
            community=str(obj["community"]),
            created_at=int(obj["created_at"]),
            title=str(obj.get("title", "")),
            body=str(obj.get("body", "")),
        )


@dataclass(frozen=True)
class CorpusFilter:
    """Admission predicate: community membership plus an inclusive epoch window."""

    communities: frozenset[str]
    date_window: tuple[int, int]

    def __post_init__(self) -> None:
        start, end = self.date_window
        if start > end:
            raise MindlensError(f"date window start {start} after end {end}")

    def admits(self, community: str, created_at: int) -> bool:
        start, end = self.date_window
        return community in self.communities and start <= created_at <= end


@dataclass(frozen=True)
class SampleSpec:
    size: int
    seed: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise MindlensError(f"sample size must be >= 1, got {self.size}")


@dataclass
class IngestStats:
    """Per-line accounting; the five counters sum to total_lines."""

    total_lines: int = 0
    parse_failures: int = 0
    filtered_out: int = 0
    empty_text_drops: int = 0
    duplicates: int = 0
    admitted: int = 0
    failure_lines: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "total_lines": self.total_lines,
            "parse_failures": self.parse_failures,
            "filtered_out": self.filtered_out,
            "empty_text_drops": self.empty_text_drops,
            "duplicates": self.duplicates,
            "admitted": self.admitted,
        }


_REQUIRED_DUMP_KEYS = ("id", "subreddit", "created_utc", "title", "selftext")


def _parse_dump_line(line: str) -> Post | None:
    """Normalize one raw dump line to a Post, or None if the record is malformed."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict):
        return None
    for key in _REQUIRED_DUMP_KEYS:
        if key not in obj:
            return None
    if not isinstance(obj["id"], str) or not obj["id"]:
        return None
    if not isinstance(obj["subreddit"], str):
        return None
    if not isinstance(obj["title"], str) or not isinstance(obj["selftext"], str):
        return None
    created = obj["created_utc"]
    try:
        created_int = int(created)
    except (TypeError, ValueError):
        return None
    if isinstance(created, float) and created != created_int:
        return None
    if isinstance(created, bool) or isinstance(created, (list, dict)):
        return None
    return Post(
        id=obj["id"],
        community=obj["subreddit"],
        created_at=created_int,
        title=obj["title"],
        body=obj["selftext"],
    )


def ingest(path: str | Path, flt: CorpusFilter) -> tuple[list[Post], IngestStats]:
    """Load a dump file, admitting records that pass the filter and have text.

    Malformed lines are skipped and counted, never fatal. Duplicate ids keep
    the first admitted occurrence. An unreadable file raises DataError.
    """
    path = Path(path)
    stats = IngestStats()
    posts: list[Post] = []
    seen: set[str] = set()
    try:
        fh = path.open("r", encoding="utf-8", errors="replace")
    except OSError as exc:
        raise DataError(f"cannot read dump file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            stats.total_lines += 1
            post = _parse_dump_line(line.strip()) if line.strip() else None
            if post is None:
                stats.parse_failures += 1
                stats.failure_lines.append(lineno)
                continue
            if not flt.admits(post.community, post.created_at):
                stats.filtered_out += 1
                continue
            if not post.text:
                stats.empty_text_drops += 1
                continue
            if post.id in seen:
                stats.duplicates += 1
                continue
            seen.add(post.id)
            stats.admitted += 1
            posts.append(post)
    return posts, stats


def sample(posts: Sequence[Post], spec: SampleSpec) -> list[Post]:
    """Uniform sample without replacement, fully determined by the seed.

    Deterministic in the post multiset: posts are ordered by id, shuffled with
    a Mersenne Twister (MT19937) generator seeded directly by spec.seed using
    the Fisher-Yates shuffle, truncated to the requested size, and re-sorted
    by id for stable downstream ordering.
    """
    ordered = sorted(posts, key=lambda p: p.id)
    rng = random.Random(spec.seed)
    rng.shuffle(ordered)
    picked = ordered[: min(spec.size, len(ordered))]
    return sorted(picked, key=lambda p: p.id)


def write_posts(path: str | Path, posts: Iterable[Post]) -> int:
    """Write posts in the canonical corpus NDJSON layout."""
    return write_ndjson(path, (p.to_dict() for p in posts))


def read_posts(path: str | Path) -> list[Post]:
    """Read a canonical corpus NDJSON file; duplicate or empty ids are fatal."""
    posts: list[Post] = []
    seen: set[str] = set()
    for obj in read_ndjson(path):
        try:
            post = Post.from_dict(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: bad post record: {exc}") from exc
        if not post.id:
            raise DataError(f"{path}: post with empty id")
        if post.id in seen:
            raise DataError(f"{path}: duplicate post id {post.id!r}")
        seen.add(post.id)
        posts.append(post)
    return posts
