"""Dictionary-based multi-label annotation from per-disorder term lexicons.

Matching contract (kept deliberately simple and auditable):

* Text and terms are NFC-normalized, lowercased, and whitespace-collapsed
  before matching; multi-word terms are stored with single spaces.
* A term matches only at word boundaries, where a word character is exactly
  ``[a-z0-9]`` after lowercasing ("anxious" never matches "anxiousness").
* Hit offsets refer to the normalized text returned by
  :func:`normalize_for_match`.

The matcher is a single-pass multi-pattern automaton (Aho-Corasick) with
post-hoc boundary checks; the test suite holds an independent naive per-term
scan oracle against which it must agree exactly.
"""

from __future__ import annotations

import json
import re
import unicodedata
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .corpus import Post
from .util import DataError, ValidationError


class DisorderLabel(str, Enum):
    """Closed label taxonomy: nine disorders plus the mutually exclusive None."""

    ADHD = "ADHD"
    AUTISM = "Autism"
    ANXIETY = "Anxiety"
    BIPOLAR = "Bipolar"
    DEPRESSION = "Depression"
    EATING_DISORDER = "EatingDisorder"
    OCD = "OCD"
    PTSD = "PTSD"
    SCHIZOPHRENIA = "Schizophrenia"
    NONE = "None"


#: The nine disorders in the canonical label-vector order.
DISORDERS: tuple[DisorderLabel, ...] = (
    DisorderLabel.ADHD,
    DisorderLabel.AUTISM,
    DisorderLabel.ANXIETY,
    DisorderLabel.BIPOLAR,
    DisorderLabel.DEPRESSION,
    DisorderLabel.EATING_DISORDER,
    DisorderLabel.OCD,
    DisorderLabel.PTSD,
    DisorderLabel.SCHIZOPHRENIA,
)

#: Lexicon file keys, in label-vector order.
LEXICON_KEYS: dict[str, DisorderLabel] = {
    "adhd": DisorderLabel.ADHD,
    "autism": DisorderLabel.AUTISM,
    "anxiety": DisorderLabel.ANXIETY,
    "bipolar": DisorderLabel.BIPOLAR,
    "depression": DisorderLabel.DEPRESSION,
    "eating_disorder": DisorderLabel.EATING_DISORDER,
    "ocd": DisorderLabel.OCD,
    "ptsd": DisorderLabel.PTSD,
    "schizophrenia": DisorderLabel.SCHIZOPHRENIA,
}

_KEY_FOR_LABEL = {label: key for key, label in LEXICON_KEYS.items()}

_WS_RE = re.compile(r"\s+")


def normalize_for_match(text: str) -> str:
    """NFC, lowercase, collapse whitespace runs to single spaces, strip ends."""
    t = unicodedata.normalize("NFC", text).lower()
    return _WS_RE.sub(" ", t).strip()


def is_word_char(ch: str) -> bool:
    return "a" <= ch <= "z" or "0" <= ch <= "9"


def has_word_boundaries(text: str, start: int, end: int) -> bool:
    """True when text[start:end] is delimited by non-word characters or edges."""
    if start > 0 and is_word_char(text[start - 1]):
        return False
    if end < len(text) and is_word_char(text[end]):
        return False
    return True


class KeywordMatcher:
    """Aho-Corasick automaton over already-normalized patterns.

    Immutable after construction; safe for concurrent use from many threads.
    """

    def __init__(self, patterns: Iterable[str]):
        # goto is a list of dicts indexed by state; outputs maps state -> patterns.
        self._goto: list[dict[str, int]] = [{}]
        self._fail: list[int] = [0]
        self._out: list[list[str]] = [[]]
        for pattern in sorted(set(patterns)):
            if not pattern:
                continue
            self._insert(pattern)
        self._build_failure_links()

    def _insert(self, pattern: str) -> None:
        state = 0
        for ch in pattern:
            nxt = self._goto[state].get(ch)
            if nxt is None:
                self._goto.append({})
                self._fail.append(0)
                self._out.append([])
                nxt = len(self._goto) - 1
                self._goto[state][ch] = nxt
            state = nxt
        self._out[state].append(pattern)

    def _build_failure_links(self) -> None:
        queue: deque[int] = deque()
        for state in self._goto[0].values():
            self._fail[state] = 0
            queue.append(state)
        while queue:
            state = queue.popleft()
            for ch, nxt in self._goto[state].items():
                queue.append(nxt)
                fallback = self._fail[state]
                while fallback and ch not in self._goto[fallback]:
                    fallback = self._fail[fallback]
                self._fail[nxt] = self._goto[fallback].get(ch, 0)
                if self._fail[nxt] == nxt:
                    self._fail[nxt] = 0
                self._out[nxt] = self._out[nxt] + self._out[self._fail[nxt]]

    def scan(self, text: str) -> Iterator[tuple[int, int, str]]:
        """Yield (start, end, pattern) for every occurrence, including overlaps."""
        state = 0
        for i, ch in enumerate(text):
            while state and ch not in self._goto[state]:
                state = self._fail[state]
            state = self._goto[state].get(ch, 0)
            for pattern in self._out[state]:
                yield i - len(pattern) + 1, i + 1, pattern


@dataclass(frozen=True)
class TermHit:
    term: str
    disorder: DisorderLabel
    offset: int


@dataclass(frozen=True)
class MatchResult:
    """Labels plus the term occurrences that produced them.

    labels is exactly the set of disorders present in hits, or {None} when
    hits is empty; offsets index into normalize_for_match(post.text).
    """

    labels: frozenset[DisorderLabel]
    hits: tuple[TermHit, ...]


class Lexicon:
    """Validated per-disorder term sets with a pre-compiled matcher.

    All nine disorders are present as keys (possibly empty). Instances are
    immutable after construction and shareable across threads.
    """

    def __init__(self, entries: Mapping[DisorderLabel, Iterable[str]]):
        normalized: dict[DisorderLabel, frozenset[str]] = {}
        for label in DISORDERS:
            terms = set()
            for term in entries.get(label, ()):
                term = normalize_for_match(term)
                if term:
                    terms.add(term)
            normalized[label] = frozenset(terms)
        unknown = set(entries) - set(DISORDERS)
        if unknown:
            names = ", ".join(sorted(str(u) for u in unknown))
            raise ValidationError(f"lexicon contains unknown disorder keys: {names}")
        if not any(normalized.values()):
            raise ValidationError("lexicon has no terms for any disorder")
        self.entries: dict[DisorderLabel, frozenset[str]] = normalized
        self._term_owners: dict[str, list[DisorderLabel]] = {}
        for label in DISORDERS:
            for term in normalized[label]:
                self._term_owners.setdefault(term, []).append(label)
        self.matcher = KeywordMatcher(self._term_owners)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lexicon) and self.entries == other.entries

    def __repr__(self) -> str:
        sizes = {_KEY_FOR_LABEL[l]: len(t) for l, t in self.entries.items() if t}
        return f"Lexicon({sizes})"

    def owners(self, term: str) -> list[DisorderLabel]:
        return self._term_owners.get(term, [])

    def to_dict(self) -> dict[str, list[str]]:
        return {
            _KEY_FOR_LABEL[label]: sorted(self.entries[label]) for label in DISORDERS
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj: Mapping[str, Iterable[str]]) -> "Lexicon":
        entries: dict[DisorderLabel, list[str]] = {}
        unknown = [key for key in obj if key not in LEXICON_KEYS]
        if unknown:
            raise ValidationError(
                "lexicon contains unknown disorder keys: " + ", ".join(sorted(unknown))
            )
        for key, terms in obj.items():
            if not isinstance(terms, (list, tuple)):
                raise ValidationError(f"lexicon entry {key!r} must be an array of strings")
            entries[LEXICON_KEYS[key]] = [str(t) for t in terms]
        return cls(entries)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load and validate a lexicon JSON file; unknown keys and empty files are fatal."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read lexicon file {path}: {exc}") from exc
    if not raw.strip():
        raise ValidationError(f"lexicon file {path} is empty")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"lexicon file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"lexicon file {path} must contain a JSON object")
    return Lexicon.from_dict(obj)


def annotate_dictionary(post: Post, lexicon: Lexicon) -> MatchResult:
    """Label a post with every disorder whose lexicon has a matching term.

    Returns {None} exactly when no term matches. Duplicate hits are kept in
    the hits list (audit trail) but deduplicate at the label level.
    """
    text = normalize_for_match(post.text)
    hits: list[TermHit] = []
    labels: set[DisorderLabel] = set()
    for start, end, term in lexicon.matcher.scan(text):
        if not has_word_boundaries(text, start, end):
            continue
        for disorder in lexicon.owners(term):
            hits.append(TermHit(term=term, disorder=disorder, offset=start))
            labels.add(disorder)
    if not labels:
        labels = {DisorderLabel.NONE}
    hits.sort(key=lambda h: (h.offset, h.term, h.disorder.value))
    return MatchResult(labels=frozenset(labels), hits=tuple(hits))
