"""Task definitions: versioned prompt templates and strict response parsers.

Templates are data, not code: a pack directory holds one template per task
plus the synonym tables the parsers use. All parsers are total — every
string maps to a valid result and nothing raises — and deterministic.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

from .corpus import Post
from .lexicon import DisorderLabel
from .util import ValidationError


class BinaryVerdict(str, Enum):
    """Yes/no relevance verdict; Other is the sink for unparseable or refused."""

    YES = "Yes"
    NO = "No"
    OTHER = "Other"


class SeverityLevel(str, Enum):
    MILD = "Mild"
    MODERATE = "Moderate"
    SEVERE = "Severe"
    OTHER = "Other"


class TherapyCode(str, Enum):
    """Ten named therapies plus OT (everything else) and NT (no therapy)."""

    CBT = "CBT"
    DBT = "DBT"
    ACT = "ACT"
    PT = "PT"
    MBSR = "MBSR"
    MBCT = "MBCT"
    IPT = "IPT"
    ET = "ET"
    MI = "MI"
    FT = "FT"
    OT = "OT"
    NT = "NT"


@dataclass(frozen=True)
class TherapyRecommendation:
    code: TherapyCode
    name_as_written: str
    confidence_pct: float | None = None

    def to_dict(self) -> dict:
        return {
            "code": self.code.value,
            "name_as_written": self.name_as_written,
            "confidence_pct": self.confidence_pct,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TherapyRecommendation":
        pct = obj.get("confidence_pct")
        return cls(
            code=TherapyCode(obj["code"]),
            name_as_written=str(obj.get("name_as_written", "")),
            confidence_pct=None if pct is None else float(pct),
        )


TASK_NAMES = ("binary", "disorder", "severity", "recommend_therapy", "recommend_behavior")

_PLACEHOLDER = "{post_text}"


@dataclass(frozen=True)
class PromptTemplate:
    task: str
    version: str
    system: str
    user_pattern: str

    def __post_init__(self) -> None:
        if self.task not in TASK_NAMES:
            raise ValidationError(f"unknown template task {self.task!r}")
        if self.user_pattern.count(_PLACEHOLDER) != 1:
            raise ValidationError(
                f"template ({self.task}, {self.version}) must contain "
                f"{_PLACEHOLDER} exactly once"
            )


@dataclass(frozen=True)
class RenderedPrompt:
    system: str
    user: str
    truncated: bool


def render(template: PromptTemplate, post: Post, char_budget: int = 6000) -> RenderedPrompt:
    """Substitute the post text, truncating to the character budget."""
    text = post.text
    truncated = len(text) > char_budget
    if truncated:
        text = text[:char_budget]
    return RenderedPrompt(
        system=template.system,
        user=template.user_pattern.replace(_PLACEHOLDER, text),
        truncated=truncated,
    )


# ---------------------------------------------------------------------------
# Synonym tables
# ---------------------------------------------------------------------------

_WS_RE = re.compile(r"\s+")


def _normalize_response(text: str) -> str:
    """Lowercase NFC text with hyphens/underscores spaced and whitespace collapsed."""
    t = unicodedata.normalize("NFC", text).lower()
    t = re.sub(r"[-_/]", " ", t)
    return _WS_RE.sub(" ", t).strip()


class SynonymTables:
    """Whitelist tables driving the disorder/therapy parsers."""

    def __init__(self, obj: dict):
        disorders: dict[str, list[str]] = obj.get("disorders", {})
        self.disorder_synonyms: dict[str, DisorderLabel] = {}
        for label_name, synonyms in disorders.items():
            label = DisorderLabel(label_name)
            for syn in synonyms:
                self.disorder_synonyms[_normalize_response(syn)] = label
        self.self_harm: tuple[str, ...] = tuple(
            _normalize_response(s) for s in obj.get("self_harm", [])
        )
        self.therapy_names: dict[str, TherapyCode] = {}
        for code_name, names in obj.get("therapies", {}).items():
            code = TherapyCode(code_name)
            for name in names:
                self.therapy_names[_normalize_response(name)] = code
        self.no_therapy: tuple[str, ...] = tuple(
            _normalize_response(s) for s in obj.get("no_therapy", [])
        )
        self._disorder_re = _alternation_regex(self.disorder_synonyms)
        self._self_harm_re = _alternation_regex({s: None for s in self.self_harm})
        self._therapy_name_res: list[tuple[re.Pattern[str], TherapyCode]] = [
            (_flexible_name_regex(name), code)
            for name, code in sorted(
                self.therapy_names.items(), key=lambda kv: -len(kv[0])
            )
        ]
        self._no_therapy_re = (
            _alternation_regex({s: None for s in self.no_therapy})
            if self.no_therapy
            else None
        )


def _alternation_regex(phrases: dict) -> re.Pattern[str] | None:
    """One boundary-guarded alternation, longest phrase first (leftmost-longest)."""
    if not phrases:
        return None
    ordered = sorted(phrases, key=len, reverse=True)
    body = "|".join(re.escape(p) for p in ordered)
    return re.compile(rf"(?<![a-z0-9])(?:{body})(?![a-z0-9])")


def _flexible_name_regex(normalized_name: str) -> re.Pattern[str]:
    """Match a multi-word name in original text, tolerating hyphens and case."""
    words = normalized_name.split(" ")
    body = r"[\s\-]+".join(re.escape(w) for w in words)
    return re.compile(rf"(?<![A-Za-z0-9]){body}(?![A-Za-z0-9])", re.IGNORECASE)


@lru_cache(maxsize=8)
def _builtin_pack_dir() -> Path:
    return Path(__file__).parent / "templates"


@dataclass(frozen=True)
class TemplatePack:
    version: str
    char_budget: int
    templates: dict  # task -> PromptTemplate
    tables: SynonymTables

    def template(self, task: str) -> PromptTemplate:
        try:
            return self.templates[task]
        except KeyError:
            raise ValidationError(
                f"template pack {self.version!r} has no template for task {task!r}"
            ) from None


def load_pack(version: str = "v1", root: str | Path | None = None) -> TemplatePack:
    """Load the template pack addressed by version from root (default: built-in)."""
    base = Path(root) if root is not None else _builtin_pack_dir()
    pack_dir = base / version
    if not pack_dir.is_dir():
        raise ValidationError(f"template pack {version!r} not found under {base}")
    meta = json.loads((pack_dir / "pack.json").read_text(encoding="utf-8"))
    templates: dict[str, PromptTemplate] = {}
    for task in TASK_NAMES:
        path = pack_dir / f"{task}.json"
        if not path.exists():
            raise ValidationError(f"template pack {version!r} is missing {task}.json")
        obj = json.loads(path.read_text(encoding="utf-8"))
        tpl = PromptTemplate(
            task=str(obj["task"]),
            version=str(obj["version"]),
            system=str(obj["system"]),
            user_pattern=str(obj["user_pattern"]),
        )
        if tpl.task != task:
            raise ValidationError(f"{path} declares task {tpl.task!r}, expected {task!r}")
        templates[task] = tpl
    tables = SynonymTables(
        json.loads((pack_dir / "synonyms.json").read_text(encoding="utf-8"))
    )
    return TemplatePack(
        version=str(meta.get("version", version)),
        char_budget=int(meta.get("char_budget", 6000)),
        templates=templates,
        tables=tables,
    )


@lru_cache(maxsize=1)
def _default_tables() -> SynonymTables:
    return load_pack("v1").tables


# ---------------------------------------------------------------------------
# Parsers
# ---------------------------------------------------------------------------

_FIRST_ALPHA_RE = re.compile(r"[A-Za-z]+")


def parse_binary(raw: str) -> BinaryVerdict:
    """Yes/No from the first alphabetic token of the response; Other otherwise."""
    match = _FIRST_ALPHA_RE.search(raw)
    if match is None:
        return BinaryVerdict.OTHER
    token = match.group(0).lower()
    if token == "yes":
        return BinaryVerdict.YES
    if token == "no":
        return BinaryVerdict.NO
    return BinaryVerdict.OTHER


_SEVERITY_RES = (
    (re.compile(r"(?<![a-z0-9])severe(?![a-z0-9])"), SeverityLevel.SEVERE),
    (re.compile(r"(?<![a-z0-9])moderate(?![a-z0-9])"), SeverityLevel.MODERATE),
    (re.compile(r"(?<![a-z0-9])mild(?![a-z0-9])"), SeverityLevel.MILD),
)


def parse_severity(raw: str) -> SeverityLevel:
    """First category keyword in priority order severe > moderate > mild."""
    text = _normalize_response(raw)
    for pattern, level in _SEVERITY_RES:
        if pattern.search(text):
            return level
    return SeverityLevel.OTHER


def parse_disorders(raw: str, tables: SynonymTables | None = None) -> frozenset[DisorderLabel]:
    """Whitelisted disorder labels mentioned in the response, or {None}.

    Synonyms are matched case-insensitively at word boundaries; overlapping
    mentions resolve leftmost-longest, so "manic depression" yields Bipolar
    without also counting Depression.
    """
    tables = tables or _default_tables()
    if tables._disorder_re is None:
        return frozenset({DisorderLabel.NONE})
    text = _normalize_response(raw)
    labels = {
        tables.disorder_synonyms[m.group(0)]
        for m in tables._disorder_re.finditer(text)
    }
    if not labels:
        return frozenset({DisorderLabel.NONE})
    return frozenset(labels)


def mentions_self_harm(raw: str, tables: SynonymTables | None = None) -> bool:
    """True when the response contains a suicidality/self-harm marker."""
    tables = tables or _default_tables()
    if tables._self_harm_re is None:
        return False
    return tables._self_harm_re.search(_normalize_response(raw)) is not None


_ABBREV_RE = re.compile(
    r"(?<![A-Za-z0-9])(CBT|DBT|ACT|MBSR|MBCT|IPT|PT|ET|MI|FT|NT)(?![A-Za-z0-9])"
)
_CONFIDENCE_RE = re.compile(
    r"^[\s:\-–—]*[\)\]]?[\s:\-–—]*[\(\[]?\s*(\d{1,3}(?:\.\d+)?)\s*%"
)
_THERAPY_TOKEN_RE = re.compile(r"(?<![A-Za-z0-9])[Tt]herap(?:y|ies)(?![A-Za-z0-9])")
_PRECEDING_WORDS_RE = re.compile(r"((?:[A-Za-z][A-Za-z'\-]*[\s\-]+){1,6})$")
_OT_STOPWORDS = frozenset(
    """a an and are as based be best can could consider considering effective for
    good great he helpful her his i include includes including is it like may
    maybe might more most my of on or other others perhaps please recommend
    recommended recommends she should some such suggest suggested suggests that
    the their these they this those to try trying we will with would you your
    also about in less least""".split()
)
_OT_JOINERS = frozenset(("and", "of", "the"))


def _ot_candidates(raw: str) -> list[tuple[int, int, str]]:
    """Find "<Name> Therapy" phrases for the OT bucket.

    From each Therapy token, walk backward over adjacent words: keep the
    maximal run of capitalized words (joiner words allowed between
    capitalized neighbors), else a single non-stopword lowercase word.
    """
    candidates = []
    for token in _THERAPY_TOKEN_RE.finditer(raw):
        before = _PRECEDING_WORDS_RE.search(raw[: token.start()])
        if before is None:
            continue
        words = before.group(1).split()
        kept: list[str] = []
        for i in range(len(words) - 1, -1, -1):
            word = words[i]
            if word[0].isupper():
                kept.insert(0, word)
            elif word.lower() in _OT_JOINERS and i > 0 and words[i - 1][0].isupper():
                kept.insert(0, word)
            else:
                break
        if not kept:
            last = words[-1]
            if last.lower() not in _OT_STOPWORDS and last[0].islower():
                kept = [last]
        while kept and kept[0].lower() in _OT_STOPWORDS:
            kept.pop(0)
        if not kept:
            continue
        name = " ".join(kept) + " " + raw[token.start() : token.end()]
        anchor = re.search(
            rf"(?<![A-Za-z0-9]){re.escape(kept[0])}(?![A-Za-z0-9'\-])",
            before.group(1),
        )
        if anchor is None:
            continue
        start = before.start(1) + anchor.start()
        candidates.append((start, token.end(), name))
    return candidates


def _confidence_after(raw: str, end: int) -> float | None:
    match = _CONFIDENCE_RE.match(raw[end : end + 24])
    if match is None:
        return None
    value = float(match.group(1))
    if 0.0 <= value <= 100.0:
        return value
    return None


def parse_therapies(
    raw: str, tables: SynonymTables | None = None
) -> list[TherapyRecommendation]:
    """Extract therapy mentions with optional "NN%" confidences.

    Canonical names and uppercase abbreviations map to their codes; other
    "<Name> Therapy" phrases become OT with the written name preserved; a
    seek-professional-help response with no therapy named becomes one NT entry.
    """
    tables = tables or _default_tables()
    claimed: list[tuple[int, int]] = []
    mentions: list[tuple[int, TherapyCode, str, float | None]] = []

    def claim(start: int, end: int) -> bool:
        for s, e in claimed:
            if start < e and s < end:
                return False
        claimed.append((start, end))
        return True

    for pattern, code in tables._therapy_name_res:
        for m in pattern.finditer(raw):
            if claim(m.start(), m.end()):
                mentions.append(
                    (m.start(), code, m.group(0), _confidence_after(raw, m.end()))
                )
    for m in _ABBREV_RE.finditer(raw):
        if claim(m.start(), m.end()):
            code = TherapyCode(m.group(1))
            mentions.append((m.start(), code, m.group(0), _confidence_after(raw, m.end())))
    for start, end, name in _ot_candidates(raw):
        prefix = name.rsplit(" ", 1)[0].lower()
        code = TherapyCode.NT if prefix == "no" else TherapyCode.OT
        if claim(start, end):
            mentions.append((start, code, name, _confidence_after(raw, end)))

    mentions.sort(key=lambda item: item[0])
    out: list[TherapyRecommendation] = []
    position: dict[tuple[TherapyCode, str], int] = {}
    for _, code, name, pct in mentions:
        key = (code, name.lower() if code is TherapyCode.OT else "")
        if key in position:
            prior = out[position[key]]
            if prior.confidence_pct is None and pct is not None:
                out[position[key]] = TherapyRecommendation(
                    code=prior.code, name_as_written=prior.name_as_written, confidence_pct=pct
                )
            continue
        position[key] = len(out)
        out.append(TherapyRecommendation(code=code, name_as_written=name, confidence_pct=pct))
    if out:
        return out
    if tables._no_therapy_re is not None:
        m = tables._no_therapy_re.search(_normalize_response(raw))
        if m is not None:
            return [TherapyRecommendation(code=TherapyCode.NT, name_as_written=m.group(0))]
    return []


_LIST_ITEM_RE = re.compile(r"^\s*(?:\d+[.)]\s+|[-*•+]\s+)(.*\S)\s*$")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def parse_behavior(raw: str) -> list[str]:
    """Split a recommendation response into discrete suggestions.

    Numbered/bulleted items win; continuation lines join the current item;
    responses without list markers are sentence-split. Items are stored
    verbatim apart from marker and whitespace trimming.
    """
    items: list[str] = []
    in_list = False
    for line in raw.splitlines():
        m = _LIST_ITEM_RE.match(line)
        if m:
            items.append(m.group(1))
            in_list = True
        elif in_list and line.strip() and items:
            items[-1] = f"{items[-1]} {line.strip()}"
    if items:
        return items
    pieces = _SENTENCE_SPLIT_RE.split(raw.strip())
    return [p.strip() for p in pieces if p.strip() and any(c.isalnum() for c in p)]
