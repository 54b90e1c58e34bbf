"""Annotation orchestration: run annotators over a corpus, persist records,
and export per-annotator training sets.

Records persist as append-only NDJSON logs under
``records/<annotator>/<task>.ndjson``. Resume keys on (post_id, annotator,
task, prompt_version), so changing the prompt version forces re-annotation.
The store has a single-writer contract per run; readers may run concurrently
with no writer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Post
from .gateway import Backend, complete_batch
from .lexicon import DISORDERS, DisorderLabel, Lexicon, annotate_dictionary
from .tasks import (
    BinaryVerdict,
    SeverityLevel,
    TemplatePack,
    TherapyRecommendation,
    mentions_self_harm,
    parse_behavior,
    parse_binary,
    parse_disorders,
    parse_severity,
    parse_therapies,
    render,
)
from .util import DataError, ValidationError, dumps_compact, round_percent, write_json

#: Annotation tasks beyond the binary gate, in pipeline order.
ANNOTATION_TASKS = ("disorder", "severity", "therapy", "behavior")

_TASK_TEMPLATES = {
    "binary": "binary",
    "disorder": "disorder",
    "severity": "severity",
    "therapy": "recommend_therapy",
    "behavior": "recommend_behavior",
}


@dataclass(frozen=True)
class AnnotatorId:
    kind: str  # "dictionary" or "llm"
    name: str

    def __post_init__(self) -> None:
        if self.kind not in ("dictionary", "llm"):
            raise ValidationError(f"unknown annotator kind {self.kind!r}")


DICTIONARY_ANNOTATOR = AnnotatorId(kind="dictionary", name="dictionary")


@dataclass(frozen=True)
class AnnotationRecord:
    """Outcome of one (post, annotator, task) annotation."""

    post_id: str
    annotator: AnnotatorId
    task: str
    binary: BinaryVerdict | None = None
    labels: frozenset[DisorderLabel] | None = None
    severity: SeverityLevel | None = None
    therapies: tuple[TherapyRecommendation, ...] | None = None
    behaviors: tuple[str, ...] | None = None
    flagged_self_harm: bool = False
    raw_response: str | None = None
    latency_ms: int = 0
    prompt_version: str | None = None
    failed: bool = False

    def __post_init__(self) -> None:
        if self.labels is not None and DisorderLabel.NONE in self.labels:
            if len(self.labels) != 1:
                raise DataError(
                    f"record {self.post_id}: None must not combine with other labels"
                )

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "annotator_kind": self.annotator.kind,
            "annotator": self.annotator.name,
            "task": self.task,
            "binary": self.binary.value if self.binary else None,
            "labels": sorted(l.value for l in self.labels) if self.labels is not None else None,
            "severity": self.severity.value if self.severity else None,
            "therapies": [t.to_dict() for t in self.therapies] if self.therapies is not None else None,
            "behaviors": list(self.behaviors) if self.behaviors is not None else None,
            "flagged_self_harm": self.flagged_self_harm,
            "raw_response": self.raw_response,
            "latency_ms": self.latency_ms,
            "prompt_version": self.prompt_version,
            "failed": self.failed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AnnotationRecord":
        labels = obj.get("labels")
        therapies = obj.get("therapies")
        behaviors = obj.get("behaviors")
        return cls(
            post_id=str(obj["post_id"]),
            annotator=AnnotatorId(kind=str(obj["annotator_kind"]), name=str(obj["annotator"])),
            task=str(obj["task"]),
            binary=BinaryVerdict(obj["binary"]) if obj.get("binary") else None,
            labels=frozenset(DisorderLabel(l) for l in labels) if labels is not None else None,
            severity=SeverityLevel(obj["severity"]) if obj.get("severity") else None,
            therapies=tuple(TherapyRecommendation.from_dict(t) for t in therapies)
            if therapies is not None
            else None,
            behaviors=tuple(str(b) for b in behaviors) if behaviors is not None else None,
            flagged_self_harm=bool(obj.get("flagged_self_harm", False)),
            raw_response=obj.get("raw_response"),
            latency_ms=int(obj.get("latency_ms", 0)),
            prompt_version=obj.get("prompt_version"),
            failed=bool(obj.get("failed", False)),
        )


class RecordStore:
    """Append-only NDJSON record logs, one file per (annotator, task)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, annotator: AnnotatorId, task: str) -> Path:
        return self.root / annotator.name / f"{task}.ndjson"

    def load(self, annotator: AnnotatorId, task: str) -> list[AnnotationRecord]:
        path = self.path(annotator, task)
        if not path.exists():
            return []
        records = []
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(AnnotationRecord.from_dict(json.loads(line)))
                except (ValueError, KeyError) as exc:
                    raise DataError(f"{path}:{lineno}: bad record: {exc}") from exc
        return records

    def existing_keys(self, annotator: AnnotatorId, task: str) -> set[tuple[str, str]]:
        return {
            (record.post_id, record.prompt_version or "")
            for record in self.load(annotator, task)
        }

    def append(self, records: Iterable[AnnotationRecord]) -> int:
        """Append records grouped by (annotator, task); returns rows written."""
        grouped: dict[Path, list[AnnotationRecord]] = {}
        for record in records:
            grouped.setdefault(self.path(record.annotator, record.task), []).append(record)
        written = 0
        for path, group in grouped.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as fh:
                for record in group:
                    fh.write(dumps_compact(record.to_dict()))
                    fh.write("\n")
                    written += 1
        return written

    def compact(self, annotator: AnnotatorId, task: str) -> int:
        """Rewrite a log keeping the last record per resume key, sorted by post id."""
        records = self.load(annotator, task)
        if not records:
            return 0
        last: dict[tuple[str, str], AnnotationRecord] = {}
        for record in records:
            last[(record.post_id, record.prompt_version or "")] = record
        kept = sorted(last.values(), key=lambda r: r.post_id)
        path = self.path(annotator, task)
        tmp = path.with_suffix(".ndjson.tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            for record in kept:
                fh.write(dumps_compact(record.to_dict()))
                fh.write("\n")
        tmp.replace(path)
        return len(kept)

    def annotators(self) -> list[AnnotatorId]:
        """Discover annotators present in the store from directory layout."""
        found = []
        if not self.root.is_dir():
            return found
        for child in sorted(self.root.iterdir()):
            if child.is_dir():
                kind = "dictionary" if child.name == "dictionary" else "llm"
                found.append(AnnotatorId(kind=kind, name=child.name))
        return found


@dataclass
class VerdictDistribution:
    """Yes/No/Other counts with one-decimal percentages over all verdicts."""

    counts: dict[str, int]
    total: int

    @property
    def percents(self) -> dict[str, float]:
        return {
            category: round_percent(self.counts.get(category, 0), self.total)
            for category in ("Yes", "No", "Other")
        }

    def to_dict(self) -> dict:
        return {"counts": self.counts, "total": self.total, "percents": self.percents}


def _llm_annotate_task(
    posts: Sequence[Post],
    annotator: AnnotatorId,
    task: str,
    backend: Backend,
    pack: TemplatePack,
    store: RecordStore | None,
) -> list[AnnotationRecord]:
    existing = store.existing_keys(annotator, task) if store else set()
    by_id = {post.id: post for post in posts}
    pending = [
        post for post in posts if (post.id, pack.version) not in existing
    ]
    template = pack.template(_TASK_TEMPLATES[task])
    prompts = []
    for post in pending:
        rendered = render(template, post, pack.char_budget)
        prompts.append((post.id, rendered.system, rendered.user))
    fresh: list[AnnotationRecord] = []
    for post_id, result in complete_batch(backend, prompts):
        fresh.append(
            _record_from_completion(
                by_id[post_id], annotator, task, result.text, result.failed,
                result.latency_ms, pack,
            )
        )
    if store:
        if fresh:
            store.append(fresh)
        pool = [
            record
            for record in store.load(annotator, task)
            if record.post_id in by_id and (record.prompt_version or "") == pack.version
        ]
    else:
        pool = fresh
    merged = {record.post_id: record for record in pool}
    return sorted(merged.values(), key=lambda r: r.post_id)


def _record_from_completion(
    post: Post,
    annotator: AnnotatorId,
    task: str,
    text: str,
    failed: bool,
    latency_ms: int,
    pack: TemplatePack,
) -> AnnotationRecord:
    base = dict(
        post_id=post.id,
        annotator=annotator,
        task=task,
        raw_response=text,
        latency_ms=latency_ms,
        prompt_version=pack.version,
        failed=failed,
    )
    if failed:
        return AnnotationRecord(**base)
    if task == "binary":
        return AnnotationRecord(**base, binary=parse_binary(text))
    if task == "disorder":
        labels = parse_disorders(text, pack.tables)
        flagged = labels == frozenset({DisorderLabel.NONE}) and mentions_self_harm(
            text, pack.tables
        )
        return AnnotationRecord(**base, labels=labels, flagged_self_harm=flagged)
    if task == "severity":
        return AnnotationRecord(**base, severity=parse_severity(text))
    if task == "therapy":
        return AnnotationRecord(**base, therapies=tuple(parse_therapies(text, pack.tables)))
    if task == "behavior":
        return AnnotationRecord(**base, behaviors=tuple(parse_behavior(text)))
    raise ValidationError(f"unknown task {task!r}")


def run_binary_filter(
    posts: Sequence[Post],
    backend: Backend,
    pack: TemplatePack,
    store: RecordStore | None = None,
    annotator: AnnotatorId | None = None,
) -> tuple[dict[str, BinaryVerdict], VerdictDistribution]:
    """Assign every post exactly one relevance verdict; failures become Other.

    Downstream stages consume only the Yes posts unless gating is disabled.
    """
    annotator = annotator or AnnotatorId(kind="llm", name=backend.config.name)
    records = _llm_annotate_task(posts, annotator, "binary", backend, pack, store)
    verdicts: dict[str, BinaryVerdict] = {}
    counts = {"Yes": 0, "No": 0, "Other": 0}
    for record in records:
        verdict = record.binary if record.binary is not None else BinaryVerdict.OTHER
        verdicts[record.post_id] = verdict
        counts[verdict.value] += 1
    return verdicts, VerdictDistribution(counts=counts, total=len(records))


def run_annotator(
    posts: Sequence[Post],
    annotator: AnnotatorId,
    tasks: Sequence[str],
    *,
    store: RecordStore | None = None,
    pack: TemplatePack | None = None,
    lexicon: Lexicon | None = None,
    backend: Backend | None = None,
) -> list[AnnotationRecord]:
    """Produce one record per (post, task), resuming from the store.

    The dictionary annotator only accepts the disorder task and needs a
    lexicon; LLM annotators need a backend and template pack.
    """
    tasks = list(tasks)
    unknown = [t for t in tasks if t not in ANNOTATION_TASKS]
    if unknown:
        raise ValidationError(f"unknown annotation tasks: {', '.join(unknown)}")
    records: list[AnnotationRecord] = []
    if annotator.kind == "dictionary":
        if set(tasks) - {"disorder"}:
            raise ValidationError("dictionary annotator only supports the disorder task")
        if lexicon is None:
            raise ValidationError("dictionary annotator requires a lexicon")
        existing = store.existing_keys(annotator, "disorder") if store else set()
        fresh = []
        for post in posts:
            if (post.id, "") in existing:
                continue
            result = annotate_dictionary(post, lexicon)
            fresh.append(
                AnnotationRecord(
                    post_id=post.id,
                    annotator=annotator,
                    task="disorder",
                    labels=result.labels,
                )
            )
        if store:
            if fresh:
                store.append(fresh)
            wanted = {post.id for post in posts}
            records = [r for r in store.load(annotator, "disorder") if r.post_id in wanted]
        else:
            records = fresh
        return sorted({r.post_id: r for r in records}.values(), key=lambda r: r.post_id)

    if backend is None or pack is None:
        raise ValidationError("llm annotator requires a backend and a template pack")
    for task in tasks:
        records.extend(_llm_annotate_task(posts, annotator, task, backend, pack, store))
    records.sort(key=lambda r: (r.task, r.post_id))
    return records


@dataclass(frozen=True)
class TrainingExample:
    """One exported multi-label example; the vector is ordered
    (ADHD, Autism, Anxiety, Bipolar, Depression, EatingDisorder, OCD, PTSD,
    Schizophrenia) and always has at least one bit set."""

    post_id: str
    text: str
    label_vector: tuple[int, ...]

    @property
    def labels(self) -> list[str]:
        return [d.value for d, bit in zip(DISORDERS, self.label_vector) if bit]


@dataclass
class ExportStats:
    total_records: int = 0
    exported: int = 0
    none_excluded: int = 0
    failed_excluded: int = 0
    per_label: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_records": self.total_records,
            "exported": self.exported,
            "none_excluded": self.none_excluded,
            "failed_excluded": self.failed_excluded,
            "per_label": dict(sorted(self.per_label.items())),
        }


def export_training_set(
    records: Sequence[AnnotationRecord], posts: Mapping[str, Post] | Sequence[Post]
) -> tuple[list[TrainingExample], ExportStats]:
    """Turn disorder records into training examples, excluding None-labeled posts.

    A record whose post is missing from the corpus is an integrity error.
    Records without labels (failed completions) are excluded and counted.
    """
    if not isinstance(posts, Mapping):
        posts = {post.id: post for post in posts}
    stats = ExportStats(per_label={d.value: 0 for d in DISORDERS})
    examples: list[TrainingExample] = []
    for record in records:
        stats.total_records += 1
        if record.labels is None:
            stats.failed_excluded += 1
            continue
        post = posts.get(record.post_id)
        if post is None:
            raise DataError(
                f"record references post {record.post_id!r} missing from corpus"
            )
        if record.labels == frozenset({DisorderLabel.NONE}):
            stats.none_excluded += 1
            continue
        vector = tuple(1 if d in record.labels else 0 for d in DISORDERS)
        for d in record.labels:
            stats.per_label[d.value] += 1
        examples.append(
            TrainingExample(post_id=record.post_id, text=post.text, label_vector=vector)
        )
        stats.exported += 1
    examples.sort(key=lambda e: e.post_id)
    return examples, stats


def write_training_export(
    examples: Sequence[TrainingExample], stats: ExportStats, out_dir: str | Path
) -> tuple[Path, Path]:
    """Write training.ndjson plus a stats sidecar; byte-stable given same inputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "training.ndjson"
    with data_path.open("w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(
                dumps_compact(
                    {
                        "post_id": example.post_id,
                        "text": example.text,
                        "labels": example.labels,
                    }
                )
            )
            fh.write("\n")
    stats_path = out_dir / "stats.json"
    write_json(stats_path, stats.to_dict())
    return data_path, stats_path
