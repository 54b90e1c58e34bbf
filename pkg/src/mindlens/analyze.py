"""Descriptive analytics over annotation records: verdict and severity
distributions, label frequencies, per-post label-count histograms, and
disorder-to-therapy co-occurrence maps, emitted as plot-ready CSV + JSON.

emit_reports is deterministic: identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .annotate import AnnotationRecord
from .lexicon import DISORDERS, DisorderLabel
from .util import MindlensError, ValidationError, round_percent, write_json

_BINARY_CATEGORIES = ("Yes", "No", "Other")
_SEVERITY_CATEGORIES = ("Mild", "Moderate", "Severe")
_LABEL_CATEGORIES = tuple(d.value for d in DISORDERS) + (DisorderLabel.NONE.value,)


@dataclass
class DistributionReport:
    """Per-annotator category counts with one-decimal percentages.

    Percentages are computed over the included categories, which sum to
    100 +/- 0.1 after rounding; excluded categories (unparseable/failed) are
    disclosed as bare counts.
    """

    task: str
    per_annotator: dict  # annotator -> {category: (count, percent)}
    excluded: dict  # annotator -> {category: count}

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "per_annotator": {
                annotator: {
                    category: {"count": count, "percent": percent}
                    for category, (count, percent) in categories.items()
                }
                for annotator, categories in self.per_annotator.items()
            },
            "excluded": self.excluded,
        }


def distribution(records: Iterable[AnnotationRecord], task: str) -> DistributionReport:
    """Category counts and percents per annotator for the binary or severity task.

    Binary includes Other in the percentage base (as reported); severity
    keeps the three levels in the base and discloses Other separately.
    """
    if task == "binary":
        included, excluded_categories = _BINARY_CATEGORIES, ()
    elif task == "severity":
        included, excluded_categories = _SEVERITY_CATEGORIES, ("Other",)
    else:
        raise ValidationError(f"distribution supports binary/severity, got {task!r}")

    counts: dict[str, dict[str, int]] = {}
    excluded: dict[str, dict[str, int]] = {}
    for record in records:
        if record.task != task:
            continue
        annotator = record.annotator.name
        counts.setdefault(annotator, {c: 0 for c in included})
        excluded.setdefault(annotator, {c: 0 for c in excluded_categories})
        if task == "binary":
            category = record.binary.value if record.binary else "Other"
        else:
            category = record.severity.value if record.severity else "Other"
        if category in counts[annotator]:
            counts[annotator][category] += 1
        else:
            excluded[annotator][category] = excluded[annotator].get(category, 0) + 1

    per_annotator = {}
    for annotator, categories in counts.items():
        base = sum(categories.values())
        per_annotator[annotator] = {
            category: (count, round_percent(count, base))
            for category, count in categories.items()
        }
    return DistributionReport(task=task, per_annotator=per_annotator, excluded=excluded)


@dataclass
class LabelStats:
    """Label frequencies and per-post label-count histograms per annotator.

    With per-occurrence normalization each row sums to 1; the per-post basis
    divides by the number of posts instead (rows then need not sum to 1).
    A {None} post contributes histogram bucket 0 unless none_as_label is set.
    """

    normalized_counts: dict  # annotator -> {label: fraction}
    labels_per_post_hist: dict  # annotator -> {int: count}
    occurrences: dict  # annotator -> {label: count}
    posts: dict  # annotator -> posts with labels
    skipped: dict  # annotator -> records without labels (failed calls)
    norm: str = "per-occurrence"
    none_as_label: bool = False

    def to_dict(self) -> dict:
        return {
            "normalized_counts": self.normalized_counts,
            "labels_per_post_hist": {
                annotator: {str(k): v for k, v in hist.items()}
                for annotator, hist in self.labels_per_post_hist.items()
            },
            "occurrences": self.occurrences,
            "posts": self.posts,
            "skipped": self.skipped,
            "norm": self.norm,
            "none_as_label": self.none_as_label,
        }


def label_stats(
    records: Iterable[AnnotationRecord],
    *,
    none_as_label: bool = False,
    norm: str = "per-occurrence",
) -> LabelStats:
    if norm not in ("per-occurrence", "per-post"):
        raise ValidationError(f"norm must be per-occurrence or per-post, got {norm!r}")
    occurrences: dict[str, dict[str, int]] = {}
    hist: dict[str, dict[int, int]] = {}
    posts: dict[str, int] = {}
    skipped: dict[str, int] = {}
    for record in records:
        if record.task != "disorder":
            continue
        annotator = record.annotator.name
        occurrences.setdefault(annotator, {c: 0 for c in _LABEL_CATEGORIES})
        hist.setdefault(annotator, {})
        posts.setdefault(annotator, 0)
        skipped.setdefault(annotator, 0)
        if record.labels is None:
            skipped[annotator] += 1
            continue
        posts[annotator] += 1
        for label in record.labels:
            occurrences[annotator][label.value] += 1
        if record.labels == frozenset({DisorderLabel.NONE}):
            bucket = 1 if none_as_label else 0
        else:
            bucket = len(record.labels)
        hist[annotator][bucket] = hist[annotator].get(bucket, 0) + 1

    normalized: dict[str, dict[str, float]] = {}
    for annotator, row in occurrences.items():
        denominator = (
            posts[annotator] if norm == "per-post" else sum(row.values())
        )
        normalized[annotator] = {
            label: (count / denominator if denominator else 0.0)
            for label, count in row.items()
        }
    return LabelStats(
        normalized_counts=normalized,
        labels_per_post_hist=hist,
        occurrences=occurrences,
        posts=posts,
        skipped=skipped,
        norm=norm,
        none_as_label=none_as_label,
    )


@dataclass
class TherapyMap:
    """Co-occurrence of disorder labels and recommended therapies per post."""

    counts: dict  # disorder name -> {therapy code: count}
    matched_posts: int = 0
    skipped_unmatched: int = 0

    def total_cells(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values())

    def to_dict(self) -> dict:
        return {
            "counts": self.counts,
            "matched_posts": self.matched_posts,
            "skipped_unmatched": self.skipped_unmatched,
        }


def therapy_map(
    disorder_records: Iterable[AnnotationRecord],
    therapy_records: Iterable[AnnotationRecord],
) -> TherapyMap:
    """Increment one cell per (disorder in labels) x (therapy recommended) pair.

    Both record sets must come from the same annotator, keyed by post id;
    posts present in only one set (or whose record failed) are skipped and
    counted.
    """
    disorders_by_post = {
        record.post_id: record
        for record in disorder_records
        if record.task == "disorder"
    }
    therapies_by_post = {
        record.post_id: record
        for record in therapy_records
        if record.task == "therapy"
    }
    counts: dict[str, dict[str, int]] = {}
    matched = 0
    skipped = 0
    all_ids = set(disorders_by_post) | set(therapies_by_post)
    for post_id in sorted(all_ids):
        disorder_record = disorders_by_post.get(post_id)
        therapy_record = therapies_by_post.get(post_id)
        if (
            disorder_record is None
            or therapy_record is None
            or disorder_record.labels is None
            or therapy_record.therapies is None
        ):
            skipped += 1
            continue
        matched += 1
        for label in disorder_record.labels:
            for recommendation in therapy_record.therapies:
                row = counts.setdefault(label.value, {})
                code = recommendation.code.value
                row[code] = row.get(code, 0) + 1
    return TherapyMap(counts=counts, matched_posts=matched, skipped_unmatched=skipped)


# ---------------------------------------------------------------------------
# Report bundle
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fraction(value: float) -> str:
    return format(value, ".10g")


def emit_reports(
    out_dir: str | Path,
    *,
    binary: DistributionReport | None = None,
    severity: DistributionReport | None = None,
    labels: LabelStats | None = None,
    therapy_maps: Mapping[str, TherapyMap] | None = None,
) -> list[Path]:
    """Write every provided analytic as a CSV + JSON pair with stable names."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise MindlensError(f"cannot create report directory {out_dir}: {exc}") from exc
    written: list[Path] = []

    def emit_distribution(report: DistributionReport, stem: str) -> None:
        rows = []
        for annotator in sorted(report.per_annotator):
            for category, (count, percent) in report.per_annotator[annotator].items():
                rows.append([annotator, category, count, f"{percent:.1f}"])
            for category, count in sorted(report.excluded.get(annotator, {}).items()):
                rows.append([annotator, category, count, ""])
        csv_path = out_dir / f"{stem}.csv"
        _write_csv(csv_path, ["annotator", "category", "count", "percent"], rows)
        json_path = out_dir / f"{stem}.json"
        write_json(json_path, report.to_dict())
        written.extend([csv_path, json_path])

    if binary is not None:
        emit_distribution(binary, "table1_binary")
    if severity is not None:
        emit_distribution(severity, "table4_severity")

    if labels is not None:
        rows = [
            [annotator, label, _fraction(labels.normalized_counts[annotator][label])]
            for annotator in sorted(labels.normalized_counts)
            for label in _LABEL_CATEGORIES
        ]
        csv_path = out_dir / "fig3_condition_counts.csv"
        _write_csv(csv_path, ["annotator", "label", "fraction"], rows)
        json_path = out_dir / "fig3_condition_counts.json"
        write_json(json_path, labels.to_dict())
        written.extend([csv_path, json_path])

        hist_rows = [
            [annotator, bucket, labels.labels_per_post_hist[annotator][bucket]]
            for annotator in sorted(labels.labels_per_post_hist)
            for bucket in sorted(labels.labels_per_post_hist[annotator])
        ]
        csv_path = out_dir / "fig4_label_counts.csv"
        _write_csv(csv_path, ["annotator", "label_count", "posts"], hist_rows)
        json_path = out_dir / "fig4_label_counts.json"
        write_json(
            json_path,
            {
                annotator: {str(k): v for k, v in hist.items()}
                for annotator, hist in labels.labels_per_post_hist.items()
            },
        )
        written.extend([csv_path, json_path])

    if therapy_maps is not None:
        rows = []
        for annotator in sorted(therapy_maps):
            tmap = therapy_maps[annotator]
            for disorder in sorted(tmap.counts):
                for code in sorted(tmap.counts[disorder]):
                    rows.append([annotator, disorder, code, tmap.counts[disorder][code]])
        csv_path = out_dir / "therapy_map.csv"
        _write_csv(csv_path, ["annotator", "disorder", "therapy", "count"], rows)
        json_path = out_dir / "therapy_map.json"
        write_json(
            json_path,
            {annotator: therapy_maps[annotator].to_dict() for annotator in therapy_maps},
        )
        written.extend([csv_path, json_path])

    return written
