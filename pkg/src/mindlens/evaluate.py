"""Deterministic k-fold splitting, multi-label metrics, and model comparison.

Micro metrics pool true/false positives over all (example, label) pairs;
macro metrics average per-label scores, skipping labels with zero gold
support (the skip count is reported). Subset accuracy is the fraction of
exact set matches and is what comparison tables display as validation
accuracy; the headline precision/recall/F1 columns are micro-averaged.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .lexicon import DISORDERS, DisorderLabel
from .util import DataError, MindlensError, ValidationError, read_ndjson, write_json

#: Canonical label-name order for vectors and per-label tables.
LABEL_ORDER: tuple[str, ...] = tuple(d.value for d in DISORDERS)
_LABEL_SET = frozenset(LABEL_ORDER)


@dataclass(frozen=True)
class FoldAssignment:
    """Partition of post ids into k folds whose sizes differ by at most one."""

    k: int
    seed: int | None
    assignment: dict  # post_id -> fold index

    def fold_ids(self, fold: int) -> list[str]:
        return sorted(pid for pid, f in self.assignment.items() if f == fold)

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for fold in self.assignment.values():
            counts[fold] += 1
        return counts


def make_folds(post_ids: Iterable[str], k: int, seed: int) -> FoldAssignment:
    """Deterministic k-fold partition of the id set.

    Ids are sorted, shuffled with MT19937 seeded by `seed`, and dealt
    round-robin, so the result depends only on the id multiset, k, and seed.
    """
    ids = list(post_ids)
    unique = sorted(set(ids))
    if len(unique) != len(ids):
        raise DataError("make_folds: duplicate post ids")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if len(unique) < k:
        raise MindlensError(
            f"cannot split {len(unique)} ids into {k} folds"
        )
    rng = random.Random(seed)
    rng.shuffle(unique)
    assignment = {pid: i % k for i, pid in enumerate(unique)}
    return FoldAssignment(k=k, seed=seed, assignment=assignment)


def write_folds_csv(folds: FoldAssignment, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["post_id", "fold"])
        for pid in sorted(folds.assignment):
            writer.writerow([pid, folds.assignment[pid]])


def read_folds_csv(path: str | Path) -> FoldAssignment:
    path = Path(path)
    assignment: dict[str, int] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["post_id", "fold"]:
            raise DataError(f"{path}: expected header post_id,fold")
        for row in reader:
            if len(row) != 2:
                raise DataError(f"{path}: bad row {row!r}")
            if row[0] in assignment:
                raise DataError(f"{path}: duplicate post id {row[0]!r}")
            assignment[row[0]] = int(row[1])
    if not assignment:
        raise DataError(f"{path}: no fold rows")
    return FoldAssignment(k=max(assignment.values()) + 1, seed=None, assignment=assignment)


@dataclass(frozen=True)
class LabelMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    subset_accuracy: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_label: dict  # label name -> LabelMetrics
    n_examples: int
    macro_labels_skipped: int = 0

    SCALAR_FIELDS = (
        "subset_accuracy",
        "micro_precision",
        "micro_recall",
        "micro_f1",
        "macro_precision",
        "macro_recall",
        "macro_f1",
    )

    def to_dict(self) -> dict:
        return {
            **{name: getattr(self, name) for name in self.SCALAR_FIELDS},
            "per_label": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_label.items()
            },
            "n_examples": self.n_examples,
            "macro_labels_skipped": self.macro_labels_skipped,
        }


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def _f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def _normalize_label_set(labels: Iterable[str], *, role: str) -> frozenset[str]:
    out = set()
    for label in labels:
        name = label.value if isinstance(label, DisorderLabel) else str(label)
        if name == DisorderLabel.NONE.value:
            continue
        if name not in _LABEL_SET:
            raise DataError(f"unknown {role} label {name!r}")
        out.add(name)
    return frozenset(out)


def score(
    gold: Sequence[Iterable[str]],
    pred: Sequence[Iterable[str]],
    labels: Sequence[str] = LABEL_ORDER,
) -> MetricsReport:
    """Multi-label metrics over positionally aligned gold/pred label sets.

    Gold sets must not be {None}; the caller excludes those beforehand.
    A predicted {None} is normalized to the empty set and counts as
    predicting nothing.
    """
    if len(gold) != len(pred):
        raise DataError(f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    gold_sets = []
    for g in gold:
        gs = _normalize_label_set(g, role="gold")
        raw = {l.value if isinstance(l, DisorderLabel) else str(l) for l in g}
        if not gs and DisorderLabel.NONE.value in raw:
            raise DataError("gold label sets must not be {None}; exclude them first")
        gold_sets.append(gs)
    pred_sets = [_normalize_label_set(p, role="predicted") for p in pred]

    tp = {label: 0 for label in labels}
    fp = {label: 0 for label in labels}
    fn = {label: 0 for label in labels}
    exact = 0
    for gs, ps in zip(gold_sets, pred_sets):
        if gs == ps:
            exact += 1
        for label in labels:
            in_gold = label in gs
            in_pred = label in ps
            if in_gold and in_pred:
                tp[label] += 1
            elif in_pred:
                fp[label] += 1
            elif in_gold:
                fn[label] += 1

    per_label: dict[str, LabelMetrics] = {}
    macro_terms: list[LabelMetrics] = []
    skipped = 0
    for label in labels:
        precision = _ratio(tp[label], tp[label] + fp[label])
        recall = _ratio(tp[label], tp[label] + fn[label])
        metrics = LabelMetrics(
            precision=precision,
            recall=recall,
            f1=_f1(precision, recall),
            support=tp[label] + fn[label],
        )
        per_label[label] = metrics
        if metrics.support > 0:
            macro_terms.append(metrics)
        else:
            skipped += 1

    micro_tp = sum(tp.values())
    micro_fp = sum(fp.values())
    micro_fn = sum(fn.values())
    micro_precision = _ratio(micro_tp, micro_tp + micro_fp)
    micro_recall = _ratio(micro_tp, micro_tp + micro_fn)
    return MetricsReport(
        subset_accuracy=_ratio(exact, len(gold_sets)) if gold_sets else 0.0,
        micro_precision=micro_precision,
        micro_recall=micro_recall,
        micro_f1=_f1(micro_precision, micro_recall),
        macro_precision=(
            statistics.fmean(m.precision for m in macro_terms) if macro_terms else 0.0
        ),
        macro_recall=(
            statistics.fmean(m.recall for m in macro_terms) if macro_terms else 0.0
        ),
        macro_f1=statistics.fmean(m.f1 for m in macro_terms) if macro_terms else 0.0,
        per_label=per_label,
        n_examples=len(gold_sets),
        macro_labels_skipped=skipped,
    )


def aggregate_folds(
    per_fold: Sequence[MetricsReport],
) -> tuple[MetricsReport, dict[str, float]]:
    """Unweighted mean report plus the sample standard deviation per metric."""
    if not per_fold:
        raise ValidationError("aggregate_folds requires at least one fold report")

    def mean(values: list[float]) -> float:
        return statistics.fmean(values)

    def spread(values: list[float]) -> float:
        return statistics.stdev(values) if len(values) > 1 else 0.0

    scalars = {
        name: [getattr(report, name) for report in per_fold]
        for name in MetricsReport.SCALAR_FIELDS
    }
    labels = sorted({label for report in per_fold for label in report.per_label})
    per_label = {}
    for label in labels:
        entries = [r.per_label[label] for r in per_fold if label in r.per_label]
        per_label[label] = LabelMetrics(
            precision=mean([e.precision for e in entries]),
            recall=mean([e.recall for e in entries]),
            f1=mean([e.f1 for e in entries]),
            support=sum(e.support for e in entries),
        )
    mean_report = MetricsReport(
        **{name: mean(values) for name, values in scalars.items()},
        per_label=per_label,
        n_examples=sum(r.n_examples for r in per_fold),
        macro_labels_skipped=max(r.macro_labels_skipped for r in per_fold),
    )
    stddev = {name: spread(values) for name, values in scalars.items()}
    return mean_report, stddev


# ---------------------------------------------------------------------------
# Comparison tables (prediction exchange format)
# ---------------------------------------------------------------------------


def read_gold_labels(path: str | Path) -> dict[str, frozenset[str]]:
    """Read a training-export NDJSON file into post_id -> gold label set."""
    gold: dict[str, frozenset[str]] = {}
    for obj in read_ndjson(path):
        pid = str(obj["post_id"])
        if pid in gold:
            raise DataError(f"{path}: duplicate post id {pid!r}")
        gold[pid] = _normalize_label_set(obj.get("labels", []), role="gold")
    return gold


@dataclass(frozen=True)
class PredictionRow:
    post_id: str
    fold: int
    labels: frozenset[str]
    none_predicted: bool


def read_predictions(path: str | Path) -> list[PredictionRow]:
    """Read prediction NDJSON rows {post_id, fold, labels[, scores]}.

    Unknown labels are fatal; a {None} prediction is kept as an explicit
    empty set and counted by callers.
    """
    rows: list[PredictionRow] = []
    seen: set[str] = set()
    for obj in read_ndjson(path):
        pid = str(obj["post_id"])
        if pid in seen:
            raise DataError(f"{path}: duplicate prediction for post {pid!r}")
        seen.add(pid)
        raw_labels = [str(l) for l in obj.get("labels", [])]
        rows.append(
            PredictionRow(
                post_id=pid,
                fold=int(obj.get("fold", 0)),
                labels=_normalize_label_set(raw_labels, role="predicted"),
                none_predicted=raw_labels == [DisorderLabel.NONE.value],
            )
        )
    return rows


@dataclass(frozen=True)
class ComparisonEntry:
    """Inputs for one (annotator, model) comparison row."""

    annotator: str
    model: str
    gold_path: Path
    predictions_path: Path
    train_report_path: Path | None = None


@dataclass(frozen=True)
class ComparisonRow:
    annotator: str
    model: str
    train_accuracy_pct: float | None
    val_accuracy_pct: float
    precision: float
    recall: float
    f1: float
    folds: int
    none_predicted: int

    def to_dict(self) -> dict:
        return {
            "annotator": self.annotator,
            "model": self.model,
            "train_accuracy_pct": self.train_accuracy_pct,
            "val_accuracy_pct": self.val_accuracy_pct,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "folds": self.folds,
            "none_predicted": self.none_predicted,
        }


@dataclass
class ComparisonTable:
    """Rows keyed by (annotator, model); precision/recall/f1 are micro-averaged."""

    rows: list

    def to_json_dict(self) -> dict:
        return {
            "averaging": "micro",
            "validation_accuracy": "subset accuracy on held-out folds",
            "rows": [row.to_dict() for row in self.rows],
        }

    def write(self, out_dir: str | Path, stem: str = "comparison") -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{stem}.csv"
        with csv_path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                [
                    "annotator",
                    "model",
                    "train_accuracy_pct",
                    "val_accuracy_pct",
                    "precision",
                    "recall",
                    "f1",
                ]
            )
            for row in self.rows:
                writer.writerow(
                    [
                        row.annotator,
                        row.model,
                        "" if row.train_accuracy_pct is None else f"{row.train_accuracy_pct:.2f}",
                        f"{row.val_accuracy_pct:.2f}",
                        f"{row.precision:.4f}",
                        f"{row.recall:.4f}",
                        f"{row.f1:.4f}",
                    ]
                )
        json_path = out_dir / f"{stem}.json"
        write_json(json_path, self.to_json_dict())
        return csv_path, json_path


def _train_accuracy_pct(path: Path) -> float | None:
    obj = json.loads(path.read_text(encoding="utf-8"))
    folds = obj.get("folds", [])
    values = [f["train_subset_accuracy"] for f in folds if "train_subset_accuracy" in f]
    if not values:
        return None
    return statistics.fmean(values) * 100.0


def build_comparison(entries: Sequence[ComparisonEntry]) -> ComparisonTable:
    """One row per (annotator, model): fold-averaged validation metrics plus
    the trainer's self-reported training accuracy when available."""
    rows = []
    for entry in entries:
        gold = read_gold_labels(entry.gold_path)
        predictions = read_predictions(entry.predictions_path)
        by_fold: dict[int, list[PredictionRow]] = {}
        for row in predictions:
            if row.post_id not in gold:
                raise DataError(
                    f"{entry.predictions_path}: prediction for post "
                    f"{row.post_id!r} missing from gold file"
                )
            by_fold.setdefault(row.fold, []).append(row)
        if not by_fold:
            raise DataError(f"{entry.predictions_path}: no prediction rows")
        reports = []
        for fold in sorted(by_fold):
            fold_rows = by_fold[fold]
            reports.append(
                score(
                    [gold[r.post_id] for r in fold_rows],
                    [r.labels for r in fold_rows],
                )
            )
        mean_report, _ = aggregate_folds(reports)
        train_pct = (
            _train_accuracy_pct(entry.train_report_path)
            if entry.train_report_path is not None
            else None
        )
        rows.append(
            ComparisonRow(
                annotator=entry.annotator,
                model=entry.model,
                train_accuracy_pct=train_pct,
                val_accuracy_pct=mean_report.subset_accuracy * 100.0,
                precision=mean_report.micro_precision,
                recall=mean_report.micro_recall,
                f1=mean_report.micro_f1,
                folds=len(reports),
                none_predicted=sum(1 for r in predictions if r.none_predicted),
            )
        )
    rows.sort(key=lambda r: (r.annotator, r.model))
    return ComparisonTable(rows=rows)
