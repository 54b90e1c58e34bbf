import random

import pytest

from mindlens.evaluate import (
    LABEL_ORDER,
    ComparisonEntry,
    aggregate_folds,
    build_comparison,
    make_folds,
    read_folds_csv,
    score,
    write_folds_csv,
)
from mindlens.util import DataError, MindlensError
from .oracles import brute_force_metrics

A, B, C = "ADHD", "Anxiety", "Depression"


class TestMakeFolds:
    def test_ten_ids_five_folds(self):
        folds = make_folds([f"p{i}" for i in range(10)], k=5, seed=1)
        assert sorted(folds.sizes()) == [2, 2, 2, 2, 2]

    def test_deterministic(self):
        ids = [f"p{i}" for i in range(37)]
        assert make_folds(ids, 5, 9).assignment == make_folds(ids, 5, 9).assignment

    def test_pigeonhole_5003(self):
        folds = make_folds([f"p{i:05d}" for i in range(5003)], k=5, seed=3)
        assert sorted(folds.sizes()) == [1000, 1000, 1001, 1001, 1001]

    def test_too_few_ids_fatal(self):
        with pytest.raises(MindlensError):
            make_folds(["a", "b"], k=3, seed=0)

    def test_permutation_invariant(self):
        ids = [f"p{i}" for i in range(40)]
        shuffled = list(ids)
        random.Random(8).shuffle(shuffled)
        assert make_folds(ids, 4, 11).assignment == make_folds(shuffled, 4, 11).assignment

    def test_duplicate_ids_fatal(self):
        with pytest.raises(DataError):
            make_folds(["a", "a", "b"], k=2, seed=0)

    def test_fifty_random_configurations(self):
        # partition, disjointness, size spread <= 1, determinism
        rng = random.Random(123)
        for _ in range(50):
            k = rng.randint(2, 10)
            n = rng.randint(k, 10_000)
            seed = rng.randint(0, 2**31)
            ids = [f"id{i:05d}" for i in range(n)]
            folds = make_folds(ids, k, seed)
            assert set(folds.assignment) == set(ids)
            sizes = folds.sizes()
            assert sum(sizes) == n
            assert max(sizes) - min(sizes) <= 1
            assert folds.assignment == make_folds(ids, k, seed).assignment

    def test_csv_roundtrip(self, tmp_path):
        folds = make_folds([f"p{i}" for i in range(12)], k=3, seed=5)
        path = tmp_path / "folds.csv"
        write_folds_csv(folds, path)
        loaded = read_folds_csv(path)
        assert loaded.assignment == folds.assignment
        assert loaded.k == folds.k


def random_label_sets(rng, n):
    out = []
    for _ in range(n):
        size = rng.randint(0, 4)
        out.append(set(rng.sample(LABEL_ORDER, size)))
    return out


class TestScore:
    def test_identity(self):
        report = score([{A}], [{A}])
        assert report.subset_accuracy == 1.0
        assert report.micro_precision == report.micro_recall == report.micro_f1 == 1.0

    def test_hand_enumerated_fixture(self):
        # gold [{A},{A,B}], pred [{A,B},{A}]: TP=2, FP=1, FN=1
        report = score([{A}, {A, B}], [{A, B}, {A}])
        assert report.micro_precision == pytest.approx(2 / 3, abs=0)
        assert report.micro_recall == pytest.approx(2 / 3, abs=0)
        assert report.micro_f1 == pytest.approx(2 / 3, abs=0)
        assert report.subset_accuracy == 0.0

    def test_two_hundred_random_instances_match_oracle(self):
        rng = random.Random(777)
        for _ in range(200):
            n = rng.randint(1, 30)
            gold = [s or {rng.choice(LABEL_ORDER)} for s in random_label_sets(rng, n)]
            pred = random_label_sets(rng, n)
            report = score(gold, pred)
            want = brute_force_metrics(gold, pred, LABEL_ORDER)
            for name in (
                "subset_accuracy", "micro_precision", "micro_recall", "micro_f1",
                "macro_precision", "macro_recall", "macro_f1",
            ):
                assert abs(getattr(report, name) - want[name]) <= 1e-12, name

    def test_length_mismatch_fatal(self):
        with pytest.raises(DataError):
            score([{A}], [{A}, {B}])

    def test_gold_none_fatal(self):
        with pytest.raises(DataError):
            score([{"None"}], [{A}])

    def test_pred_none_normalized_to_empty(self):
        report = score([{A}], [{"None"}])
        assert report.micro_recall == 0.0
        assert report.per_label[A].support == 1

    def test_unknown_label_fatal(self):
        with pytest.raises(DataError):
            score([{A}], [{"Burnout"}])

    def test_perfect_iff_equal(self):
        rng = random.Random(5)
        gold = [s or {A} for s in random_label_sets(rng, 25)]
        assert score(gold, [set(g) for g in gold]).micro_f1 == 1.0
        broken = [set(g) for g in gold]
        broken[0] = set(broken[0]) ^ {B}
        assert score(gold, broken).micro_f1 < 1.0

    def test_adding_correct_pair_never_decreases_recall(self):
        rng = random.Random(21)
        for _ in range(50):
            gold = [s or {rng.choice(LABEL_ORDER)} for s in random_label_sets(rng, 10)]
            pred = random_label_sets(rng, 10)
            base = score(gold, pred).micro_recall
            i = rng.randrange(10)
            missing = gold[i] - pred[i]
            if not missing:
                continue
            improved = [set(p) for p in pred]
            improved[i].add(next(iter(missing)))
            assert score(gold, improved).micro_recall >= base

    def test_relabeling_invariance(self):
        rng = random.Random(13)
        gold = [s or {A} for s in random_label_sets(rng, 40)]
        pred = random_label_sets(rng, 40)
        permuted = dict(zip(LABEL_ORDER, rng.sample(LABEL_ORDER, len(LABEL_ORDER))))
        gold_p = [{permuted[l] for l in s} for s in gold]
        pred_p = [{permuted[l] for l in s} for s in pred]
        original = score(gold, pred)
        renamed = score(gold_p, pred_p)
        assert renamed.micro_f1 == pytest.approx(original.micro_f1, abs=1e-15)
        assert renamed.subset_accuracy == original.subset_accuracy
        for label in LABEL_ORDER:
            assert renamed.per_label[permuted[label]] == original.per_label[label]

    def test_zero_support_labels_skipped_in_macro(self):
        report = score([{A}], [{A}])
        assert report.macro_labels_skipped == len(LABEL_ORDER) - 1
        assert report.macro_f1 == 1.0


class TestAggregateFolds:
    def test_identical_reports(self):
        report = score([{A}, {B}], [{A}, {B}])
        mean, std = aggregate_folds([report] * 5)
        assert mean.micro_f1 == report.micro_f1
        assert all(v == 0.0 for v in std.values())

    def test_simple_mean(self):
        r1 = score([{A}], [{A}])          # micro_f1 = 1.0
        r2 = score([{A}, {B}], [{A}, set()])  # micro 2/3-ish
        mean, _ = aggregate_folds([r1, r2])
        assert mean.micro_f1 == pytest.approx((r1.micro_f1 + r2.micro_f1) / 2)

    def test_matches_direct_recomputation(self):
        rng = random.Random(31)
        reports = []
        for _ in range(5):
            n = rng.randint(2, 20)
            gold = [s or {rng.choice(LABEL_ORDER)} for s in random_label_sets(rng, n)]
            pred = random_label_sets(rng, n)
            reports.append(score(gold, pred))
        mean, std = aggregate_folds(reports)
        import statistics

        for name in ("subset_accuracy", "micro_f1", "macro_recall"):
            values = [getattr(r, name) for r in reports]
            assert getattr(mean, name) == pytest.approx(statistics.fmean(values))
            assert std[name] == pytest.approx(statistics.stdev(values))

    def test_requires_at_least_one(self):
        from mindlens.util import ValidationError

        with pytest.raises(ValidationError):
            aggregate_folds([])


class TestBuildComparison:
    def test_fixture_hits_8625(self, fixtures_dir):
        table = build_comparison(
            [
                ComparisonEntry(
                    annotator="dictionary",
                    model="modelA",
                    gold_path=fixtures_dir / "compare" / "gold.ndjson",
                    predictions_path=fixtures_dir / "compare" / "preds_modelA.ndjson",
                    train_report_path=fixtures_dir / "compare" / "train_report_modelA.json",
                )
            ]
        )
        row = table.rows[0]
        assert row.val_accuracy_pct == pytest.approx(86.25, abs=1e-9)
        assert row.train_accuracy_pct == pytest.approx(87.7, abs=1e-9)
        assert row.folds == 5
        assert 0.0 <= row.precision <= 1.0
        assert 0.0 <= row.recall <= 1.0

    def test_two_models_two_rows(self, fixtures_dir):
        base = fixtures_dir / "compare"
        table = build_comparison(
            [
                ComparisonEntry("dictionary", "modelA", base / "gold.ndjson",
                                base / "preds_modelA.ndjson"),
                ComparisonEntry("dictionary", "modelB", base / "gold.ndjson",
                                base / "preds_modelB.ndjson"),
            ]
        )
        assert [(r.annotator, r.model) for r in table.rows] == [
            ("dictionary", "modelA"), ("dictionary", "modelB"),
        ]
        assert table.rows[0].val_accuracy_pct > table.rows[1].val_accuracy_pct
        assert table.rows[1].none_predicted == 20

    def test_empty_entries_empty_table(self):
        assert build_comparison([]).rows == []

    def test_unknown_label_fatal_with_name(self, tmp_path, fixtures_dir):
        bad = tmp_path / "bad.ndjson"
        bad.write_text(
            '{"post_id": "q000", "fold": 0, "labels": ["Melancholy"]}\n',
            encoding="utf-8",
        )
        with pytest.raises(DataError, match="Melancholy"):
            build_comparison(
                [
                    ComparisonEntry(
                        "dictionary", "x",
                        fixtures_dir / "compare" / "gold.ndjson", bad,
                    )
                ]
            )

    def test_written_table_renders_all_columns(self, tmp_path, fixtures_dir):
        base = fixtures_dir / "compare"
        table = build_comparison(
            [
                ComparisonEntry("dictionary", "modelA", base / "gold.ndjson",
                                base / "preds_modelA.ndjson",
                                base / "train_report_modelA.json"),
            ]
        )
        csv_path, json_path = table.write(tmp_path)
        header = csv_path.read_text().splitlines()[0].split(",")
        assert header == [
            "annotator", "model", "train_accuracy_pct", "val_accuracy_pct",
            "precision", "recall", "f1",
        ]
        assert json_path.exists()
