"""Single entry point wiring all stages into the pipeline.

Subcommands mirror the stages (ingest, sample, filter, annotate, export,
evaluate, analyze, bench) and `run` executes them in order from one
configuration file, writing a manifest of what happened. Exit codes:
0 success, 1 validation error, 2 runtime failure, 3 completed with
per-item failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analyze as analyze_mod
from .annotate import (
    ANNOTATION_TASKS,
    DICTIONARY_ANNOTATOR,
    AnnotatorId,
    RecordStore,
    export_training_set,
    run_annotator,
    run_binary_filter,
    write_training_export,
)
from .corpus import CorpusFilter, SampleSpec, ingest, read_posts, sample, write_posts
from .evaluate import (
    ComparisonEntry,
    build_comparison,
    make_folds,
    write_folds_csv,
)
from .gateway import BackendConfig, bench as bench_op, build_backend, load_backend_configs
from .lexicon import load_lexicon
from .tasks import BinaryVerdict, load_pack
from .util import MindlensError, ValidationError, read_ndjson, write_json

log = logging.getLogger("mindlens")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise ValidationError(message)


def _parse_when(value: str, *, end: bool = False) -> int:
    """Epoch seconds from an ISO8601 date/datetime or a raw integer.

    Date-only values map to 00:00:00 UTC, or 23:59:59 UTC for window ends,
    so inclusive day windows behave as expected.
    """
    value = value.strip()
    if value.lstrip("-").isdigit():
        return int(value)
    try:
        dt = datetime.fromisoformat(value)
    except ValueError as exc:
        raise ValidationError(f"cannot parse time {value!r}: {exc}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    epoch = int(dt.timestamp())
    if end and "T" not in value and ":" not in value:
        epoch += 86399
    return epoch


def _split_csv(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


# ---------------------------------------------------------------------------
# Stage commands
# ---------------------------------------------------------------------------


def _cmd_ingest(args) -> int:
    flt = CorpusFilter(
        communities=frozenset(_split_csv(args.communities)),
        date_window=(_parse_when(getattr(args, "from")), _parse_when(args.to, end=True)),
    )
    posts, stats = ingest(args.infile, flt)
    write_posts(args.out, posts)
    if args.stats:
        write_json(args.stats, stats.to_dict())
    log.info(
        "ingest: %d lines, %d admitted, %d parse failures, %d filtered, %d empty, %d duplicates",
        stats.total_lines, stats.admitted, stats.parse_failures,
        stats.filtered_out, stats.empty_text_drops, stats.duplicates,
    )
    return EXIT_OK


def _cmd_sample(args) -> int:
    posts = read_posts(args.infile)
    picked = sample(posts, SampleSpec(size=args.n, seed=args.seed))
    write_posts(args.out, picked)
    log.info("sample: %d of %d posts (seed %d)", len(picked), len(posts), args.seed)
    return EXIT_OK


def _load_backend(args) -> BackendConfig:
    configs = load_backend_configs(args.config)
    if args.backend not in configs:
        raise ValidationError(
            f"unknown backend {args.backend!r}; configured: {', '.join(sorted(configs))}"
        )
    return configs[args.backend]


def _cmd_filter(args) -> int:
    posts = read_posts(args.infile)
    config = _load_backend(args)
    pack = load_pack(args.prompt_version)
    store = RecordStore(args.records) if args.records else None
    backend = build_backend(config)
    verdicts, dist = run_binary_filter(posts, backend, pack, store)
    write_json(
        args.out,
        {
            "backend": config.name,
            "verdicts": {pid: verdict.value for pid, verdict in sorted(verdicts.items())},
            "distribution": dist.to_dict(),
        },
    )
    if args.out_posts:
        kept = [p for p in posts if verdicts.get(p.id) is BinaryVerdict.YES]
        write_posts(args.out_posts, kept)
        log.info("filter: %d/%d posts pass the relevance gate", len(kept), len(posts))
    return EXIT_OK


def _cmd_annotate(args) -> int:
    posts = read_posts(args.infile)
    names = _split_csv(args.annotators)
    tasks = _split_csv(args.tasks)
    unknown_tasks = [t for t in tasks if t not in ANNOTATION_TASKS]
    if unknown_tasks:
        raise ValidationError(f"unknown tasks: {', '.join(unknown_tasks)}")
    configs = load_backend_configs(args.config) if args.config else {}
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    pack = load_pack(args.prompt_version)
    store = RecordStore(args.records)
    failures = 0
    for name in names:
        if name == "dictionary":
            if lexicon is None:
                raise ValidationError("annotator 'dictionary' requires --lexicon")
            records = run_annotator(
                posts, DICTIONARY_ANNOTATOR, ["disorder"], store=store, lexicon=lexicon
            )
        else:
            if name not in configs:
                raise ValidationError(f"unknown annotator {name!r} (no backend config)")
            backend = build_backend(configs[name])
            records = run_annotator(
                posts,
                AnnotatorId(kind="llm", name=name),
                tasks,
                store=store,
                pack=pack,
                backend=backend,
            )
        failures += sum(1 for r in records if r.failed)
        log.info("annotate: %s -> %d records", name, len(records))
    return EXIT_PARTIAL if failures else EXIT_OK


def _cmd_export(args) -> int:
    posts = read_posts(args.posts)
    store = RecordStore(args.records)
    kind = "dictionary" if args.annotator == "dictionary" else "llm"
    annotator = AnnotatorId(kind=kind, name=args.annotator)
    wanted = {p.id for p in posts}
    records = [
        r
        for r in store.load(annotator, "disorder")
        if r.post_id in wanted
        and (r.prompt_version is None or r.prompt_version == args.prompt_version)
    ]
    records = sorted({r.post_id: r for r in records}.values(), key=lambda r: r.post_id)
    examples, stats = export_training_set(records, posts)
    out_dir = Path(args.out)
    write_training_export(examples, stats, out_dir)
    if args.folds_k:
        folds = make_folds([e.post_id for e in examples], args.folds_k, args.folds_seed)
        write_folds_csv(folds, out_dir / "folds.csv")
    log.info(
        "export: %d examples (%d none-labeled excluded, %d failed excluded)",
        stats.exported, stats.none_excluded, stats.failed_excluded,
    )
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    entries: list[ComparisonEntry] = []
    if args.manifest:
        base = Path(args.manifest).parent
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        for item in manifest.get("comparisons", []):
            entries.append(
                ComparisonEntry(
                    annotator=str(item["annotator"]),
                    model=str(item["model"]),
                    gold_path=base / item["gold"],
                    predictions_path=base / item["predictions"],
                    train_report_path=(
                        base / item["train_report"] if item.get("train_report") else None
                    ),
                )
            )
    elif args.gold and args.pred:
        entries.append(
            ComparisonEntry(
                annotator=args.annotator or "unknown",
                model=args.model or "unknown",
                gold_path=Path(args.gold),
                predictions_path=Path(args.pred),
                train_report_path=Path(args.train_report) if args.train_report else None,
            )
        )
    if not entries:
        raise ValidationError("evaluate: provide --manifest or --gold/--pred")
    table = build_comparison(entries)
    csv_path, json_path = table.write(args.out)
    log.info("evaluate: wrote %s and %s (%d rows)", csv_path, json_path, len(table.rows))
    return EXIT_OK


def _cmd_analyze(args) -> int:
    store = RecordStore(args.records)
    annotators = store.annotators()
    if not annotators:
        raise ValidationError(f"no record logs found under {args.records}")
    binary_records = []
    severity_records = []
    disorder_records = []
    therapy_maps = {}
    for annotator in annotators:
        binary_records.extend(store.load(annotator, "binary"))
        severity_records.extend(store.load(annotator, "severity"))
        disorder_records.extend(store.load(annotator, "disorder"))
        disorder = store.load(annotator, "disorder")
        therapy = store.load(annotator, "therapy")
        if disorder and therapy:
            therapy_maps[annotator.name] = analyze_mod.therapy_map(disorder, therapy)
    written = analyze_mod.emit_reports(
        args.out,
        binary=analyze_mod.distribution(binary_records, "binary") if binary_records else None,
        severity=(
            analyze_mod.distribution(severity_records, "severity")
            if severity_records
            else None
        ),
        labels=(
            analyze_mod.label_stats(
                disorder_records, none_as_label=args.none_as_label, norm=args.norm
            )
            if disorder_records
            else None
        ),
        therapy_maps=therapy_maps or None,
    )
    log.info("analyze: wrote %d report files to %s", len(written), args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = _load_backend(args)
    prompts = [
        (str(obj["id"]), str(obj.get("system", "bench")), str(obj["user"]))
        for obj in read_ndjson(args.infile)
    ]
    report = bench_op(build_backend(config), prompts, args.out)
    log.info(
        "bench: %s completed %d prompts in %d ms (%d failures)",
        report.backend, report.n_prompts, report.total_wall_ms, report.failures,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# run: the full pipeline
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    corpus_input: Path
    communities: frozenset[str]
    date_window: tuple[int, int]
    sample_size: int
    sample_seed: int
    backends: dict
    annotators: list[str]
    tasks: list[str]
    prompt_version: str
    lexicon_path: Path | None
    folds_k: int
    folds_seed: int
    out_dir: Path
    gate_backend: str | None
    gate_enabled: bool
    comparisons: list = field(default_factory=list)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read run config {path}: {exc}") from exc
        base = path.parent

        def resolve(p: str | None) -> Path | None:
            return (base / p) if p else None

        corpus = obj.get("corpus", {})
        sample_spec = obj.get("sample", {})
        if "backends" in obj:
            backends = {}
            from .gateway import backend_config_from_dict

            for entry in obj["backends"]:
                config = backend_config_from_dict(entry)
                if config.name in backends:
                    raise ValidationError(f"duplicate backend name {config.name!r}")
                backends[config.name] = config
        elif obj.get("backends_file"):
            backends = load_backend_configs(resolve(obj["backends_file"]))
        else:
            backends = {}
        annotators = list(obj.get("annotators", []))
        if len(set(annotators)) != len(annotators):
            raise ValidationError("annotator names must be unique")
        for name in annotators:
            if name != "dictionary" and name not in backends:
                raise ValidationError(f"unknown annotator {name!r} (no backend config)")
        tasks = list(obj.get("tasks", list(ANNOTATION_TASKS)))
        bad = [t for t in tasks if t not in ANNOTATION_TASKS]
        if bad:
            raise ValidationError(f"unknown tasks in config: {', '.join(bad)}")
        folds = obj.get("folds", {})
        folds_k = int(folds.get("k", 5))
        if folds_k < 2:
            raise ValidationError(f"folds.k must be >= 2, got {folds_k}")
        gate = obj.get("gate", {})
        gate_backend = gate.get("backend")
        if gate_backend is not None and gate_backend not in backends:
            raise ValidationError(f"gate backend {gate_backend!r} has no config")
        if gate_backend is None:
            llm_annotators = [n for n in annotators if n != "dictionary"]
            gate_backend = llm_annotators[0] if llm_annotators else None
        out_dir = resolve(obj.get("out_dir", "out"))
        return cls(
            corpus_input=resolve(corpus.get("input")),
            communities=frozenset(corpus.get("communities", [])),
            date_window=(
                _parse_when(str(corpus.get("from", "1970-01-01"))),
                _parse_when(str(corpus.get("to", "2100-01-01")), end=True),
            ),
            sample_size=int(sample_spec.get("size", 5000)),
            sample_seed=int(sample_spec.get("seed", 0)),
            backends=backends,
            annotators=annotators,
            tasks=tasks,
            prompt_version=str(obj.get("prompt_version", "v1")),
            lexicon_path=resolve(obj.get("lexicon")),
            folds_k=folds_k,
            folds_seed=int(folds.get("seed", 0)),
            out_dir=out_dir,
            gate_backend=gate_backend,
            gate_enabled=bool(gate.get("enabled", True)),
            comparisons=list(obj.get("comparisons", [])),
        )


class _StageFailed(MindlensError):
    pass


def run_pipeline(config: RunConfig, *, no_gate: bool = False) -> tuple[int, dict]:
    """Execute ingest -> sample -> filter -> annotate -> export -> evaluate ->
    analyze, resuming completed stages, and write a run manifest."""
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "version": __version__,
        "prompt_version": config.prompt_version,
        "seeds": {"sample": config.sample_seed, "folds": config.folds_seed},
        "stages": [],
    }
    failures = 0
    gate_on = config.gate_enabled and not no_gate and config.gate_backend is not None

    def stage(name: str, fn, skip_when: bool = False, detail: dict | None = None):
        entry = {"name": name, "status": "ok", "wall_ms": 0}
        if detail:
            entry.update(detail)
        if skip_when:
            entry["status"] = "skipped"
            manifest["stages"].append(entry)
            log.info("run: %s skipped (outputs exist)", name)
            return None
        start = time.perf_counter()
        try:
            result = fn(entry)
        except Exception as exc:
            entry["status"] = "failed"
            entry["error"] = str(exc)
            entry["wall_ms"] = int((time.perf_counter() - start) * 1000)
            manifest["stages"].append(entry)
            raise _StageFailed(f"stage {name} failed: {exc}") from exc
        entry["wall_ms"] = int((time.perf_counter() - start) * 1000)
        manifest["stages"].append(entry)
        return result

    corpus_path = out / "corpus" / "admitted.ndjson"
    sampled_path = out / "corpus" / "sampled.ndjson"
    gated_path = out / "filter" / "gated.ndjson"
    records_dir = out / "records"
    exports_dir = out / "exports"
    analysis_dir = out / "analysis"

    try:
        def do_ingest(entry):
            flt = CorpusFilter(communities=config.communities, date_window=config.date_window)
            posts, stats = ingest(config.corpus_input, flt)
            write_posts(corpus_path, posts)
            write_json(out / "corpus" / "ingest_stats.json", stats.to_dict())
            entry["admitted"] = stats.admitted
            return posts

        stage("ingest", do_ingest, skip_when=corpus_path.exists())
        posts = read_posts(corpus_path)

        def do_sample(entry):
            picked = sample(posts, SampleSpec(size=config.sample_size, seed=config.sample_seed))
            write_posts(sampled_path, picked)
            entry["sampled"] = len(picked)

        stage("sample", do_sample, skip_when=sampled_path.exists())
        sampled = read_posts(sampled_path)

        pack = load_pack(config.prompt_version)
        store = RecordStore(records_dir)

        annotation_posts = sampled
        if gate_on:
            def do_filter(entry):
                backend = build_backend(config.backends[config.gate_backend])
                verdicts, dist = run_binary_filter(sampled, backend, pack, store)
                write_json(
                    out / "filter" / "verdicts.json",
                    {
                        "backend": config.gate_backend,
                        "verdicts": {pid: v.value for pid, v in sorted(verdicts.items())},
                        "distribution": dist.to_dict(),
                    },
                )
                kept = [p for p in sampled if verdicts.get(p.id) is BinaryVerdict.YES]
                write_posts(gated_path, kept)
                entry["yes"] = len(kept)

            stage("filter", do_filter, skip_when=gated_path.exists(),
                  detail={"backend": config.gate_backend})
            annotation_posts = read_posts(gated_path)

        lexicon = load_lexicon(config.lexicon_path) if config.lexicon_path else None

        def do_annotate(entry):
            nonlocal failures
            total = 0
            for name in config.annotators:
                if name == "dictionary":
                    if lexicon is None:
                        raise ValidationError("annotator 'dictionary' requires a lexicon")
                    records = run_annotator(
                        annotation_posts, DICTIONARY_ANNOTATOR, ["disorder"],
                        store=store, lexicon=lexicon,
                    )
                else:
                    backend = build_backend(config.backends[name])
                    records = run_annotator(
                        annotation_posts, AnnotatorId(kind="llm", name=name),
                        config.tasks, store=store, pack=pack, backend=backend,
                    )
                failures += sum(1 for r in records if r.failed)
                total += len(records)
            entry["records"] = total

        stage("annotate", do_annotate)

        def make_export(name: str):
            def do_export(entry):
                kind = "dictionary" if name == "dictionary" else "llm"
                annotator = AnnotatorId(kind=kind, name=name)
                wanted = {p.id for p in annotation_posts}
                records = [
                    r
                    for r in store.load(annotator, "disorder")
                    if r.post_id in wanted
                    and (r.prompt_version is None or r.prompt_version == pack.version)
                ]
                records = sorted(
                    {r.post_id: r for r in records}.values(), key=lambda r: r.post_id
                )
                examples, stats = export_training_set(records, annotation_posts)
                write_training_export(examples, stats, exports_dir / name)
                if len(examples) >= config.folds_k:
                    folds = make_folds(
                        [e.post_id for e in examples], config.folds_k, config.folds_seed
                    )
                    write_folds_csv(folds, exports_dir / name / "folds.csv")
                entry["exported"] = stats.exported

            return do_export

        for name in config.annotators:
            stage(
                f"export:{name}",
                make_export(name),
                skip_when=(exports_dir / name / "training.ndjson").exists(),
            )

        if config.comparisons:
            def do_evaluate(entry):
                entries = [
                    ComparisonEntry(
                        annotator=str(item["annotator"]),
                        model=str(item["model"]),
                        gold_path=config.out_dir / item["gold"],
                        predictions_path=config.out_dir / item["predictions"],
                        train_report_path=(
                            config.out_dir / item["train_report"]
                            if item.get("train_report")
                            else None
                        ),
                    )
                    for item in config.comparisons
                ]
                table = build_comparison(entries)
                table.write(out / "evaluation")
                entry["rows"] = len(table.rows)

            stage("evaluate", do_evaluate,
                  skip_when=(out / "evaluation" / "comparison.csv").exists())

        def do_analyze(entry):
            annotators = store.annotators()
            binary_records = []
            severity_records = []
            disorder_records = []
            therapy_maps = {}
            for annotator in annotators:
                binary_records.extend(store.load(annotator, "binary"))
                severity_records.extend(store.load(annotator, "severity"))
                disorder = store.load(annotator, "disorder")
                disorder_records.extend(disorder)
                therapy = store.load(annotator, "therapy")
                if disorder and therapy:
                    therapy_maps[annotator.name] = analyze_mod.therapy_map(disorder, therapy)
            written = analyze_mod.emit_reports(
                analysis_dir,
                binary=(
                    analyze_mod.distribution(binary_records, "binary")
                    if binary_records
                    else None
                ),
                severity=(
                    analyze_mod.distribution(severity_records, "severity")
                    if severity_records
                    else None
                ),
                labels=(
                    analyze_mod.label_stats(disorder_records)
                    if disorder_records
                    else None
                ),
                therapy_maps=therapy_maps or None,
            )
            entry["files"] = len(written)

        stage(
            "analyze",
            do_analyze,
            skip_when=analysis_dir.is_dir() and any(analysis_dir.glob("*.csv")),
        )
    except _StageFailed as exc:
        manifest["failures"] = failures
        manifest["outcome"] = "failed"
        write_json(out / "run_manifest.json", manifest)
        log.error("run: %s", exc)
        return EXIT_RUNTIME, manifest

    manifest["failures"] = failures
    manifest["outcome"] = "ok" if failures == 0 else "partial"
    write_json(out / "run_manifest.json", manifest)
    return (EXIT_OK if failures == 0 else EXIT_PARTIAL), manifest


def _cmd_run(args) -> int:
    config = RunConfig.load(args.config)
    code, manifest = run_pipeline(config, no_gate=args.no_gate)
    log.info(
        "run: %s (%d stages, %d failures)",
        manifest["outcome"], len(manifest["stages"]), manifest.get("failures", 0),
    )
    return code


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="mindlens", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and filter a raw NDJSON dump")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--communities", required=True, help="comma-separated subreddits")
    p.add_argument("--from", required=True, help="window start (ISO8601 or epoch)")
    p.add_argument("--to", required=True, help="window end (ISO8601 or epoch)")
    p.add_argument("--out", required=True)
    p.add_argument("--stats", help="optional ingest stats JSON path")
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("sample", help="seeded uniform sample of a corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("filter", help="binary relevance gate via one backend")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--config", required=True, help="backends JSON file")
    p.add_argument("--records", help="record store directory (resume)")
    p.add_argument("--prompt-version", default="v1")
    p.add_argument("--out", required=True, help="verdicts JSON path")
    p.add_argument("--out-posts", help="write gate-passing posts here")
    p.set_defaults(fn=_cmd_filter)

    p = sub.add_parser("annotate", help="run annotators over a corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--annotators", required=True, help="comma-separated names")
    p.add_argument("--tasks", default="disorder", help="comma-separated tasks")
    p.add_argument("--config", help="backends JSON file")
    p.add_argument("--lexicon", help="lexicon JSON (for dictionary annotator)")
    p.add_argument("--records", required=True, help="record store directory")
    p.add_argument("--prompt-version", default="v1")
    p.set_defaults(fn=_cmd_annotate)

    p = sub.add_parser("export", help="export a training set for one annotator")
    p.add_argument("--records", required=True)
    p.add_argument("--annotator", required=True)
    p.add_argument("--posts", required=True, help="corpus the records refer to")
    p.add_argument("--prompt-version", default="v1")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--folds-k", type=int, help="also write folds.csv with k folds")
    p.add_argument("--folds-seed", type=int, default=0)
    p.set_defaults(fn=_cmd_export)

    p = sub.add_parser("evaluate", help="score predictions into a comparison table")
    p.add_argument("--manifest", help="JSON listing comparison entries")
    p.add_argument("--gold", help="training export NDJSON (gold labels)")
    p.add_argument("--pred", help="prediction NDJSON")
    p.add_argument("--train-report", help="trainer self-report JSON")
    p.add_argument("--annotator")
    p.add_argument("--model")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("analyze", help="emit distribution/label/therapy reports")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--none-as-label", action="store_true")
    p.add_argument("--norm", choices=["per-occurrence", "per-post"],
                   default="per-occurrence")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("bench", help="time a backend over a prompt file")
    p.add_argument("--backend", required=True)
    p.add_argument("--config", required=True, help="backends JSON file")
    p.add_argument("--in", dest="infile", required=True, help="prompts NDJSON")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--no-gate", action="store_true",
                   help="annotate all sampled posts, bypassing the relevance gate")
    p.set_defaults(fn=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MindlensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
