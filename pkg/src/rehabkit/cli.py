"""Command-line entry points.

    rehabkit ingest --in <dir> --out <dataset-file>
    rehabkit equalize --dataset <file> --exercise E1 --out <file>
    rehabkit extract --dataset <file> --spec <features.yaml> --out <npz>
    rehabkit synth --config <experiment.yaml> --out <dataset-file>
    rehabkit run-dimred|run-scoring|run-context-sweep --config <yaml> --out <dir>
    rehabkit report --dir <report-dir> --format md|csv
    rehabkit serve --bind host:port --templates <dir> [--checkpoints <dir>]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness, service
from .features import default_feature_specs, extract_features, load_feature_specs
from .skeleton_io import (
    Dataset,
    equalize_lengths,
    load_dataset,
    load_recording,
    save_dataset,
)
from .synth import generate_synthetic


def _cmd_ingest(args) -> int:
    paths = sorted(Path(args.in_dir).glob("*.rec"))
    if not paths:
        print(f"no .rec files under {args.in_dir}", file=sys.stderr)
        return 1
    recordings = [load_recording(p) for p in paths]
    dataset = Dataset(recordings=recordings)
    save_dataset(args.out, dataset)
    print(f"ingested {len(recordings)} recordings -> {args.out}")
    for exercise, count in sorted(dataset.manifest.items()):
        print(f"  {exercise}: {count}")
    return 0


def _cmd_equalize(args) -> int:
    dataset = load_dataset(args.dataset)
    equalized = equalize_lengths(dataset, args.exercise)
    out = args.out or args.dataset
    save_dataset(out, equalized)
    lengths = {len(r) for r in equalized.for_exercise(args.exercise)}
    print(f"equalized {args.exercise} to {sorted(lengths)} frames -> {out}")
    return 0


def _cmd_extract(args) -> int:
    dataset = load_dataset(args.dataset)
    specs = load_feature_specs(args.spec) if args.spec else default_feature_specs()
    arrays, meta = {}, []
    for i, rec in enumerate(dataset.recordings):
        seq = extract_features(rec, specs[rec.exercise_id])
        arrays[f"seq_{i}"] = seq.values
        meta.append((rec.subject_id, rec.exercise_id,
                     -1.0 if seq.score is None else seq.score))
    np.savez(args.out, meta=np.array(meta, dtype=object), **arrays)
    print(f"extracted features for {len(meta)} recordings -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    cfg = harness.load_experiment_config(args.config) if args.config else harness.ExperimentConfig()
    dataset = generate_synthetic(cfg.synth)
    save_dataset(args.out, dataset)
    print(f"generated {len(dataset.recordings)} recordings "
          f"({cfg.synth.exercise}) -> {args.out}")
    return 0


def _cmd_experiment(kind: str):
    def run(args) -> int:
        cfg = (harness.load_experiment_config(args.config)
               if args.config else harness.ExperimentConfig())
        outdir = harness.run_experiment(kind, cfg, args.out)
        print(f"{kind} report written to {outdir}")
        return 0
    return run


def _cmd_report(args) -> int:
    if args.format == "md":
        rendered = harness.render_markdown(args.dir)
        out = Path(args.dir) / "report.md"
        out.write_text(rendered, encoding="utf-8")
        print(f"markdown report -> {out}")
    else:
        print(f"CSV tables live in {args.dir}")
    return 0


def _cmd_serve(args) -> int:
    service.serve(bind=args.bind, templates_dir=args.templates,
                  checkpoints_dir=args.checkpoints)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rehabkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="bundle a directory of .rec files into a dataset")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("equalize", help="resample one exercise to the mean frame count")
    p.add_argument("--dataset", required=True)
    p.add_argument("--exercise", required=True, choices=["E1", "E2", "E3", "E4", "E5"])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_equalize)

    p = sub.add_parser("extract", help="extract per-frame features to an .npz")
    p.add_argument("--dataset", required=True)
    p.add_argument("--spec", help="features YAML (default: built-in specs)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", help="experiment YAML (default config otherwise)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    for kind, name in [("dimred", "run-dimred"), ("scoring", "run-scoring"),
                       ("context-sweep", "run-context-sweep")]:
        p = sub.add_parser(name, help=f"run the {kind} experiment")
        p.add_argument("--config", help="experiment YAML")
        p.add_argument("--out", required=True, help="report directory")
        p.set_defaults(func=_cmd_experiment(kind))

    p = sub.add_parser("report", help="render a report directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--format", choices=["md", "csv"], default="md")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the live feedback service")
    p.add_argument("--bind", help="host:port (default env REHABKIT_BIND or 127.0.0.1:8777)")
    p.add_argument("--templates", default="templates")
    p.add_argument("--checkpoints")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
