#!/usr/bin/env python3
"""Run the full experiment battery (dimred, scoring, context sweep) from the
frozen configs and assemble one report directory with a markdown summary.

    python3 scripts/run_experiments.py --out reports/full
"""

import argparse
import datetime
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rehabkit.harness import (
    load_experiment_config,
    render_markdown,
    run_context_sweep,
    run_dimred_comparison,
    run_scoring_comparison,
    write_report,
)
from rehabkit.synth import generate_synthetic


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="reports/full")
    parser.add_argument("--configs-dir", default="configs")
    args = parser.parse_args()
    configs = Path(args.configs_dir)

    sections = []

    cfg_dimred = load_experiment_config(configs / "accept_dimred.yaml")
    print("running dimensionality-reduction comparison ...")
    sections.append(run_dimred_comparison(generate_synthetic(cfg_dimred.synth),
                                          cfg_dimred))

    cfg_scoring = load_experiment_config(configs / "accept_scoring.yaml")
    print("running scoring comparison ...")
    sections.append(run_scoring_comparison(generate_synthetic(cfg_scoring.synth),
                                           cfg_scoring))

    cfg_context = load_experiment_config(configs / "accept_context.yaml")
    print("running context-window sweep ...")
    sections.append(run_context_sweep(generate_synthetic(cfg_context.synth),
                                      cfg_context))

    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    outdir = write_report(args.out, sections, cfg_scoring, timestamp=stamp)
    (outdir / "report.md").write_text(render_markdown(outdir), encoding="utf-8")
    print(f"report written to {outdir}")
    print(render_markdown(outdir))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
