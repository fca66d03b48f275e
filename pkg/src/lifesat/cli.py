"""Command-line entry point: train | evaluate | explain | ablate | cohort |
textgen | serve.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifesat",
        description="Life-satisfaction prediction pipeline",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run the full training study")
    train.add_argument("--config", required=True)
    train.add_argument("--output", help="override the config output_dir")
    train.add_argument("--no-figures", action="store_true")

    evaluate = sub.add_parser("evaluate",
                              help="score a saved artifact on a CSV")
    evaluate.add_argument("--artifact", required=True)
    evaluate.add_argument("--data", required=True)

    explain = sub.add_parser("explain",
                             help="explain one prediction from an artifact")
    explain.add_argument("--artifact", required=True)
    explain.add_argument("--row", required=True,
                         help="JSON file mapping feature code to answer")
    explain.add_argument("--n-samples", type=int, default=2000)
    explain.add_argument("--seed", type=int, default=0)
    explain.add_argument("--top", type=int, default=10)

    ablate = sub.add_parser("ablate", help="run the ablation grids")
    ablate.add_argument("--config", required=True)
    ablate.add_argument("--which", default="both",
                        choices=["resampling", "selection", "both"])
    ablate.add_argument("--output")

    cohort = sub.add_parser("cohort", help="per-age-bracket determinants")
    cohort.add_argument("--config", required=True)
    cohort.add_argument("--age-code", default="age")
    cohort.add_argument("--top-k", type=int, default=5)
    cohort.add_argument("--output")

    textgen = sub.add_parser("textgen",
                             help="export one sentence per labeled row")
    textgen.add_argument("--data", required=True)
    textgen.add_argument("--schema", default="lifewell")
    textgen.add_argument("--mapping", help="mapping JSON (default LifeWell)")
    textgen.add_argument("--output", required=True)

    serve = sub.add_parser("serve", help="start the questionnaire service")
    serve.add_argument("--artifact",
                       default=os.environ.get("LIFESAT_ARTIFACT"))
    serve.add_argument("--bind",
                       default=os.environ.get("LIFESAT_BIND", "127.0.0.1:8000"))
    serve.add_argument(
        "--max-concurrency", type=int,
        default=int(os.environ.get("LIFESAT_MAX_CONCURRENCY", "8")),
    )
    serve.add_argument("--static-dir",
                       default=os.environ.get("LIFESAT_STATIC_DIR"))
    return parser


def cmd_train(args) -> int:
    from .artifact import save_artifact
    from .pipeline import PipelineConfig, run_training
    from .report import write_training_outputs

    config = PipelineConfig.from_file(args.config)
    if args.output:
        config.output_dir = args.output
    if args.no_figures:
        config.figures = False
    artifact, results = run_training(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    checksum = save_artifact(artifact, out / "artifact.json")
    paths = write_training_outputs(results, checksum, out,
                                   figures=config.figures)
    print(f"artifact: {out / 'artifact.json'} (sha256 {checksum[:12]})")
    for key, value in paths.items():
        print(f"{key}: {value}")
    for row in results["aggregate"]:
        print(f"{row['model']}: accuracy {row['display']['accuracy']}  "
              f"macro F1 {row['display']['macro_f1']}")
    return 0


def cmd_evaluate(args) -> int:
    import numpy as np

    from .artifact import load_artifact
    from .data import parse_csv
    from .metrics import evaluate_model
    from .pipeline import _project

    artifact = load_artifact(args.artifact)
    ds = parse_csv(args.data, artifact.schema)
    if ds.labels is None:
        print("error: evaluation data has no label column", file=sys.stderr)
        return 1
    transformed = artifact.preprocessor.apply(ds)
    if artifact.pca is not None:
        prepared = _project(transformed, artifact.pca)
    else:
        prepared = transformed.select_features(artifact.selected_codes)
    X = prepared.feature_matrix()
    for name, model in artifact.models.items():
        report = evaluate_model(model, X, prepared.labels)
        print(f"{name}: accuracy {report.accuracy * 100:.2f}%  "
              f"macro F1 {report.macro_f1 * 100:.2f}%  "
              f"AUC {report.auc * 100:.2f}%")
    return 0


def cmd_explain(args) -> int:
    from .artifact import load_artifact
    from .explain import explain_instance

    artifact = load_artifact(args.artifact)
    answers = json.loads(Path(args.row).read_text(encoding="utf-8"))
    row = artifact.model_input(answers)
    model = artifact.models[artifact.primary_model]
    explanation = explain_instance(
        model, row[0], artifact.discretizer,
        n_samples=args.n_samples, seed=args.seed,
    )
    p0, p1 = explanation.class_probs
    print(f"P(Discontent) = {p0:.4f}")
    print(f"P(Content)    = {p1:.4f}")
    print(f"surrogate fidelity R^2 = {explanation.fidelity:.4f}")
    print("rule                                    weight")
    for code, rule, weight in explanation.contributions[: args.top]:
        direction = "+" if weight >= 0 else "-"
        print(f"{rule:<40}{direction}{abs(weight):.4f}")
    return 0


def cmd_ablate(args) -> int:
    from .pipeline import PipelineConfig, ablation_run
    from .report import write_ablation_tables, write_json

    config = PipelineConfig.from_file(args.config)
    grids = ablation_run(config, which=args.which)
    out = Path(args.output or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = write_ablation_tables(grids, out)
    write_json(grids, out / "ablation.json")
    for path in paths:
        print(f"wrote {path}")
    print(f"wrote {out / 'ablation.json'}")
    return 0


def cmd_cohort(args) -> int:
    from .pipeline import CohortSpec, PipelineConfig, cohort_analysis
    from .report import plot_cohort_radar, write_json

    config = PipelineConfig.from_file(args.config)
    spec = CohortSpec(top_k=args.top_k, age_code=args.age_code)
    ds = config.load_dataset()
    cohorts = cohort_analysis(ds, spec, config)
    out = Path(args.output or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(
        {name: [{"code": c, "importance": v} for c, v in top]
         for name, top in cohorts.items()},
        out / "cohorts.json",
    )
    if config.figures:
        plot_cohort_radar(cohorts, out / "cohorts.png")
    for name, top in cohorts.items():
        listing = ", ".join(f"{c} ({v:.2f})" for c, v in top)
        print(f"{name}: {listing}")
    return 0


def cmd_textgen(args) -> int:
    from .data import parse_csv
    from .lifewell import lifewell_mapping, lifewell_schema
    from .data import Schema
    from .textgen import MappingTable, export_text, validate_mapping

    schema = (lifewell_schema() if args.schema == "lifewell"
              else Schema.from_file(args.schema))
    mapping = (lifewell_mapping() if args.mapping is None
               else MappingTable.from_file(args.mapping))
    issues = validate_mapping(mapping, schema)
    if issues:
        for issue in issues:
            print(f"mapping issue: {issue}", file=sys.stderr)
        return 1
    ds = parse_csv(args.data, schema)
    count = export_text(ds, mapping, args.output)
    print(f"wrote {count} records to {args.output}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .artifact import load_artifact
    from .service import create_app

    if not args.artifact:
        print("error: --artifact (or LIFESAT_ARTIFACT) is required",
              file=sys.stderr)
        return 1
    artifact = load_artifact(args.artifact)
    app = create_app(artifact, max_concurrency=args.max_concurrency,
                     static_dir=args.static_dir)
    host, _, port = args.bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "explain": cmd_explain,
    "ablate": cmd_ablate,
    "cohort": cmd_cohort,
    "textgen": cmd_textgen,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
