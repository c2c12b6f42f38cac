"""Command-line entry point: generate | match | optimize | integrate-fd | evaluate | report.

Every subcommand is a deterministic function of its flags and input files;
wall-clock timings go to stderr, never into output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from importlib import resources

from . import evaluation, fd_baseline, ingest, matcher, optimizer, synth
from .schema_model import SchemaValidationError, load_schema_file

DEFAULT_ALPHA = 0.5
DEFAULT_THETA = 0.5
DEFAULT_GRID = 4
DEFAULT_TAU = 0.7


class CliError(Exception):
    pass


def bundled_schema_text() -> str:
    return resources.files("rollmatch").joinpath("fixtures/target_schema.yaml").read_text("utf-8")


def _check_paths(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not os.path.exists(p):
            raise CliError(f"input path does not exist: {p}")


def _load_weights(args) -> matcher.WeightConfig:
    if getattr(args, "weights", None):
        with open(args.weights, "r", encoding="utf-8") as fh:
            config = matcher.WeightConfig.from_yaml(fh.read())
        if args.alpha is not None or args.theta is not None:
            config = matcher.WeightConfig(
                alpha=args.alpha if args.alpha is not None else config.alpha,
                theta=args.theta if args.theta is not None else config.theta,
                mode=config.mode,
                global_weights=config.global_weights,
                attribute_weights=config.attribute_weights,
            )
        return config
    return matcher.WeightConfig.uniform(
        alpha=args.alpha if args.alpha is not None else DEFAULT_ALPHA,
        theta=args.theta if args.theta is not None else DEFAULT_THETA,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    layout_ids = args.layouts.split(",") if args.layouts else None
    ds = synth.generate_dataset(
        layouts=synth.layouts_by_id(layout_ids),
        docs_per_layout=args.docs_per_layout,
        rows_per_doc=args.rows,
        seed=args.seed,
    )
    paths = ds.write(args.out)
    schema_path = os.path.join(args.out, "schema.yaml")
    with open(schema_path, "w", encoding="utf-8") as fh:
        fh.write(bundled_schema_text())
    paths.append(schema_path)
    print(f"generated {len(ds.documents)} documents, {len(paths)} files under {args.out}")
    return 0


def _run_matching(schema, tables, config, out_dir):
    """Match every document; write mapping JSON + standardized CSV per doc."""
    os.makedirs(out_dir, exist_ok=True)
    standardized = []
    all_warnings: list[tuple[str, matcher.CellWarning]] = []
    for table in tables:
        matrix = matcher.build_matrix(table, schema, config)
        mapping = matcher.assign(matrix)
        name = table.name or table.format_id
        with open(os.path.join(out_dir, f"{name}.mapping.json"), "w", encoding="utf-8") as fh:
            fh.write(matcher.mapping_to_json(mapping, name, table.format_id, list(table.headers)))
        projected, warnings = matcher.project_table(table, schema, mapping)
        projected.write_csv(os.path.join(out_dir, f"{name}.standardized.csv"))
        standardized.append(projected)
        all_warnings.extend((name, w) for w in warnings)
    combined = None
    if standardized:
        from .tables import concat_tables

        combined = concat_tables("standardized_all", standardized)
        combined.write_csv(os.path.join(out_dir, "standardized_all.csv"))
    with open(os.path.join(out_dir, "warnings.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("document,row,source_column,attribute,raw_value\n")
        for name, w in all_warnings:
            fh.write(f"{name},{w.row},{w.source_column},{w.attribute},{w.raw_value}\n")
    return combined


def cmd_match(args) -> int:
    _check_paths(args.schema, args.manifest, args.weights)
    schema = load_schema_file(args.schema)
    tables = ingest.load_manifest(args.manifest)
    config = _load_weights(args)
    combined = _run_matching(schema, tables, config, args.out)
    rows = combined.row_count if combined else 0
    print(f"matched {len(tables)} documents -> {args.out} ({rows} standardized rows)")
    return 0


def cmd_optimize(args) -> int:
    _check_paths(args.schema, args.manifest, args.truth)
    schema = load_schema_file(args.schema)
    tables = ingest.load_manifest(args.manifest)
    truth = optimizer.GroundTruth.from_csv_file(args.truth)
    tensor = optimizer.precompute_tensor(tables, schema)
    grid = optimizer.GridSpec(size=args.grid, mode=optimizer.SearchMode(args.mode))
    default_config = matcher.WeightConfig.uniform(alpha=args.alpha, theta=args.theta)
    default_result = optimizer.evaluate_config(tensor, truth, default_config)
    outcome = optimizer.run_search(
        tensor, truth, grid, alpha=args.alpha, theta=args.theta, workers=args.workers
    )
    os.makedirs(args.out, exist_ok=True)
    weights_path = os.path.join(args.out, "weights.yaml")
    with open(weights_path, "w", encoding="utf-8") as fh:
        fh.write(outcome.config.to_yaml())
    log = {
        "mode": args.mode,
        "grid_size": args.grid,
        "alpha": outcome.config.alpha,
        "theta": outcome.config.theta,
        "configs_evaluated": outcome.configs_evaluated,
        "default": {
            "f1": default_result.f1,
            "precision": default_result.precision,
            "recall": default_result.recall,
        },
        "best": {
            "f1": outcome.result.f1,
            "precision": outcome.result.precision,
            "recall": outcome.result.recall,
        },
    }
    with open(os.path.join(args.out, "optimize_log.json"), "w", encoding="utf-8") as fh:
        json.dump(log, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"optimize[{args.mode}]: default F1 {default_result.f1:.4f} -> best F1 "
        f"{outcome.result.f1:.4f} ({outcome.configs_evaluated} configs)"
    )
    print(f"wall time: {outcome.wall_time_s:.1f}s", file=sys.stderr)
    return 0


def cmd_integrate_fd(args) -> int:
    _check_paths(args.manifest)
    tables = ingest.load_manifest(args.manifest)
    clustering = fd_baseline.cluster_columns(tables, threshold=args.tau)
    integrated = fd_baseline.integrate_fd(tables, clustering)
    os.makedirs(args.out, exist_ok=True)
    integrated.write_csv(os.path.join(args.out, "integrated.csv"))
    clusters_doc = [
        {
            "representative": clustering.representatives[i],
            "members": [
                {"format_id": r.format_id, "document": r.document_id, "header": r.header}
                for r in cluster
            ],
        }
        for i, cluster in enumerate(clustering.clusters)
    ]
    with open(os.path.join(args.out, "clusters.json"), "w", encoding="utf-8") as fh:
        json.dump(clusters_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"integrated {len(tables)} documents into {integrated.column_count} columns "
        f"({len(clustering.clusters)} clusters) -> {args.out}"
    )
    return 0


def cmd_evaluate(args) -> int:
    _check_paths(args.schema, args.manifest, args.truth, args.cluster_truth, args.weights)
    schema = load_schema_file(args.schema)
    tables = ingest.load_manifest(args.manifest)
    truth = optimizer.GroundTruth.from_csv_file(args.truth)
    config = _load_weights(args)

    # Hybrid branch: accuracy from the tensor path, usability from projection.
    tensor = optimizer.precompute_tensor(tables, schema)
    hybrid_result = optimizer.evaluate_config(tensor, truth, config)
    combined = _run_matching(schema, tables, config, os.path.join(args.out, "hybrid"))
    hybrid_usability = evaluation.usability(combined) if combined else None
    hybrid = evaluation.PipelineReport(
        label="Hybrid matcher",
        f1=hybrid_result.f1,
        precision=hybrid_result.precision,
        recall=hybrid_result.recall,
        usability=hybrid_usability,
    )

    # Baseline branch: cluster, integrate, score clusters against truth sets.
    clustering = fd_baseline.cluster_columns(tables, threshold=args.tau)
    integrated = fd_baseline.integrate_fd(tables, clustering)
    fd_dir = os.path.join(args.out, "fd")
    os.makedirs(fd_dir, exist_ok=True)
    integrated.write_csv(os.path.join(fd_dir, "integrated.csv"))
    with open(args.cluster_truth, "r", encoding="utf-8") as fh:
        truth_sets = fd_baseline.load_cluster_truth(fh.read())
    refs = fd_baseline.truth_sets_to_refs(truth_sets, tables)
    cluster_result = fd_baseline.evaluate_clusters(clustering, refs)
    baseline = evaluation.PipelineReport(
        label="Outer-union baseline",
        f1=cluster_result.f1,
        precision=cluster_result.precision,
        recall=cluster_result.recall,
        usability=evaluation.usability(integrated),
    )

    weight_gaps = None
    weight_test = None
    skipped_reason = None
    if config.mode is matcher.WeightMode.PER_ATTRIBUTE:
        weight_gaps = evaluation.weight_gap_analysis(config, schema)
        try:
            weight_test = evaluation.weight_wilcoxon(config, schema)
        except ValueError as exc:
            skipped_reason = str(exc)
    else:
        skipped_reason = "weight analysis needs a per-attribute weight profile"

    report = evaluation.ComparisonReport(
        hybrid=hybrid,
        baseline=baseline,
        weight_gaps=weight_gaps,
        weight_test=weight_test,
        weight_test_skipped_reason=skipped_reason,
    )
    json_path, text_path = evaluation.emit_report(report, args.out)
    print(open(text_path, "r", encoding="utf-8").read(), end="")
    print(f"reports: {json_path}, {text_path}")
    return 0


def cmd_report(args) -> int:
    _check_paths(args.comparison)
    with open(args.comparison, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    report = evaluation.ComparisonReport.from_dict(doc)
    os.makedirs(args.out, exist_ok=True)
    text_path = os.path.join(args.out, "summary.txt")
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(evaluation.summary_table(report))
    print(open(text_path, "r", encoding="utf-8").read(), end="")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_out(parser: argparse.ArgumentParser) -> None:
    env_default = os.environ.get("ROLLMATCH_OUT_DIR")
    parser.add_argument(
        "--out",
        default=env_default,
        required=env_default is None,
        help="output directory (env ROLLMATCH_OUT_DIR overrides the requirement)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rollmatch",
        description="Template-based hybrid schema matching for multi-layout tenancy schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("generate", help="generate the synthetic fixture corpus", formatter_class=fmt)
    p.add_argument("--docs-per-layout", type=int, default=4, help="documents per layout")
    p.add_argument("--rows", type=int, default=40, help="rows per document")
    p.add_argument("--seed", type=int, default=42, help="random seed")
    p.add_argument("--layouts", default=None, help="comma-separated layout ids (default: all five)")
    _add_out(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("match", help="map documents to the target schema", formatter_class=fmt)
    p.add_argument("--schema", required=True, help="target schema YAML")
    p.add_argument("--manifest", required=True, help="dataset manifest YAML")
    p.add_argument("--weights", default=None, help="weight profile YAML (default: uniform)")
    p.add_argument("--alpha", type=float, default=None, help=f"blend factor override (default {DEFAULT_ALPHA})")
    p.add_argument("--theta", type=float, default=None, help=f"score threshold override (default {DEFAULT_THETA})")
    _add_out(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("optimize", help="grid-search parameters and weights", formatter_class=fmt)
    p.add_argument("--schema", required=True, help="target schema YAML")
    p.add_argument("--manifest", required=True, help="dataset manifest YAML")
    p.add_argument("--truth", required=True, help="ground truth CSV")
    p.add_argument("--mode", choices=[m.value for m in optimizer.SearchMode], default="weights", help="search mode")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="grid size g (values 0..1 in 1/(g-1) steps)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="blend factor for weight search")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA, help="threshold for weight search")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="parallel workers (1 = sequential)")
    _add_out(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("integrate-fd", help="outer-union integration baseline", formatter_class=fmt)
    p.add_argument("--manifest", required=True, help="dataset manifest YAML")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="column-similarity merge threshold")
    _add_out(p)
    p.set_defaults(func=cmd_integrate_fd)

    p = sub.add_parser("evaluate", help="full comparison of both pipelines", formatter_class=fmt)
    p.add_argument("--schema", required=True, help="target schema YAML")
    p.add_argument("--manifest", required=True, help="dataset manifest YAML")
    p.add_argument("--truth", required=True, help="ground truth CSV")
    p.add_argument("--cluster-truth", required=True, help="cluster ground truth CSV")
    p.add_argument("--weights", default=None, help="weight profile YAML (default: uniform)")
    p.add_argument("--alpha", type=float, default=None, help=f"blend factor override (default {DEFAULT_ALPHA})")
    p.add_argument("--theta", type=float, default=None, help=f"score threshold override (default {DEFAULT_THETA})")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="baseline merge threshold")
    _add_out(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="re-render a comparison report", formatter_class=fmt)
    p.add_argument("--comparison", required=True, help="comparison.json produced by evaluate")
    _add_out(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, SchemaValidationError, ingest.IngestError, optimizer.GroundTruthError,
            fd_baseline.ClusterTruthError, matcher.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
