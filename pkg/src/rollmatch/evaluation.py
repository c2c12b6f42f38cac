"""Accuracy and usability reporting for both pipelines, plus the Wilcoxon
signed-rank analysis of metric-group weights.

Usability is schema compactness (column count) and null density.  The
Wilcoxon test is exact (full sign-assignment distribution, average ranks for
ties, zero differences dropped) up to twenty effective pairs and falls back
to a tie-corrected normal approximation with continuity correction above.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .matcher import WeightConfig, WeightMode
from .metrics import MetricGroup, MetricId, applicable_metrics
from .schema_model import DataType, TargetSchema
from .tables import MaterializedTable


# ---------------------------------------------------------------------------
# Usability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UsabilityReport:
    column_count: int
    row_count: int
    null_cells: int
    total_cells: int
    null_fraction: float
    per_column_null_fraction: dict[str, float]
    empty: bool = False

    def to_dict(self) -> dict:
        return {
            "column_count": self.column_count,
            "row_count": self.row_count,
            "null_cells": self.null_cells,
            "total_cells": self.total_cells,
            "null_fraction": self.null_fraction,
            "per_column_null_fraction": dict(sorted(self.per_column_null_fraction.items())),
            "empty": self.empty,
        }


def usability(table: MaterializedTable) -> UsabilityReport:
    """Exact column/null counts; an empty table reports null fraction 0, flagged."""
    rows, cols = table.row_count, table.column_count
    total = rows * cols
    per_column_nulls = [0] * cols
    for row in table.rows:
        for i, cell in enumerate(row):
            if cell is None:
                per_column_nulls[i] += 1
    nulls = sum(per_column_nulls)
    per_column = {
        name: (per_column_nulls[i] / rows if rows else 0.0)
        for i, name in enumerate(table.columns)
    }
    return UsabilityReport(
        column_count=cols,
        row_count=rows,
        null_cells=nulls,
        total_cells=total,
        null_fraction=nulls / total if total else 0.0,
        per_column_null_fraction=per_column,
        empty=total == 0,
    )


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test
# ---------------------------------------------------------------------------

_EXACT_LIMIT = 20


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n_effective: int
    w_plus: float
    w_minus: float
    method: str  # "exact" or "normal"


def _average_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _exact_min_tail_probability(ranks: list[float], w_observed: float) -> float:
    """P(min(W+, W-) <= observed) under the exact sign-assignment null.

    Ranks may be half-integral under ties, so the distribution is built over
    doubled ranks with an integer-count convolution.
    """
    doubled = [round(2 * r) for r in ranks]
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled:
        for s in range(total - r, -1, -1):
            if counts[s]:
                counts[s + r] += counts[s]
    threshold = 2 * w_observed + 1e-9
    favorable = sum(
        c for s, c in enumerate(counts) if min(s, total - s) <= threshold
    )
    return favorable / (2 ** len(ranks))


def wilcoxon_signed_rank(paired_a: list[float], paired_b: list[float]) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped; |differences| are ranked with average
    ranks for ties; the statistic is W = min(W+, W-).  The two-sided p-value
    is the exact probability P(min(W+, W-) <= W) by full enumeration of the
    2^n sign assignments for n <= 20, and a tie-corrected normal
    approximation with continuity correction for larger n.
    """
    if len(paired_a) != len(paired_b):
        raise ValueError("paired samples must have equal length")
    diffs = [a - b for a, b in zip(paired_a, paired_b) if a - b != 0.0]
    if not diffs:
        raise ValueError("no nonzero pairs")
    n = len(diffs)
    abs_diffs = [abs(d) for d in diffs]
    ranks = _average_ranks(abs_diffs)
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_plus, w_minus)

    if n <= _EXACT_LIMIT:
        p = _exact_min_tail_probability(ranks, w)
        method = "exact"
    else:
        mean = n * (n + 1) / 4
        tie_sizes: dict[float, int] = {}
        for d in abs_diffs:
            tie_sizes[d] = tie_sizes.get(d, 0) + 1
        tie_term = sum(t**3 - t for t in tie_sizes.values()) / 2
        var = (n * (n + 1) * (2 * n + 1) - tie_term) / 24
        sd = math.sqrt(var)
        z = (w - mean + 0.5) / sd
        p = min(1.0, 2 * 0.5 * (1 + math.erf(z / math.sqrt(2))))
        method = "normal"
    return WilcoxonResult(
        statistic=w, p_value=p, n_effective=n, w_plus=w_plus, w_minus=w_minus, method=method
    )


# ---------------------------------------------------------------------------
# Weight-gap analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    schema_avg: float
    instance_avg: float
    gap: float
    n_attributes: int

    def to_dict(self) -> dict:
        return {
            "schema_avg": self.schema_avg,
            "instance_avg": self.instance_avg,
            "gap": self.gap,
            "n_attributes": self.n_attributes,
        }


def attribute_group_means(
    config: WeightConfig, schema: TargetSchema, attr_name: str
) -> tuple[float, float]:
    """Per-attribute mean normalized weight of each metric group.

    The attribute's raw weights over its applicable metrics are normalized
    to sum to one, then averaged per group (schema over its three metrics,
    instance over the attribute's applicable instance metrics).
    """
    attr = schema.attribute(attr_name)
    weights = config.weights_for(attr_name)
    applicable = applicable_metrics(attr)
    total = sum(weights.get(m, 0.0) for m in applicable)
    schema_ms = [m for m in applicable if m.group is MetricGroup.SCHEMA]
    instance_ms = [m for m in applicable if m.group is MetricGroup.INSTANCE]

    def group_mean(group: list[MetricId]) -> float:
        if not group or total <= 0:
            return 0.0
        return sum(weights.get(m, 0.0) / total for m in group) / len(group)

    return group_mean(schema_ms), group_mean(instance_ms)


def weight_gap_analysis(config: WeightConfig, schema: TargetSchema) -> dict[DataType, GapReport]:
    """Average per-type metric-group weights and their instance-minus-schema gap."""
    if config.mode is not WeightMode.PER_ATTRIBUTE:
        raise ValueError("weight gap analysis needs a PER_ATTRIBUTE configuration")
    by_type: dict[DataType, list[tuple[float, float]]] = {}
    for attr in schema.attributes:
        means = attribute_group_means(config, schema, attr.name)
        by_type.setdefault(attr.data_type, []).append(means)
    out: dict[DataType, GapReport] = {}
    for dtype, pairs in by_type.items():
        schema_avg = sum(p[0] for p in pairs) / len(pairs)
        instance_avg = sum(p[1] for p in pairs) / len(pairs)
        out[dtype] = GapReport(
            schema_avg=schema_avg,
            instance_avg=instance_avg,
            gap=instance_avg - schema_avg,
            n_attributes=len(pairs),
        )
    return out


def weight_wilcoxon(config: WeightConfig, schema: TargetSchema) -> WilcoxonResult:
    """Wilcoxon test of instance vs schema group means across attributes."""
    instance_means: list[float] = []
    schema_means: list[float] = []
    for attr in schema.attributes:
        s_mean, i_mean = attribute_group_means(config, schema, attr.name)
        schema_means.append(s_mean)
        instance_means.append(i_mean)
    return wilcoxon_signed_rank(instance_means, schema_means)


# ---------------------------------------------------------------------------
# Comparison report
# ---------------------------------------------------------------------------


@dataclass
class PipelineReport:
    label: str
    f1: float | None
    precision: float | None
    recall: float | None
    usability: UsabilityReport | None
    skipped: bool = False

    def to_dict(self) -> dict:
        if self.skipped:
            return {"label": self.label, "skipped": True}
        return {
            "label": self.label,
            "skipped": False,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "usability": self.usability.to_dict() if self.usability else None,
        }


def _pipeline_from_dict(doc: dict) -> PipelineReport:
    if doc.get("skipped"):
        return PipelineReport(label=doc["label"], f1=None, precision=None, recall=None,
                              usability=None, skipped=True)
    use = doc.get("usability")
    usability_report = None
    if use is not None:
        usability_report = UsabilityReport(
            column_count=use["column_count"],
            row_count=use["row_count"],
            null_cells=use["null_cells"],
            total_cells=use["total_cells"],
            null_fraction=use["null_fraction"],
            per_column_null_fraction=use.get("per_column_null_fraction", {}),
            empty=use.get("empty", False),
        )
    return PipelineReport(
        label=doc["label"],
        f1=doc.get("f1"),
        precision=doc.get("precision"),
        recall=doc.get("recall"),
        usability=usability_report,
    )


@dataclass
class ComparisonReport:
    hybrid: PipelineReport
    baseline: PipelineReport
    weight_gaps: dict[DataType, GapReport] | None = None
    weight_test: WilcoxonResult | None = None
    weight_test_skipped_reason: str | None = None

    @staticmethod
    def from_dict(doc: dict) -> "ComparisonReport":
        gaps = None
        if "weight_gaps" in doc:
            gaps = {
                DataType(dtype): GapReport(
                    schema_avg=g["schema_avg"],
                    instance_avg=g["instance_avg"],
                    gap=g["gap"],
                    n_attributes=g["n_attributes"],
                )
                for dtype, g in doc["weight_gaps"].items()
            }
        test = None
        skipped = None
        raw_test = doc.get("weight_test")
        if raw_test is not None:
            if "skipped" in raw_test:
                skipped = raw_test["skipped"]
            else:
                test = WilcoxonResult(
                    statistic=raw_test["statistic"],
                    p_value=raw_test["p_value"],
                    n_effective=raw_test["n_effective"],
                    w_plus=raw_test["w_plus"],
                    w_minus=raw_test["w_minus"],
                    method=raw_test["method"],
                )
        return ComparisonReport(
            hybrid=_pipeline_from_dict(doc["hybrid"]),
            baseline=_pipeline_from_dict(doc["baseline"]),
            weight_gaps=gaps,
            weight_test=test,
            weight_test_skipped_reason=skipped,
        )

    def to_dict(self) -> dict:
        doc: dict = {
            "hybrid": self.hybrid.to_dict(),
            "baseline": self.baseline.to_dict(),
        }
        if self.weight_gaps is not None:
            doc["weight_gaps"] = {
                dtype.value: report.to_dict() for dtype, report in sorted(
                    self.weight_gaps.items(), key=lambda kv: kv[0].value
                )
            }
        if self.weight_test is not None:
            doc["weight_test"] = {
                "statistic": self.weight_test.statistic,
                "p_value": self.weight_test.p_value,
                "n_effective": self.weight_test.n_effective,
                "w_plus": self.weight_test.w_plus,
                "w_minus": self.weight_test.w_minus,
                "method": self.weight_test.method,
            }
        if self.weight_test_skipped_reason is not None:
            doc["weight_test"] = {"skipped": self.weight_test_skipped_reason}
        return doc


def _fmt(value: float | None, pattern: str = "{:.3f}") -> str:
    return pattern.format(value) if value is not None else "-"


def summary_table(report: ComparisonReport) -> str:
    """Plain-text comparison table: method, accuracy, compactness, null density."""
    header = ["Method", "F1", "Precision", "Recall", "Compactness (# columns)", "Null %"]
    lines_data: list[list[str]] = []
    for part in (report.hybrid, report.baseline):
        if part.skipped:
            lines_data.append([part.label, "skipped", "", "", "", ""])
            continue
        use = part.usability
        lines_data.append(
            [
                part.label,
                _fmt(part.f1),
                _fmt(part.precision),
                _fmt(part.recall),
                str(use.column_count) if use else "-",
                _fmt(use.null_fraction * 100 if use else None, "{:.1f}%"),
            ]
        )
    widths = [max(len(header[i]), *(len(r[i]) for r in lines_data)) for i in range(len(header))]
    def fmt_row(cells: list[str]) -> str:
        return "  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)).rstrip()
    lines = [fmt_row(header), fmt_row(["-" * w for w in widths])]
    lines.extend(fmt_row(r) for r in lines_data)
    if report.weight_gaps:
        lines.append("")
        lines.append("Average metric-group weight by data type")
        lines.append(f"{'Type':8}  {'Schema Avg':>10}  {'Instance Avg':>12}  {'Gap':>7}")
        for dtype in (DataType.STRING, DataType.DECIMAL, DataType.DATE):
            if dtype in report.weight_gaps:
                g = report.weight_gaps[dtype]
                lines.append(
                    f"{dtype.value:8}  {g.schema_avg:>10.4f}  {g.instance_avg:>12.4f}  {g.gap:>7.3f}"
                )
    if report.weight_test is not None:
        t = report.weight_test
        lines.append("")
        lines.append(
            f"Wilcoxon signed-rank (instance vs schema weights): "
            f"W={t.statistic:g}, p={t.p_value:.5g}, n={t.n_effective} ({t.method})"
        )
    elif report.weight_test_skipped_reason:
        lines.append("")
        lines.append(f"Wilcoxon signed-rank: skipped ({report.weight_test_skipped_reason})")
    return "\n".join(lines) + "\n"


def emit_report(report: ComparisonReport, out_dir) -> tuple[str, str]:
    """Write comparison.json (sorted keys) and summary.txt; returns the paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "comparison.json")
    text_path = os.path.join(out_dir, "summary.txt")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(summary_table(report))
    return json_path, text_path
