"""Hybrid scoring, thresholding, globally optimal assignment, and projection.

Per column-attribute pair the seven metric values are blended into one
hybrid score: group-normalized weighted sums give a schema part and an
instance part, combined as ``alpha * schema + (1 - alpha) * instance``.
Pairs below the threshold theta are masked.  The assignment maximizing the
total score over unmasked cells is found with the Hungarian method on a
square-padded cost matrix (cost = 1 - score; masked and padded cells carry a
prohibitive cost), so a column whose every cell is masked is omitted.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy.optimize import linear_sum_assignment

from .ingest import ColumnProfile, SourceTable, is_missing, parse_date, parse_numeric, profile_table
from .metrics import (
    INSTANCE_METRICS,
    METRIC_ORDER,
    SCHEMA_METRICS,
    MetricId,
    is_applicable,
    metric_vector,
)
from .schema_model import AttributeSpec, DataType, TargetSchema
from .tables import MaterializedTable

#: Index of each metric in the canonical order.
METRIC_INDEX = {m: i for i, m in enumerate(METRIC_ORDER)}


class WeightMode(enum.Enum):
    GLOBAL = "GLOBAL"
    PER_ATTRIBUTE = "PER_ATTRIBUTE"


class ConfigError(ValueError):
    """A weight configuration is structurally unusable."""


@dataclass(frozen=True)
class WeightConfig:
    """Blend factor, threshold and per-metric weights.

    In GLOBAL mode one weight vector applies to every attribute; in
    PER_ATTRIBUTE mode each attribute carries its own vector.  Weights are
    raw values in [0, 1]; at scoring time the applicable weights of each
    metric group are normalized to sum to one, and a group whose applicable
    weights are all zero contributes a group score of zero.
    """

    alpha: float = 0.5
    theta: float = 0.5
    mode: WeightMode = WeightMode.GLOBAL
    global_weights: dict[MetricId, float] | None = None
    attribute_weights: dict[str, dict[MetricId, float]] | None = None

    @staticmethod
    def uniform(alpha: float = 0.5, theta: float = 0.5) -> "WeightConfig":
        return WeightConfig(
            alpha=alpha,
            theta=theta,
            mode=WeightMode.GLOBAL,
            global_weights={m: 1.0 for m in METRIC_ORDER},
        )

    def weights_for(self, attr_name: str) -> dict[MetricId, float]:
        if self.mode is WeightMode.GLOBAL:
            if self.global_weights is None:
                raise ConfigError("GLOBAL mode requires a global weight vector")
            return self.global_weights
        if self.attribute_weights is None or attr_name not in self.attribute_weights:
            raise ConfigError(f"no weight vector for attribute '{attr_name}'")
        return self.attribute_weights[attr_name]

    # -- serialization ------------------------------------------------------

    def to_yaml(self) -> str:
        def encode(weights: dict[MetricId, float]) -> dict[str, float]:
            return {m.value: float(weights.get(m, 0.0)) for m in METRIC_ORDER}

        doc: dict = {"alpha": self.alpha, "theta": self.theta, "mode": self.mode.value}
        if self.mode is WeightMode.GLOBAL:
            doc["weights"] = encode(self.global_weights or {})
        else:
            doc["weights"] = {
                name: encode(vec) for name, vec in sorted((self.attribute_weights or {}).items())
            }
        return yaml.safe_dump(doc, sort_keys=False)

    @staticmethod
    def from_yaml(text: str) -> "WeightConfig":
        doc = yaml.safe_load(text)
        if not isinstance(doc, dict):
            raise ConfigError("weight profile must be a mapping")
        try:
            mode = WeightMode(str(doc.get("mode", "GLOBAL")).upper())
            alpha = float(doc.get("alpha", 0.5))
            theta = float(doc.get("theta", 0.5))
            raw = doc["weights"]
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad weight profile: {exc}") from exc

        def decode(mapping: dict) -> dict[MetricId, float]:
            return {MetricId(k): float(v) for k, v in mapping.items()}

        if mode is WeightMode.GLOBAL:
            return WeightConfig(alpha=alpha, theta=theta, mode=mode, global_weights=decode(raw))
        return WeightConfig(
            alpha=alpha,
            theta=theta,
            mode=mode,
            attribute_weights={name: decode(vec) for name, vec in raw.items()},
        )


# ---------------------------------------------------------------------------
# Scoring kernel
# ---------------------------------------------------------------------------


def normalized_group_weights(
    weights: dict[MetricId, float], attr: AttributeSpec
) -> tuple[list[tuple[int, float]], list[tuple[int, float]]]:
    """Per-group (metric index, normalized weight) lists for one attribute.

    Only applicable metrics participate; each group is scaled to sum to one.
    An all-zero group returns an empty list (group score zero).
    """

    def build(group: tuple[MetricId, ...]) -> list[tuple[int, float]]:
        applicable = [m for m in group if is_applicable(m, attr)]
        total = sum(weights.get(m, 0.0) for m in applicable)
        if total <= 0.0:
            return []
        return [
            (METRIC_INDEX[m], weights.get(m, 0.0) / total)
            for m in applicable
            if weights.get(m, 0.0) > 0.0
        ]

    return build(SCHEMA_METRICS), build(INSTANCE_METRICS)


def blend(
    values,
    schema_terms: list[tuple[int, float]],
    instance_terms: list[tuple[int, float]],
    alpha: float,
) -> tuple[float, float, float]:
    """Hybrid score from one metric-value vector.

    This single kernel is used both by direct matching and by grid-search
    tensor lookups so the two paths agree bit for bit.
    """
    s_schema = 0.0
    for idx, w in schema_terms:
        s_schema += w * values[idx]
    s_instance = 0.0
    for idx, w in instance_terms:
        s_instance += w * values[idx]
    return alpha * s_schema + (1.0 - alpha) * s_instance, s_schema, s_instance


@dataclass(frozen=True)
class PairScore:
    hybrid: float
    schema_part: float
    instance_part: float
    breakdown: dict[MetricId, float]


def score_pair(column: ColumnProfile, attr: AttributeSpec, config: WeightConfig) -> PairScore:
    """Score one column-attribute pair with full metric breakdown."""
    values = metric_vector(column, attr)
    schema_terms, instance_terms = normalized_group_weights(config.weights_for(attr.name), attr)
    hybrid, s_schema, s_instance = blend(values, schema_terms, instance_terms, config.alpha)
    return PairScore(
        hybrid=hybrid,
        schema_part=s_schema,
        instance_part=s_instance,
        breakdown={m: values[i] for i, m in enumerate(METRIC_ORDER)},
    )


# ---------------------------------------------------------------------------
# Score matrix and assignment
# ---------------------------------------------------------------------------


@dataclass
class ScoreMatrix:
    """Hybrid scores with a below-threshold mask.

    ``scores[i, j]`` is the hybrid score of column i against attribute j;
    ``mask[i, j]`` is True where the score fell below theta and the pair may
    not be assigned.
    """

    column_names: list[str]
    attribute_names: list[str]
    scores: np.ndarray
    mask: np.ndarray
    breakdown: list[list[dict[MetricId, float]]] | None = None


def build_matrix(
    table: SourceTable,
    schema: TargetSchema,
    config: WeightConfig,
    profiles: list[ColumnProfile] | None = None,
) -> ScoreMatrix:
    """Score every column against every attribute and apply the threshold."""
    if profiles is None:
        profiles = profile_table(table)
    n_cols, n_attrs = len(profiles), len(schema.attributes)
    scores = np.zeros((n_cols, n_attrs), dtype=np.float64)
    breakdown: list[list[dict[MetricId, float]]] = []
    for i, prof in enumerate(profiles):
        row: list[dict[MetricId, float]] = []
        for j, attr in enumerate(schema.attributes):
            pair = score_pair(prof, attr, config)
            scores[i, j] = pair.hybrid
            row.append(pair.breakdown)
        breakdown.append(row)
    mask = scores < config.theta
    return ScoreMatrix(
        column_names=[p.header_raw for p in profiles],
        attribute_names=list(schema.attribute_names),
        scores=scores,
        mask=mask,
        breakdown=breakdown,
    )


@dataclass(frozen=True)
class MappingPair:
    column_index: int
    source_column: str
    attribute: str
    score: float
    breakdown: dict[MetricId, float] | None = None


@dataclass
class MappingResult:
    """One-to-one column-to-attribute mapping plus the leftovers."""

    pairs: list[MappingPair]
    omitted_columns: list[int]
    unfilled_attributes: list[str]

    @property
    def total_score(self) -> float:
        return sum(p.score for p in self.pairs)


# Cost offset guaranteeing masked/padded cells are never preferred over any
# chain of real assignments.
def _prohibitive(n: int) -> float:
    return float(n + 1)


# Perturbation scale for deterministic tie-breaking; far below any meaningful
# score difference, it biases equal-total optima toward lower (column,
# attribute) indices.
_TIE_EPS = 1e-12


def assign(matrix: ScoreMatrix) -> MappingResult:
    """Globally optimal one-to-one assignment over unmasked cells.

    The matrix is padded to square; masked and padded cells carry a
    prohibitive cost, real cells cost ``1 - score`` plus an index-ranked
    epsilon that resolves ties toward lower column then attribute indices.
    Assignments landing on masked or padded cells are discarded.
    """
    n_cols = len(matrix.column_names)
    n_attrs = len(matrix.attribute_names)
    if n_cols == 0 or n_attrs == 0:
        return MappingResult(
            pairs=[],
            omitted_columns=list(range(n_cols)),
            unfilled_attributes=list(matrix.attribute_names),
        )
    n = max(n_cols, n_attrs)
    cost = np.full((n, n), _prohibitive(n), dtype=np.float64)
    eps = _TIE_EPS / (n * n)
    for i in range(n_cols):
        for j in range(n_attrs):
            if not matrix.mask[i, j]:
                cost[i, j] = 1.0 - matrix.scores[i, j] + eps * (i * n + j)
    rows, cols = linear_sum_assignment(cost)
    pairs: list[MappingPair] = []
    assigned_cols: set[int] = set()
    for i, j in zip(rows, cols):
        if i < n_cols and j < n_attrs and not matrix.mask[i, j]:
            pairs.append(
                MappingPair(
                    column_index=int(i),
                    source_column=matrix.column_names[i],
                    attribute=matrix.attribute_names[j],
                    score=float(matrix.scores[i, j]),
                    breakdown=matrix.breakdown[i][j] if matrix.breakdown else None,
                )
            )
            assigned_cols.add(int(i))
    pairs.sort(key=lambda p: p.column_index)
    omitted = [i for i in range(n_cols) if i not in assigned_cols]
    filled = {p.attribute for p in pairs}
    unfilled = [a for a in matrix.attribute_names if a not in filled]
    return MappingResult(pairs=pairs, omitted_columns=omitted, unfilled_attributes=unfilled)


def greedy_assign(matrix: ScoreMatrix) -> MappingResult:
    """Naive comparator: each column takes its best still-free attribute.

    Columns are visited in order; ties go to the lower attribute index.
    Exists to demonstrate how far greedy falls short of the optimum.
    """
    n_cols = len(matrix.column_names)
    taken: set[int] = set()
    pairs: list[MappingPair] = []
    for i in range(n_cols):
        best_j, best_score = -1, -1.0
        for j in range(len(matrix.attribute_names)):
            if j in taken or matrix.mask[i, j]:
                continue
            if matrix.scores[i, j] > best_score:
                best_j, best_score = j, matrix.scores[i, j]
        if best_j >= 0:
            taken.add(best_j)
            pairs.append(
                MappingPair(
                    column_index=i,
                    source_column=matrix.column_names[i],
                    attribute=matrix.attribute_names[best_j],
                    score=float(matrix.scores[i, best_j]),
                    breakdown=matrix.breakdown[i][best_j] if matrix.breakdown else None,
                )
            )
    assigned = {p.column_index for p in pairs}
    omitted = [i for i in range(n_cols) if i not in assigned]
    filled = {p.attribute for p in pairs}
    unfilled = [a for a in matrix.attribute_names if a not in filled]
    return MappingResult(pairs=pairs, omitted_columns=omitted, unfilled_attributes=unfilled)


# ---------------------------------------------------------------------------
# Projection into the standardized layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellWarning:
    row: int
    source_column: str
    attribute: str
    raw_value: str


def format_decimal(value: float) -> str:
    """Plain decimal rendering: period separator, no grouping."""
    if value == int(value):
        return str(int(value))
    return repr(value)


def project_table(
    table: SourceTable,
    schema: TargetSchema,
    mapping: MappingResult,
) -> tuple[MaterializedTable, list[CellWarning]]:
    """Project a source table into the standardized schema-ordered layout.

    Mapped DECIMAL and DATE columns are normalized (plain decimals,
    ISO-8601); STRING cells are trimmed.  Missing cells and unmapped
    attributes are null; a non-missing cell that fails to parse becomes null
    plus a warning record.  Row count is preserved.
    """
    col_for_attr = {p.attribute: p.column_index for p in mapping.pairs}
    warnings: list[CellWarning] = []
    rows: list[list[str | None]] = []
    for r in range(table.row_count):
        row: list[str | None] = []
        for attr in schema.attributes:
            idx = col_for_attr.get(attr.name)
            if idx is None:
                row.append(None)
                continue
            raw = table.cells[r][idx]
            if is_missing(raw):
                row.append(None)
                continue
            if attr.data_type is DataType.DECIMAL:
                value = parse_numeric(raw)
                if value is None:
                    warnings.append(CellWarning(r, table.headers[idx], attr.name, raw))
                    row.append(None)
                else:
                    row.append(format_decimal(value))
            elif attr.data_type is DataType.DATE:
                parsed = parse_date(raw)
                if parsed is None:
                    warnings.append(CellWarning(r, table.headers[idx], attr.name, raw))
                    row.append(None)
                else:
                    row.append(parsed.isoformat())
            else:
                row.append(raw.strip())
        rows.append(row)
    out = MaterializedTable(
        name=table.name or table.format_id,
        columns=list(schema.attribute_names),
        rows=rows,
    )
    return out, warnings


def mapping_to_json(
    mapping: MappingResult, document: str, format_id: str, column_names: list[str]
) -> str:
    """Machine-readable mapping record (sorted keys, deterministic bytes)."""
    doc = {
        "document": document,
        "format_id": format_id,
        "pairs": [
            {
                "source_column": p.source_column,
                "target_attribute": p.attribute,
                "score": p.score,
                "breakdown": (
                    {m.value: v for m, v in p.breakdown.items()} if p.breakdown is not None else None
                ),
            }
            for p in mapping.pairs
        ],
        "omitted_columns": [
            {"index": i, "source_column": column_names[i]} for i in mapping.omitted_columns
        ],
        "unfilled_attributes": list(mapping.unfilled_attributes),
        "total_score": mapping.total_score,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
