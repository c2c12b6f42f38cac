"""Grid search over the blend factor, threshold, and per-attribute metric weights.

All seven metric values for every (document, column, attribute) triple are
precomputed once into a lookup tensor; every grid point is then a cheap
re-weighting plus an assignment, never a metric recomputation.  The
objective is the F1 score of predicted column-to-attribute pairs against a
manually labeled ground truth.

Weight search runs one coordinate pass over the attributes in schema order:
for each attribute every weight vector on the grid (minus the all-zero
vector) is tried while the other attributes keep their current best.  Ties
on F1 are broken toward the vector with the larger instance-weight share --
at equal accuracy the matcher should lean on value evidence rather than
header names, whose overlap is the known source of systematic mismatches --
and remaining ties keep the first candidate in enumeration order.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ingest import SourceTable, profile_table
from .matcher import (
    MappingResult,
    ScoreMatrix,
    WeightConfig,
    WeightMode,
    assign,
    normalized_group_weights,
)
from .metrics import METRIC_ORDER, MetricGroup, MetricId, applicable_metrics, metric_vector
from .schema_model import TargetSchema


class GroundTruthError(ValueError):
    """Ground truth references unknown formats, columns, or attributes."""


@dataclass(frozen=True)
class GroundTruth:
    """Manually labeled (format, source column) -> target attribute pairs.

    Columns absent from the entries are implicitly labeled "omit".
    """

    entries: dict[tuple[str, str], str]

    @staticmethod
    def from_csv(text: str) -> "GroundTruth":
        reader = csv.DictReader(io.StringIO(text))
        required = {"format", "source_column", "target_attribute"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise GroundTruthError(
                f"ground truth needs columns {sorted(required)}, got {reader.fieldnames}"
            )
        entries: dict[tuple[str, str], str] = {}
        for row in reader:
            key = (row["format"].strip(), row["source_column"].strip())
            if key in entries:
                raise GroundTruthError(f"duplicate ground-truth entry for {key}")
            entries[key] = row["target_attribute"].strip()
        return GroundTruth(entries=entries)

    @staticmethod
    def from_csv_file(path) -> "GroundTruth":
        with open(path, "r", encoding="utf-8") as fh:
            return GroundTruth.from_csv(fh.read())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["format", "source_column", "target_attribute"])
        for (fmt, col), attr in sorted(self.entries.items()):
            writer.writerow([fmt, col, attr])
        return buf.getvalue()

    def pairs_for(self, format_id: str, headers: tuple[str, ...]) -> dict[str, str]:
        header_set = set(headers)
        return {
            col: attr
            for (fmt, col), attr in self.entries.items()
            if fmt == format_id and col in header_set
        }


# ---------------------------------------------------------------------------
# Lookup tensor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorDoc:
    name: str
    format_id: str
    headers: tuple[str, ...]
    values: np.ndarray  # [columns, attributes, metrics]


@dataclass(frozen=True)
class MetricTensor:
    """Precomputed raw metric values for every (document, column, attribute)."""

    schema: TargetSchema
    docs: tuple[TensorDoc, ...]

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return self.schema.attribute_names

    @property
    def formats(self) -> set[str]:
        return {d.format_id for d in self.docs}

    def cell(self, doc_index: int, column: int, attribute: int, metric: MetricId) -> float:
        return float(self.docs[doc_index].values[column, attribute, METRIC_ORDER.index(metric)])


def precompute_tensor(documents: list[SourceTable], schema: TargetSchema) -> MetricTensor:
    """Fill the [document, column, attribute, metric] lookup tensor."""
    docs: list[TensorDoc] = []
    for table in documents:
        profiles = profile_table(table)
        values = np.zeros((len(profiles), len(schema.attributes), len(METRIC_ORDER)))
        for c, prof in enumerate(profiles):
            for a, attr in enumerate(schema.attributes):
                values[c, a, :] = metric_vector(prof, attr)
        docs.append(
            TensorDoc(
                name=table.name or table.format_id,
                format_id=table.format_id,
                headers=table.headers,
                values=values,
            )
        )
    return MetricTensor(schema=schema, docs=tuple(docs))


def _blend_columns(
    values: np.ndarray,
    schema_terms: list[tuple[int, float]],
    instance_terms: list[tuple[int, float]],
    alpha: float,
) -> np.ndarray:
    """Vectorized hybrid scores for one attribute across all columns.

    Accumulates term by term in the same order as the scalar kernel in
    :mod:`rollmatch.matcher`, so tensor lookups and direct scoring agree bit
    for bit.
    """
    s_schema = np.zeros(values.shape[0])
    for idx, w in schema_terms:
        s_schema += w * values[:, idx]
    s_instance = np.zeros(values.shape[0])
    for idx, w in instance_terms:
        s_instance += w * values[:, idx]
    return alpha * s_schema + (1.0 - alpha) * s_instance


def hybrid_matrix(doc: TensorDoc, tensor: MetricTensor, config: WeightConfig) -> ScoreMatrix:
    """ScoreMatrix for one document from tensor lookups under a config."""
    schema = tensor.schema
    n_cols = doc.values.shape[0]
    scores = np.zeros((n_cols, len(schema.attributes)))
    for a, attr in enumerate(schema.attributes):
        schema_terms, instance_terms = normalized_group_weights(config.weights_for(attr.name), attr)
        scores[:, a] = _blend_columns(doc.values[:, a, :], schema_terms, instance_terms, config.alpha)
    return ScoreMatrix(
        column_names=list(doc.headers),
        attribute_names=list(schema.attribute_names),
        scores=scores,
        mask=scores < config.theta,
    )


# ---------------------------------------------------------------------------
# Evaluation against ground truth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalResult:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def _score_predictions(
    predicted: list[tuple[str, str]], truth_pairs: dict[str, str]
) -> tuple[int, int, int]:
    tp = fp = 0
    correct: set[str] = set()
    for header, attr in predicted:
        if truth_pairs.get(header) == attr:
            tp += 1
            correct.add(header)
        else:
            fp += 1
    fn = sum(1 for col in truth_pairs if col not in correct)
    return tp, fp, fn


def _prf(tp: int, fp: int, fn: int) -> EvalResult:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalResult(precision=precision, recall=recall, f1=f1, tp=tp, fp=fp, fn=fn)


def validate_truth(tensor: MetricTensor, truth: GroundTruth) -> None:
    formats = tensor.formats
    attr_names = set(tensor.attribute_names)
    headers_by_format: dict[str, set[str]] = {}
    for doc in tensor.docs:
        headers_by_format.setdefault(doc.format_id, set()).update(doc.headers)
    for (fmt, col), attr in truth.entries.items():
        if fmt not in formats:
            raise GroundTruthError(f"ground truth references unknown format '{fmt}'")
        if col not in headers_by_format[fmt]:
            raise GroundTruthError(f"ground truth references unknown column '{col}' of '{fmt}'")
        if attr not in attr_names:
            raise GroundTruthError(f"ground truth references unknown attribute '{attr}'")


def evaluate_config(tensor: MetricTensor, truth: GroundTruth, config: WeightConfig) -> EvalResult:
    """Precision/recall/F1 of the mapping the config produces on every document."""
    validate_truth(tensor, truth)
    tp = fp = fn = 0
    for doc in tensor.docs:
        matrix = hybrid_matrix(doc, tensor, config)
        mapping = assign(matrix)
        predicted = [(p.source_column, p.attribute) for p in mapping.pairs]
        truth_pairs = truth.pairs_for(doc.format_id, doc.headers)
        d_tp, d_fp, d_fn = _score_predictions(predicted, truth_pairs)
        tp, fp, fn = tp + d_tp, fp + d_fp, fn + d_fn
    return _prf(tp, fp, fn)


# ---------------------------------------------------------------------------
# Grid specification and search
# ---------------------------------------------------------------------------


class SearchMode(enum.Enum):
    PARAMS_ONLY = "params"
    WEIGHTS_ONLY = "weights"
    PARAMS_AND_WEIGHTS = "both"


@dataclass(frozen=True)
class GridSpec:
    """Evenly spaced grid {0, 1/(g-1), ..., 1}, optionally range-restricted."""

    size: int = 4
    alpha_range: tuple[float, float] = (0.0, 1.0)
    theta_range: tuple[float, float] = (0.0, 1.0)
    mode: SearchMode = SearchMode.WEIGHTS_ONLY

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError("grid size must be at least 2")

    def values(self) -> tuple[float, ...]:
        return tuple(k / (self.size - 1) for k in range(self.size))

    def alpha_values(self) -> tuple[float, ...]:
        lo, hi = self.alpha_range
        return tuple(v for v in self.values() if lo <= v <= hi)

    def theta_values(self) -> tuple[float, ...]:
        lo, hi = self.theta_range
        return tuple(v for v in self.values() if lo <= v <= hi)


@dataclass
class SearchOutcome:
    config: WeightConfig
    result: EvalResult
    configs_evaluated: int
    wall_time_s: float

    def runtime_report(self) -> dict:
        return {
            "configs_evaluated": self.configs_evaluated,
            "wall_time_seconds": self.wall_time_s,
        }


def grid_search_params(
    tensor: MetricTensor, truth: GroundTruth, grid: GridSpec
) -> SearchOutcome:
    """Exhaustive scan of (alpha, theta) with uniform weights.

    Ties prefer the smaller theta, then the smaller alpha: the more
    permissive, simpler configuration.
    """
    start = time.perf_counter()
    best_key: tuple | None = None
    best: tuple[float, float, EvalResult] | None = None
    count = 0
    for theta in grid.theta_values():
        for alpha in grid.alpha_values():
            config = WeightConfig.uniform(alpha=alpha, theta=theta)
            result = evaluate_config(tensor, truth, config)
            count += 1
            key = (result.f1, -theta, -alpha)
            if best_key is None or key > best_key:
                best_key, best = key, (alpha, theta, result)
    alpha, theta, result = best  # grid is never empty (size >= 2)
    return SearchOutcome(
        config=WeightConfig.uniform(alpha=alpha, theta=theta),
        result=result,
        configs_evaluated=count,
        wall_time_s=time.perf_counter() - start,
    )


def _instance_share(vector: dict[MetricId, float]) -> float:
    total = sum(vector.values())
    instance = sum(w for m, w in vector.items() if m.group is MetricGroup.INSTANCE)
    return instance / total if total > 0 else 0.0


def _count_errors(
    doc: TensorDoc,
    scores: np.ndarray,
    theta: float,
    attribute_names: list[str],
    truth_pairs: dict[str, str],
) -> tuple[int, int, int]:
    matrix = ScoreMatrix(
        column_names=list(doc.headers),
        attribute_names=attribute_names,
        scores=scores,
        mask=scores < theta,
    )
    mapping = assign(matrix)
    predicted = [(p.source_column, p.attribute) for p in mapping.pairs]
    return _score_predictions(predicted, truth_pairs)


@dataclass
class _CandidateChunk:
    """Everything a worker needs to score a slice of weight candidates."""

    attr_index: int
    candidates: list[tuple[float, ...]]
    candidate_offset: int
    applicable: tuple[MetricId, ...]
    alpha: float
    theta: float
    attribute_names: list[str]
    doc_headers: list[tuple[str, ...]]
    doc_formats: list[str]
    doc_base_scores: list[np.ndarray]
    doc_attr_values: list[np.ndarray]
    doc_truth: list[dict[str, str]]
    schema_indices: list[int]
    instance_indices: list[int]


def _terms_for_candidate(
    chunk: _CandidateChunk, candidate: tuple[float, ...]
) -> tuple[list[tuple[int, float]], list[tuple[int, float]]]:
    weights = dict(zip(chunk.applicable, candidate))

    def build(indices: list[int]) -> list[tuple[int, float]]:
        idx_metrics = [(i, METRIC_ORDER[i]) for i in indices]
        total = sum(weights.get(m, 0.0) for _, m in idx_metrics)
        if total <= 0.0:
            return []
        return [(i, weights[m] / total) for i, m in idx_metrics if weights.get(m, 0.0) > 0.0]

    return build(chunk.schema_indices), build(chunk.instance_indices)


def _evaluate_chunk(chunk: _CandidateChunk) -> list[tuple[int, float]]:
    out: list[tuple[int, float]] = []
    for k, candidate in enumerate(chunk.candidates):
        schema_terms, instance_terms = _terms_for_candidate(chunk, candidate)
        tp = fp = fn = 0
        for d in range(len(chunk.doc_base_scores)):
            scores = chunk.doc_base_scores[d].copy()
            scores[:, chunk.attr_index] = _blend_columns(
                chunk.doc_attr_values[d], schema_terms, instance_terms, chunk.alpha
            )
            doc = TensorDoc(
                name="",
                format_id=chunk.doc_formats[d],
                headers=chunk.doc_headers[d],
                values=np.empty(0),
            )
            d_tp, d_fp, d_fn = _count_errors(
                doc, scores, chunk.theta, chunk.attribute_names, chunk.doc_truth[d]
            )
            tp, fp, fn = tp + d_tp, fp + d_fp, fn + d_fn
        out.append((chunk.candidate_offset + k, _prf(tp, fp, fn).f1))
    return out


def grid_search_weights(
    tensor: MetricTensor,
    truth: GroundTruth,
    grid: GridSpec,
    alpha: float = 0.5,
    theta: float = 0.5,
    workers: int = 1,
) -> SearchOutcome:
    """One coordinate pass of per-attribute weight search at fixed alpha/theta.

    Each attribute's applicable metrics are scanned over the full grid
    (skipping the all-zero vector) while the other attributes hold their
    current best vectors; see the module docstring for the tie-break order.
    """
    validate_truth(tensor, truth)
    start = time.perf_counter()
    schema = tensor.schema
    grid_values = grid.values()

    current: dict[str, dict[MetricId, float]] = {
        attr.name: {m: 1.0 for m in applicable_metrics(attr)} for attr in schema.attributes
    }

    def config_from(current_vectors: dict[str, dict[MetricId, float]]) -> WeightConfig:
        return WeightConfig(
            alpha=alpha,
            theta=theta,
            mode=WeightMode.PER_ATTRIBUTE,
            attribute_weights={k: dict(v) for k, v in current_vectors.items()},
        )

    current_result = evaluate_config(tensor, truth, config_from(current))
    doc_truth = [truth.pairs_for(d.format_id, d.headers) for d in tensor.docs]
    attribute_names = list(schema.attribute_names)
    count = 0

    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for attr_idx, attr in enumerate(schema.attributes):
            applicable = applicable_metrics(attr)
            candidates = [
                c
                for c in itertools.product(grid_values, repeat=len(applicable))
                if any(w > 0.0 for w in c)
            ]
            count += len(candidates)

            base_config = config_from(current)
            base_scores = [hybrid_matrix(doc, tensor, base_config).scores for doc in tensor.docs]
            schema_indices = [
                i for i, m in enumerate(METRIC_ORDER) if m in applicable and m.group is MetricGroup.SCHEMA
            ]
            instance_indices = [
                i for i, m in enumerate(METRIC_ORDER) if m in applicable and m.group is MetricGroup.INSTANCE
            ]

            def make_chunk(cands: list[tuple[float, ...]], offset: int) -> _CandidateChunk:
                return _CandidateChunk(
                    attr_index=attr_idx,
                    candidates=cands,
                    candidate_offset=offset,
                    applicable=applicable,
                    alpha=alpha,
                    theta=theta,
                    attribute_names=attribute_names,
                    doc_headers=[d.headers for d in tensor.docs],
                    doc_formats=[d.format_id for d in tensor.docs],
                    doc_base_scores=base_scores,
                    doc_attr_values=[np.ascontiguousarray(d.values[:, attr_idx, :]) for d in tensor.docs],
                    doc_truth=doc_truth,
                    schema_indices=schema_indices,
                    instance_indices=instance_indices,
                )

            if executor is None:
                results = _evaluate_chunk(make_chunk(candidates, 0))
            else:
                step = max(1, (len(candidates) + workers * 4 - 1) // (workers * 4))
                chunks = [
                    make_chunk(candidates[i : i + step], i)
                    for i in range(0, len(candidates), step)
                ]
                results = [item for part in executor.map(_evaluate_chunk, chunks) for item in part]

            # Deterministic reduction: candidates considered in enumeration
            # order, accepted only on a strictly better (F1, instance share).
            f1_by_index = dict(results)
            incumbent_key = (current_result.f1, _instance_share(current[attr.name]))
            incumbent_vector = current[attr.name]
            for k, candidate in enumerate(candidates):
                vector = dict(zip(applicable, candidate))
                key = (f1_by_index[k], _instance_share(vector))
                if key > incumbent_key:
                    incumbent_key = key
                    incumbent_vector = vector
            if incumbent_vector is not current[attr.name]:
                current[attr.name] = incumbent_vector
                current_result = evaluate_config(tensor, truth, config_from(current))
    finally:
        if executor is not None:
            executor.shutdown()

    final_config = config_from(current)
    final_result = evaluate_config(tensor, truth, final_config)
    return SearchOutcome(
        config=final_config,
        result=final_result,
        configs_evaluated=count,
        wall_time_s=time.perf_counter() - start,
    )


def run_search(
    tensor: MetricTensor,
    truth: GroundTruth,
    grid: GridSpec,
    alpha: float = 0.5,
    theta: float = 0.5,
    workers: int = 1,
) -> SearchOutcome:
    """Dispatch on the grid's search mode."""
    if grid.mode is SearchMode.PARAMS_ONLY:
        return grid_search_params(tensor, truth, grid)
    if grid.mode is SearchMode.WEIGHTS_ONLY:
        return grid_search_weights(tensor, truth, grid, alpha=alpha, theta=theta, workers=workers)
    params = grid_search_params(tensor, truth, grid)
    weights = grid_search_weights(
        tensor, truth, grid, alpha=params.config.alpha, theta=params.config.theta, workers=workers
    )
    weights.configs_evaluated += params.configs_evaluated
    weights.wall_time_s += params.wall_time_s
    return weights
