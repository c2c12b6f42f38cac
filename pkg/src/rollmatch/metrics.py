"""The seven column-to-attribute similarity metrics, each scored in [0, 1].

Three schema-based metrics compare the cleaned column header against the
attribute's name and synonyms (edit distance, token overlap, fuzzy token-set
ratio).  Four instance-based metrics compare cell values against the
attribute's type and statistical profile (digit likelihood, date likelihood,
range closeness, distribution shape).

The fuzzy token-set ratio is implemented by explicit construction rather
than through a library so that scores are bit-for-bit reproducible: sort the
token sets, build the intersection string and the two remainder-augmented
strings, and return the best normalized edit similarity among the three
pairings.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache

from .ingest import ColumnProfile, clean_text, parse_date
from .schema_model import AttributeSpec, DataType


class MetricGroup(enum.Enum):
    SCHEMA = "schema"
    INSTANCE = "instance"


class MetricId(enum.Enum):
    LEVENSHTEIN = "levenshtein"
    JACCARD = "jaccard"
    SYNONYM = "synonym"
    NUMERIC_TYPE = "numeric_type"
    DATE_TYPE = "date_type"
    RANGE = "range"
    KS = "ks"

    @property
    def group(self) -> MetricGroup:
        if self in (MetricId.LEVENSHTEIN, MetricId.JACCARD, MetricId.SYNONYM):
            return MetricGroup.SCHEMA
        return MetricGroup.INSTANCE


#: Canonical metric order used by weight vectors and the lookup tensor.
METRIC_ORDER: tuple[MetricId, ...] = (
    MetricId.LEVENSHTEIN,
    MetricId.JACCARD,
    MetricId.SYNONYM,
    MetricId.NUMERIC_TYPE,
    MetricId.DATE_TYPE,
    MetricId.RANGE,
    MetricId.KS,
)

SCHEMA_METRICS: tuple[MetricId, ...] = tuple(m for m in METRIC_ORDER if m.group is MetricGroup.SCHEMA)
INSTANCE_METRICS: tuple[MetricId, ...] = tuple(m for m in METRIC_ORDER if m.group is MetricGroup.INSTANCE)


def is_applicable(metric: MetricId, attr: AttributeSpec) -> bool:
    """Whether a metric is defined for an attribute's data type.

    Schema metrics always apply.  Digit/range/shape metrics apply to DECIMAL
    attributes only and the date metric to DATE attributes only; a degenerate
    numeric profile (zero IQR) makes the range and shape metrics undefined.
    """
    if metric.group is MetricGroup.SCHEMA:
        return True
    if metric is MetricId.NUMERIC_TYPE:
        return attr.data_type is DataType.DECIMAL
    if metric is MetricId.DATE_TYPE:
        return attr.data_type is DataType.DATE
    # RANGE and KS need a usable spread.
    return (
        attr.data_type is DataType.DECIMAL
        and attr.numeric_profile is not None
        and attr.numeric_profile.iqr > 0
    )


def applicable_metrics(attr: AttributeSpec) -> tuple[MetricId, ...]:
    return tuple(m for m in METRIC_ORDER if is_applicable(m, attr))


# ---------------------------------------------------------------------------
# String primitives
# ---------------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def lev_ratio(a: str, b: str) -> float:
    """Normalized edit similarity: 1 - dist / max length; two empties match."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def token_set_ratio(a: str, b: str) -> float:
    """Fuzzy token-set ratio in [0, 1] by the standard construction."""
    ta, tb = set(a.split()), set(b.split())
    inter = " ".join(sorted(ta & tb))
    only_a = " ".join(sorted(ta - tb))
    only_b = " ".join(sorted(tb - ta))
    combined_a = f"{inter} {only_a}".strip()
    combined_b = f"{inter} {only_b}".strip()
    return max(
        lev_ratio(inter, combined_a),
        lev_ratio(inter, combined_b),
        lev_ratio(combined_a, combined_b),
    )


@lru_cache(maxsize=8192)
def _cleaned_candidates(candidates: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(clean_text(c) for c in candidates)


# ---------------------------------------------------------------------------
# Schema-based metrics
# ---------------------------------------------------------------------------


def sim_levenshtein(column: ColumnProfile, attr: AttributeSpec) -> float:
    """Best normalized edit similarity of the header against name/synonyms."""
    header = column.header_clean
    return max(lev_ratio(header, c) for c in _cleaned_candidates(attr.candidates()))


def sim_jaccard(column: ColumnProfile, attr: AttributeSpec) -> float:
    """Best token-set Jaccard overlap against name/synonyms (no stopwords)."""
    tokens = column.tokens
    best = 0.0
    for cand in _cleaned_candidates(attr.candidates()):
        cand_tokens = frozenset(cand.split())
        if not tokens and not cand_tokens:
            score = 1.0
        elif not tokens or not cand_tokens:
            score = 0.0
        else:
            score = len(tokens & cand_tokens) / len(tokens | cand_tokens)
        best = max(best, score)
    return best


def sim_synonym(column: ColumnProfile, attr: AttributeSpec) -> float:
    """Best fuzzy token-set ratio against name/synonyms."""
    header = column.header_clean
    return max(token_set_ratio(header, c) for c in _cleaned_candidates(attr.candidates()))


# ---------------------------------------------------------------------------
# Instance-based metrics
# ---------------------------------------------------------------------------


def sim_numeric_type(column: ColumnProfile, attr: AttributeSpec) -> float:
    """Digit likelihood: 0.7 * has-digit fraction + 0.3 * starts-with-digit fraction."""
    values = column.values_nonmissing
    if not values:
        return 0.0
    has_digit = sum(1 for v in values if any(ch.isdigit() for ch in v)) / len(values)
    stripped = (v.lstrip() for v in values)
    starts = sum(1 for v in stripped if v[:1].isdigit()) / len(values)
    return 0.7 * has_digit + 0.3 * starts


def sim_date_type(column: ColumnProfile, attr: AttributeSpec) -> float:
    """Fraction of non-missing cells that parse as dates."""
    values = column.values_nonmissing
    if not values:
        return 0.0
    parsed = sum(1 for v in values if parse_date(v) is not None)
    return parsed / len(values)


def sim_range(column: ColumnProfile, attr: AttributeSpec) -> float:
    """Mean closeness (scaled by the IQR) plus in-quartile-range fraction."""
    prof = attr.numeric_profile
    if prof is None or not column.numeric_values or prof.iqr <= 0:
        return 0.0
    mu_s = column.mean
    closeness = max(0.0, 1.0 - abs(mu_s - prof.mean) / prof.iqr)
    inside = sum(1 for v in column.numeric_values if prof.q1 <= v <= prof.q3)
    return 0.5 * closeness + 0.5 * inside / len(column.numeric_values)


def _normal_cdf(x: float, mu: float, sigma: float) -> float:
    return 0.5 * (1.0 + math.erf((x - mu) / (sigma * math.sqrt(2.0))))


def sim_ks(column: ColumnProfile, attr: AttributeSpec) -> float:
    """One minus the one-sample Kolmogorov-Smirnov statistic.

    The target is the analytic Normal(mean, IQR/1.349) CDF implied by the
    attribute profile; using the analytic form keeps the score deterministic.
    D is the classic sup over sample points of the gap between the empirical
    CDF (evaluated on both sides of each step) and the target CDF.
    """
    prof = attr.numeric_profile
    if prof is None or not column.numeric_values or prof.iqr <= 0:
        return 0.0
    xs = sorted(column.numeric_values)
    n = len(xs)
    sigma = prof.sigma
    d = 0.0
    for i, x in enumerate(xs, start=1):
        target = _normal_cdf(x, prof.mean, sigma)
        d = max(d, abs(i / n - target), abs((i - 1) / n - target))
    return 1.0 - d


METRIC_FUNCS = {
    MetricId.LEVENSHTEIN: sim_levenshtein,
    MetricId.JACCARD: sim_jaccard,
    MetricId.SYNONYM: sim_synonym,
    MetricId.NUMERIC_TYPE: sim_numeric_type,
    MetricId.DATE_TYPE: sim_date_type,
    MetricId.RANGE: sim_range,
    MetricId.KS: sim_ks,
}


def compute_metric(metric: MetricId, column: ColumnProfile, attr: AttributeSpec) -> float:
    """Raw metric value; inapplicable metrics score 0 (weights handle exclusion)."""
    if not is_applicable(metric, attr):
        return 0.0
    return METRIC_FUNCS[metric](column, attr)


def metric_vector(column: ColumnProfile, attr: AttributeSpec) -> tuple[float, ...]:
    """All seven raw metric values in canonical order."""
    return tuple(compute_metric(m, column, attr) for m in METRIC_ORDER)
