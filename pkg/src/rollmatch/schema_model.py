"""Target-schema template: typed attributes enriched with synonyms and statistical profiles.

The template is the anchor every source layout is aligned to.  It is loaded
from a YAML document, validated, and enriched with derived statistics
(mean/quartiles by linear interpolation, a normal-scale sigma from the IQR)
that the instance-based similarity metrics consume.
"""

from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass, field, replace
from datetime import date

import yaml

# Quartile spacing of a standard normal distribution; converts an IQR into a
# normal-scale sigma for the distribution-shape metric.
IQR_TO_SIGMA = 1.349


class SchemaValidationError(ValueError):
    """A schema document violates a structural invariant."""


class DataType(enum.Enum):
    STRING = "STRING"
    DECIMAL = "DECIMAL"
    DATE = "DATE"


@dataclass(frozen=True)
class NumericProfile:
    """Typical value range of a DECIMAL attribute (unit-free)."""

    min: float
    max: float
    mean: float | None = None
    q1: float | None = None
    q3: float | None = None

    @property
    def iqr(self) -> float:
        if self.q1 is None or self.q3 is None:
            raise ValueError("profile statistics not derived yet")
        return self.q3 - self.q1

    @property
    def sigma(self) -> float:
        """Normal-scale spread implied by the IQR."""
        return self.iqr / IQR_TO_SIGMA


@dataclass(frozen=True)
class DateProfile:
    """Typical calendar range of a DATE attribute (day precision)."""

    min_date: date
    max_date: date


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    data_type: DataType
    synonyms: tuple[str, ...] = ()
    numeric_profile: NumericProfile | None = None
    date_profile: DateProfile | None = None

    def candidates(self) -> tuple[str, ...]:
        """Strings participating in name-based metrics: the name plus synonyms."""
        return (self.name,) + self.synonyms


@dataclass(frozen=True)
class TargetSchema:
    attributes: tuple[AttributeSpec, ...]
    version: str = "1"

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes]
        if len(names) != len(set(names)):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise SchemaValidationError(f"duplicate attribute name(s): {', '.join(dup)}")

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def attribute(self, name: str) -> AttributeSpec:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(name)


def normalize_name(raw: str) -> str:
    """Lowercase snake_case form of an attribute name."""
    s = re.sub(r"[^0-9a-zA-Z]+", "_", raw.strip().lower())
    return s.strip("_")


def derive_stats(spec: AttributeSpec) -> AttributeSpec:
    """Fill missing mean/q1/q3 of a numeric profile by linear interpolation.

    Explicitly provided values are never overwritten.  mean = (min+max)/2,
    q1/q3 at one and three quarters of the span.
    """
    prof = spec.numeric_profile
    if prof is None:
        return spec
    if prof.min > prof.max:
        raise SchemaValidationError(
            f"attribute '{spec.name}': numeric range min {prof.min} > max {prof.max}"
        )
    span = prof.max - prof.min
    derived = NumericProfile(
        min=prof.min,
        max=prof.max,
        mean=prof.mean if prof.mean is not None else prof.min + 0.5 * span,
        q1=prof.q1 if prof.q1 is not None else prof.min + 0.25 * span,
        q3=prof.q3 if prof.q3 is not None else prof.min + 0.75 * span,
    )
    return replace(spec, numeric_profile=derived)


def _validate_attribute(spec: AttributeSpec) -> None:
    if not spec.name:
        raise SchemaValidationError("attribute with empty name")
    if spec.data_type is DataType.DECIMAL:
        p = spec.numeric_profile
        if p is None:
            raise SchemaValidationError(
                f"attribute '{spec.name}': DECIMAL requires a numeric range"
            )
        if not (p.min <= p.q1 <= p.mean <= p.q3 <= p.max):
            raise SchemaValidationError(
                f"attribute '{spec.name}': numeric profile not ordered "
                f"(min {p.min} <= q1 {p.q1} <= mean {p.mean} <= q3 {p.q3} <= max {p.max})"
            )
    if spec.data_type is DataType.DATE:
        p = spec.date_profile
        if p is None:
            raise SchemaValidationError(
                f"attribute '{spec.name}': DATE requires a date range"
            )
        if p.min_date > p.max_date:
            raise SchemaValidationError(
                f"attribute '{spec.name}': date range min {p.min_date} > max {p.max_date}"
            )


_KNOWN_ATTR_KEYS = {"name", "type", "synonyms", "range", "date_range"}
_KNOWN_RANGE_KEYS = {"min", "max", "mean", "q1", "q3"}


def _parse_date_value(value: object, context: str) -> date:
    if isinstance(value, date):
        return value
    if isinstance(value, str):
        try:
            return date.fromisoformat(value)
        except ValueError as exc:
            raise SchemaValidationError(f"{context}: bad date '{value}'") from exc
    raise SchemaValidationError(f"{context}: bad date '{value!r}'")


def load_schema(document: str) -> TargetSchema:
    """Parse and validate a schema YAML document.

    Attribute names are normalized to snake_case; synonyms are kept verbatim
    (metrics clean them at comparison time).  Unknown keys produce a warning,
    not an error.
    """
    try:
        data = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise SchemaValidationError(f"malformed YAML: {exc}") from exc
    if not isinstance(data, dict) or "attributes" not in data:
        raise SchemaValidationError("schema document must have a top-level 'attributes' list")
    raw_attrs = data["attributes"]
    if not isinstance(raw_attrs, list) or not raw_attrs:
        raise SchemaValidationError("schema has no attributes")

    attrs: list[AttributeSpec] = []
    for entry in raw_attrs:
        if not isinstance(entry, dict):
            raise SchemaValidationError(f"attribute entry is not a mapping: {entry!r}")
        unknown = set(entry) - _KNOWN_ATTR_KEYS
        if unknown:
            warnings.warn(
                f"attribute '{entry.get('name', '?')}': ignoring unknown keys {sorted(unknown)}",
                stacklevel=2,
            )
        name = normalize_name(str(entry.get("name", "")))
        if not name:
            raise SchemaValidationError("attribute with empty name")
        try:
            dtype = DataType(str(entry.get("type", "")).upper())
        except ValueError as exc:
            raise SchemaValidationError(
                f"attribute '{name}': unknown type '{entry.get('type')}'"
            ) from exc
        synonyms = tuple(str(s) for s in entry.get("synonyms") or ())

        numeric = None
        if entry.get("range") is not None:
            rng = entry["range"]
            if not isinstance(rng, dict) or "min" not in rng or "max" not in rng:
                raise SchemaValidationError(f"attribute '{name}': range needs min and max")
            unknown_rng = set(rng) - _KNOWN_RANGE_KEYS
            if unknown_rng:
                warnings.warn(
                    f"attribute '{name}': ignoring unknown range keys {sorted(unknown_rng)}",
                    stacklevel=2,
                )
            numeric = NumericProfile(
                min=float(rng["min"]),
                max=float(rng["max"]),
                mean=float(rng["mean"]) if rng.get("mean") is not None else None,
                q1=float(rng["q1"]) if rng.get("q1") is not None else None,
                q3=float(rng["q3"]) if rng.get("q3") is not None else None,
            )

        dates = None
        if entry.get("date_range") is not None:
            dr = entry["date_range"]
            if not isinstance(dr, dict) or "min" not in dr or "max" not in dr:
                raise SchemaValidationError(f"attribute '{name}': date_range needs min and max")
            dates = DateProfile(
                min_date=_parse_date_value(dr["min"], f"attribute '{name}'"),
                max_date=_parse_date_value(dr["max"], f"attribute '{name}'"),
            )

        spec = AttributeSpec(
            name=name,
            data_type=dtype,
            synonyms=synonyms,
            numeric_profile=numeric,
            date_profile=dates,
        )
        spec = derive_stats(spec)
        _validate_attribute(spec)
        attrs.append(spec)

    return TargetSchema(attributes=tuple(attrs), version=str(data.get("version", "1")))


def load_schema_file(path) -> TargetSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return load_schema(fh.read())


def dump_schema(schema: TargetSchema) -> str:
    """Serialize a schema back to YAML; reloading yields an identical schema."""
    out: dict = {"version": schema.version, "attributes": []}
    for a in schema.attributes:
        entry: dict = {
            "name": a.name,
            "type": a.data_type.value,
            "synonyms": list(a.synonyms),
        }
        if a.numeric_profile is not None:
            p = a.numeric_profile
            entry["range"] = {"min": p.min, "max": p.max, "mean": p.mean, "q1": p.q1, "q3": p.q3}
        if a.date_profile is not None:
            entry["date_range"] = {
                "min": a.date_profile.min_date.isoformat(),
                "max": a.date_profile.max_date.isoformat(),
            }
        out["attributes"].append(entry)
    return yaml.safe_dump(out, sort_keys=False, allow_unicode=True)
