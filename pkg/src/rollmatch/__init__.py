"""Template-based hybrid schema matching for multi-layout tenancy schedules."""

__version__ = "0.1.0"

from .schema_model import AttributeSpec, DataType, TargetSchema, load_schema, load_schema_file
from .ingest import SourceTable, ColumnProfile, load_table, load_manifest
from .matcher import WeightConfig, WeightMode, build_matrix, assign, project_table
from .optimizer import GroundTruth, GridSpec, SearchMode, precompute_tensor, evaluate_config

__all__ = [
    "AttributeSpec",
    "DataType",
    "TargetSchema",
    "load_schema",
    "load_schema_file",
    "SourceTable",
    "ColumnProfile",
    "load_table",
    "load_manifest",
    "WeightConfig",
    "WeightMode",
    "build_matrix",
    "assign",
    "project_table",
    "GroundTruth",
    "GridSpec",
    "SearchMode",
    "precompute_tensor",
    "evaluate_config",
]
