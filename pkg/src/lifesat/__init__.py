"""Life-satisfaction prediction pipeline library."""

__version__ = "0.1.0"

from .data import (
    CLASS_NAMES,
    ColumnMeta,
    Dataset,
    ParseError,
    Schema,
    SplitPair,
    SynthSpec,
    generate_synthetic,
    missing_profile,
    parse_csv,
    shuffle_split,
    write_csv,
)

__all__ = [
    "CLASS_NAMES",
    "ColumnMeta",
    "Dataset",
    "ParseError",
    "Schema",
    "SplitPair",
    "SynthSpec",
    "generate_synthetic",
    "missing_profile",
    "parse_csv",
    "shuffle_split",
    "write_csv",
    "__version__",
]
