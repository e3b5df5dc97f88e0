"""protforge: protein databank retrieval, structure tokenization, benchmark
dataset construction, token-budget batch packing, and evaluation metrics."""

from .core import (
    BenchmarkExample,
    Databank,
    DatabankId,
    MetricReport,
    ProteinRecord,
    StructureModel,
    TokenizedStructure,
    validate_example,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkExample",
    "Databank",
    "DatabankId",
    "MetricReport",
    "ProteinRecord",
    "StructureModel",
    "TokenizedStructure",
    "validate_example",
    "__version__",
]
