"""Structure serialization: secondary structure and structural-alphabet tokens."""

from .codebook import (
    Codebook,
    InsufficientDataError,
    LengthMismatchError,
    OutOfRangeError,
    import_int_tokens,
    tokenize_chain,
    tokenize_structure,
    train_codebook,
)
from .descriptors import DESCRIPTOR_DIM, compute_descriptors, virtual_cbeta
from .dssp import InvalidSymbolError, TooShortError, assign_dssp8, collapse_to_3

__all__ = [
    "Codebook",
    "DESCRIPTOR_DIM",
    "InsufficientDataError",
    "InvalidSymbolError",
    "LengthMismatchError",
    "OutOfRangeError",
    "TooShortError",
    "assign_dssp8",
    "collapse_to_3",
    "compute_descriptors",
    "import_int_tokens",
    "tokenize_chain",
    "tokenize_structure",
    "train_codebook",
    "virtual_cbeta",
]
