"""Vector-quantization codebook for the 20-symbol structural alphabet.

The codebook is trained with seeded k-means (k-means++ initialization,
Lloyd iterations) over residue descriptors and maps each residue to the
letter of its nearest centroid. Training is single-threaded and bitwise
deterministic for a fixed seed.

Pretrained token strings from an external structural tokenizer can be
attached verbatim to dataset records instead; integer token sequences are
validated by :func:`import_int_tokens`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .. import kernels
from ..core import Residue, STRUCTURAL_ALPHABET, TokenizedStructure
from .descriptors import compute_descriptors
from .dssp import assign_dssp8, collapse_to_3

__all__ = [
    "Codebook",
    "InsufficientDataError",
    "OutOfRangeError",
    "LengthMismatchError",
    "train_codebook",
    "tokenize_structure",
    "tokenize_chain",
    "import_int_tokens",
]

KMEANS_TOL = 1e-6
KMEANS_MAX_ITER = 200
INT_TOKEN_MAX = 4095


class InsufficientDataError(ValueError):
    pass


class OutOfRangeError(ValueError):
    pass


class LengthMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Codebook:
    """k centroids of descriptor space plus their symbol letters."""

    centroids: np.ndarray  # (k, dim) float64
    symbols: str

    def __post_init__(self):
        object.__setattr__(
            self, "centroids",
            np.ascontiguousarray(self.centroids, dtype=np.float64))
        k = len(self.centroids)
        if k < 2:
            raise ValueError("codebook needs at least 2 centroids")
        if len(self.symbols) != k or len(set(self.symbols)) != k:
            raise ValueError("symbols must be distinct letters, one per centroid")
        uniq = np.unique(self.centroids, axis=0)
        if len(uniq) != k:
            raise ValueError("centroids must be pairwise distinct")

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def assign(self, descriptors: np.ndarray) -> np.ndarray:
        return kernels.nearest_centroids(descriptors, self.centroids)

    def to_json(self) -> str:
        payload = {
            "k": self.k,
            "dim": self.dim,
            "centroids": self.centroids.tolist(),
            "symbols": self.symbols,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        payload = json.loads(text)
        centroids = np.asarray(payload["centroids"], dtype=np.float64)
        if centroids.shape != (payload["k"], payload["dim"]):
            raise ValueError("centroid matrix shape disagrees with k/dim")
        return cls(centroids=centroids, symbols=payload["symbols"])

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Codebook":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _kmeans_pp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(data)
    centroids = np.empty((k, data.shape[1]))
    centroids[0] = data[rng.integers(n)]
    d2 = ((data - centroids[0]) ** 2).sum(axis=1)
    for m in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with chosen centroids
            raise InsufficientDataError("fewer distinct descriptors than k")
        centroids[m] = data[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((data - centroids[m]) ** 2).sum(axis=1))
    return centroids


def train_codebook(descriptor_sets: Iterable[np.ndarray], k: int = 20,
                   seed: int = 0, symbols: Optional[str] = None) -> Codebook:
    """Fit a k-means codebook over one or more descriptor matrices.

    Deterministic for a fixed seed: k-means++ seeding, then Lloyd updates
    until the largest centroid shift drops below 1e-6 or 200 iterations.
    Raises InsufficientDataError when there are fewer than k distinct
    descriptor vectors.
    """
    data = np.concatenate([np.asarray(d, dtype=np.float64) for d in descriptor_sets])
    if data.ndim != 2:
        raise ValueError("descriptors must form a 2D matrix")
    if len(np.unique(data, axis=0)) < k:
        raise InsufficientDataError(
            f"need at least {k} distinct descriptors, got fewer")

    if symbols is None:
        if k > len(STRUCTURAL_ALPHABET):
            raise ValueError("k exceeds the default alphabet; pass symbols")
        symbols = STRUCTURAL_ALPHABET[:k]

    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(data, k, rng)

    for _ in range(KMEANS_MAX_ITER):
        assignment = kernels.nearest_centroids(data, centroids)
        new_centroids = centroids.copy()
        counts = np.bincount(assignment, minlength=k)
        for m in range(k):
            if counts[m] > 0:
                new_centroids[m] = data[assignment == m].mean(axis=0)
        for m in np.flatnonzero(counts == 0):
            # deterministic reseed: point farthest from its centroid
            dist = ((data - new_centroids[assignment]) ** 2).sum(axis=1)
            new_centroids[m] = data[int(np.argmax(dist))]
        shift = np.abs(new_centroids - centroids).max()
        centroids = new_centroids
        if shift < KMEANS_TOL:
            break

    return Codebook(centroids=centroids, symbols=symbols)


def tokenize_structure(residues: Sequence[Residue], codebook: Codebook) -> str:
    """One alphabet letter per residue: nearest centroid of its descriptor.

    Ties break toward the lowest centroid index.
    """
    descriptors = compute_descriptors(residues)
    if descriptors.shape[1] != codebook.dim:
        raise ValueError(
            f"descriptor dim {descriptors.shape[1]} != codebook dim {codebook.dim}")
    assignment = codebook.assign(descriptors)
    return "".join(codebook.symbols[m] for m in assignment)


def import_int_tokens(values: Sequence[int], seq_len: int) -> tuple[int, ...]:
    """Validate an externally produced integer token sequence.

    Accepts only integers in [0, 4095] with length equal to ``seq_len``.
    """
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise OutOfRangeError(f"token {v!r} is not an integer")
        if not 0 <= v <= INT_TOKEN_MAX:
            raise OutOfRangeError(f"token {v} outside [0, {INT_TOKEN_MAX}]")
    if len(values) != seq_len:
        raise LengthMismatchError(
            f"{len(values)} tokens for sequence of length {seq_len}")
    return tuple(int(v) for v in values)


def tokenize_chain(residues: Sequence[Residue], codebook: Codebook,
                   imported: Optional[Sequence[int]] = None) -> TokenizedStructure:
    """All discrete serializations of one chain in a single record."""
    ss8 = assign_dssp8(residues)
    return TokenizedStructure(
        ss8_seq=ss8,
        alphabet_seq=tokenize_structure(residues, codebook),
        ss3_seq=collapse_to_3(ss8),
        imported_int_seq=(import_int_tokens(imported, len(residues))
                         if imported is not None else None),
    )
