"""Per-residue geometric descriptors for structural-alphabet tokenization.

Each residue i is described relative to its spatial nearest neighbor j
(closest CA with sequence separation >= 2). The 10 features are:

    0  d(CA[i-1], CA[i+1])
    1  d(CA[i],   CA[j])
    2  d(CA[i-1], CA[j])
    3  d(CA[i+1], CA[j])
    4  d(CB*[i],  CB*[j])          virtual C-beta
    5-8  cosines of the four pseudo-dihedrals (x, CA[i], CA[j], y)
         for x in {CA[i-1], CA[i+1]}, y in {CA[j-1], CA[j+1]}
    9  log1p(|i - j|)              sequence separation

Distances are in angstroms. Terminal residues clamp i-1/i+1 (and j-1/j+1)
to the chain; a residue with no eligible neighbor (only possible for very
short chains) pairs with itself and gets zero interaction features. All
features depend only on differences of coordinates, so they are exactly
invariant under rigid motion.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels
from ..core import Residue
from .dssp import TooShortError

__all__ = ["DESCRIPTOR_DIM", "compute_descriptors", "virtual_cbeta"]

DESCRIPTOR_DIM = 10


def virtual_cbeta(n_xyz: np.ndarray, ca_xyz: np.ndarray, c_xyz: np.ndarray) -> np.ndarray:
    """Ideal tetrahedral C-beta from backbone N, CA, C (rows of shape (n, 3)).

    Glycine and real side chains are treated uniformly. Rows where N or C
    is not finite fall back to CA.
    """
    b = ca_xyz - n_xyz
    c = c_xyz - ca_xyz
    a = np.cross(b, c)
    cb = -0.58273431 * a + 0.56802827 * b - 0.54067466 * c + ca_xyz
    bad = ~np.isfinite(cb).all(axis=1)
    if bad.any():
        cb[bad] = ca_xyz[bad]
    return cb


def _dihedral_cos_rows(p0, p1, p2, p3) -> np.ndarray:
    """Row-wise cosine of the dihedral (p0, p1, p2, p3); 0 when degenerate."""
    n1 = np.cross(p1 - p0, p2 - p1)
    n2 = np.cross(p2 - p1, p3 - p2)
    denom = np.linalg.norm(n1, axis=1) * np.linalg.norm(n2, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.einsum("nd,nd->n", n1, n2) / denom
    return np.where(denom < 1e-12, 0.0, np.clip(cos, -1.0, 1.0))


def compute_descriptors(residues: Sequence[Residue]) -> np.ndarray:
    """Descriptor matrix of shape (len(residues), 10).

    Requires at least 3 residues, each with a CA atom (TooShortError /
    ValueError otherwise).
    """
    n = len(residues)
    if n < 3:
        raise TooShortError(f"need at least 3 residues, got {n}")

    ca = np.zeros((n, 3))
    n_at = np.full((n, 3), np.nan)
    c_at = np.full((n, 3), np.nan)
    for i, res in enumerate(residues):
        xyz = res.atoms.get("CA")
        if xyz is None:
            raise ValueError(f"residue {res.index} ({res.name}) has no CA atom")
        ca[i] = xyz
        if (v := res.atoms.get("N")) is not None:
            n_at[i] = v
        if (v := res.atoms.get("C")) is not None:
            c_at[i] = v

    cb = virtual_cbeta(n_at, ca, c_at)
    j = kernels.nearest_spatial_neighbors(ca, 2)

    idx = np.arange(n)
    p = np.maximum(idx - 1, 0)
    q = np.minimum(idx + 1, n - 1)
    jp = np.maximum(j - 1, 0)
    jq = np.minimum(j + 1, n - 1)

    def d(a, b):
        return np.linalg.norm(a - b, axis=1)

    out = np.empty((n, DESCRIPTOR_DIM))
    out[:, 0] = d(ca[p], ca[q])
    out[:, 1] = d(ca, ca[j])
    out[:, 2] = d(ca[p], ca[j])
    out[:, 3] = d(ca[q], ca[j])
    out[:, 4] = d(cb, cb[j])
    out[:, 5] = _dihedral_cos_rows(ca[p], ca, ca[j], ca[jp])
    out[:, 6] = _dihedral_cos_rows(ca[p], ca, ca[j], ca[jq])
    out[:, 7] = _dihedral_cos_rows(ca[q], ca, ca[j], ca[jp])
    out[:, 8] = _dihedral_cos_rows(ca[q], ca, ca[j], ca[jq])
    out[:, 9] = np.log1p(np.abs(idx - j))
    return out
