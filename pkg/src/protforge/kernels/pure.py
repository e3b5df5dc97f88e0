"""NumPy implementations of the hot kernels.

These are the fallback for :mod:`protforge.kernels._native`; both backends
implement the same contracts:

- ``hbond_best_two``            : per-donor two lowest hydrogen-bond energies
- ``nearest_centroids``         : nearest-codebook-entry assignment
- ``nearest_spatial_neighbors`` : per-residue closest CA with sequence gap

Tie-breaking is always toward the lowest index so that results do not depend
on the backend.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"

# Kabsch-Sander electrostatic model: E = q1*q2*f * (1/rON + 1/rCH - 1/rOH - 1/rCN)
# with q1*q2*f = 0.42 * 0.20 * 332 kcal/mol. Energies are clamped below at
# -9.9, forced to -9.9 when any distance collapses under 0.5 A, and rounded
# to 3 decimals before comparisons.
COUPLING = 0.42 * 0.20 * 332.0
MIN_DIST = 0.5
ENERGY_FLOOR = -9.9
_CHUNK = 512


def _round3(values):
    # floor(x*1000 + 0.5) / 1000, identical to the native kernel's rounding
    return np.floor(values * 1000.0 + 0.5) / 1000.0


def hbond_best_two(n_xyz, h_xyz, c_xyz, o_xyz, donor_ok, acceptor_ok, ca_xyz,
                   max_ca_dist=9.0):
    """For each donor residue, the two lowest-energy acceptors.

    Parameters are (n, 3) float64 coordinate arrays (rows may be garbage
    where the corresponding mask is false) plus boolean masks. Only pairs
    i != j whose CA atoms lie within ``max_ca_dist`` are considered.

    Returns ``(idx, energy)`` of shapes (n, 2): ``idx[i, 0]`` is the best
    acceptor for donor ``i`` (or -1), ``energy`` the rounded energies
    (0.0 where there is no candidate).
    """
    n = len(ca_xyz)
    best_idx = np.full((n, 2), -1, dtype=np.int64)
    best_e = np.zeros((n, 2), dtype=np.float64)
    if n == 0:
        return best_idx, best_e

    acceptor_cols = np.flatnonzero(acceptor_ok)
    if len(acceptor_cols) == 0:
        return best_idx, best_e

    c_acc = c_xyz[acceptor_cols]
    o_acc = o_xyz[acceptor_cols]
    ca_acc = ca_xyz[acceptor_cols]

    donor_rows = np.flatnonzero(donor_ok)
    for start in range(0, len(donor_rows), _CHUNK):
        rows = donor_rows[start:start + _CHUNK]
        ca_d = ca_xyz[rows][:, None, :]
        within = np.linalg.norm(ca_d - ca_acc[None, :, :], axis=-1) < max_ca_dist
        within &= rows[:, None] != acceptor_cols[None, :]
        # the reconstructed H points away from the previous carbonyl, so a
        # bond back to residue i-1 is a geometric artifact: excluded
        within &= acceptor_cols[None, :] != rows[:, None] - 1
        if not within.any():
            continue

        h_d = h_xyz[rows][:, None, :]
        n_d = n_xyz[rows][:, None, :]
        d_ho = np.linalg.norm(h_d - o_acc[None, :, :], axis=-1)
        d_hc = np.linalg.norm(h_d - c_acc[None, :, :], axis=-1)
        d_no = np.linalg.norm(n_d - o_acc[None, :, :], axis=-1)
        d_nc = np.linalg.norm(n_d - c_acc[None, :, :], axis=-1)

        with np.errstate(divide="ignore"):
            energy = COUPLING * (1.0 / d_no + 1.0 / d_hc - 1.0 / d_ho - 1.0 / d_nc)
        collapsed = (
            (d_ho < MIN_DIST) | (d_hc < MIN_DIST)
            | (d_no < MIN_DIST) | (d_nc < MIN_DIST)
        )
        energy = np.where(collapsed, ENERGY_FLOOR, energy)
        energy = _round3(np.maximum(energy, ENERGY_FLOOR))
        energy = np.where(within, energy, np.inf)

        order = np.argsort(energy, axis=1, kind="stable")[:, :2]
        top = np.take_along_axis(energy, order, axis=1)
        for slot in range(2):
            hit = np.isfinite(top[:, slot]) & (top[:, slot] < 0.0)
            best_idx[rows[hit], slot] = acceptor_cols[order[hit, slot]]
            best_e[rows[hit], slot] = top[hit, slot]
    return best_idx, best_e


def nearest_centroids(points, centroids):
    """Index of the closest centroid (squared Euclidean) per point.

    Ties resolve to the lowest centroid index.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    out = np.empty(len(points), dtype=np.int64)
    for start in range(0, len(points), _CHUNK * 8):
        block = points[start:start + _CHUNK * 8]
        diff = block[:, None, :] - centroids[None, :, :]
        d2 = np.einsum("nkd,nkd->nk", diff, diff)
        out[start:start + _CHUNK * 8] = np.argmin(d2, axis=1)
    return out


def nearest_spatial_neighbors(ca_xyz, min_sep=2):
    """Per residue, the index of the closest CA at sequence distance
    >= ``min_sep``; residues with no eligible partner map to themselves.

    Distances are compared on a 1e-6 angstrom grid with ties resolved to
    the lowest index, so exactly symmetric geometries (ideal helices) pick
    the same partner under any rigid motion of the input.
    """
    ca_xyz = np.ascontiguousarray(ca_xyz, dtype=np.float64)
    n = len(ca_xyz)
    out = np.arange(n, dtype=np.int64)
    if n == 0:
        return out
    idx = np.arange(n)
    for start in range(0, n, _CHUNK):
        block = ca_xyz[start:start + _CHUNK]
        rows = idx[start:start + _CHUNK]
        dist = np.linalg.norm(block[:, None, :] - ca_xyz[None, :, :], axis=-1)
        dist = np.floor(dist * 1e6 + 0.5)
        dist[np.abs(rows[:, None] - idx[None, :]) < min_sep] = np.inf
        nearest = np.argmin(dist, axis=1)
        eligible = np.isfinite(dist[np.arange(len(rows)), nearest])
        out[rows[eligible]] = nearest[eligible]
    return out
