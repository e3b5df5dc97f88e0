"""Kabsch-Sander secondary-structure assignment (8- and 3-class).

Assigns one of {H, G, I, E, B, T, S, C} per residue from backbone hydrogen
bonds. A bond is declared between an N-H donor and a C=O acceptor when the
electrostatic energy

    E = 0.42 * 0.20 * 332 * (1/rON + 1/rCH - 1/rOH - 1/rCN)  [kcal/mol]

is below -0.5, with the amide H rebuilt from the previous residue's C=O
direction. Helices come from consecutive 3/4/5-turns (G/H/I), strands from
bridge ladders (B for a lone bridge, E otherwise, with beta-bulge linking),
T marks remaining turn spans and S high-curvature bends (CA pseudo-angle
above 70 degrees). Overlaps resolve with priority H > E/B > G > I > T > S.

Implementation notes kept for reviewers of edge-case diffs against other
assigners:

- Each donor keeps only its two lowest-energy bonds (energies rounded to
  3 decimals); prolines and chain-leading residues cannot donate.
- Residues with an incomplete backbone still occupy an output position
  ('C') but are excluded from hydrogen bonding.
- A chain break is declared when the peptide C-N distance exceeds 2.5 A
  (or either atom is absent); turns, bridges and bends never span breaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import kernels
from ..core import Residue, SS8_TO_SS3

__all__ = ["TooShortError", "InvalidSymbolError", "assign_dssp8", "collapse_to_3"]

HBOND_CUTOFF = -0.5
PEPTIDE_BOND_MAX = 2.5
BEND_ANGLE = 70.0
MAX_CA_DIST = 9.0

_FLAG_NONE, _FLAG_START, _FLAG_END, _FLAG_START_END, _FLAG_MIDDLE = range(5)


class TooShortError(ValueError):
    pass


class InvalidSymbolError(ValueError):
    pass


@dataclass
class _Ladder:
    kind: str  # "p" | "a"
    i_lo: int
    i_hi: int
    j_lo: int
    j_hi: int
    n_bridges: int = 1


class _Backbone:
    """Coordinate arrays, donor/acceptor masks and chain-break segments."""

    def __init__(self, residues: Sequence[Residue]):
        n = len(residues)
        self.n = n
        self.xyz = {name: np.zeros((n, 3)) for name in ("N", "CA", "C", "O")}
        self.has = {name: np.zeros(n, dtype=bool) for name in ("N", "CA", "C", "O")}
        self.complete = np.zeros(n, dtype=bool)
        self.is_pro = np.zeros(n, dtype=bool)
        for i, res in enumerate(residues):
            self.is_pro[i] = res.name.upper() == "PRO"
            for name in ("N", "CA", "C", "O"):
                atom = res.atoms.get(name)
                if atom is not None:
                    self.xyz[name][i] = atom
                    self.has[name][i] = True
            self.complete[i] = res.backbone_complete

        # linked[i]: peptide bond between residue i and i+1 is intact
        self.linked = np.zeros(max(n - 1, 0), dtype=bool)
        for i in range(n - 1):
            if self.has["C"][i] and self.has["N"][i + 1]:
                gap = np.linalg.norm(self.xyz["C"][i] - self.xyz["N"][i + 1])
                self.linked[i] = gap <= PEPTIDE_BOND_MAX
        self.segment = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            self.segment[i] = self.segment[i - 1] + (0 if self.linked[i - 1] else 1)

        # Amide H: one angstrom from N along the previous C=O direction.
        self.h_xyz = self.xyz["N"].copy()
        self.has_h = np.zeros(n, dtype=bool)
        for i in range(1, n):
            if not (self.linked[i - 1] and self.has["N"][i]):
                continue
            if not (self.has["C"][i - 1] and self.has["O"][i - 1]):
                continue
            co = self.xyz["C"][i - 1] - self.xyz["O"][i - 1]
            norm = np.linalg.norm(co)
            if norm > 0:
                self.h_xyz[i] = self.xyz["N"][i] + co / norm
                self.has_h[i] = True

    def same_segment(self, i: int, j: int) -> bool:
        return self.segment[i] == self.segment[j]


def _collect_bonds(bb: _Backbone) -> set[tuple[int, int]]:
    donor_ok = bb.complete & ~bb.is_pro & bb.has_h
    acceptor_ok = bb.complete
    idx, energy = kernels.hbond_best_two(
        bb.xyz["N"], bb.h_xyz, bb.xyz["C"], bb.xyz["O"],
        donor_ok.astype(np.uint8), acceptor_ok.astype(np.uint8),
        bb.xyz["CA"], MAX_CA_DIST,
    )
    bonds = set()
    for i in range(bb.n):
        for slot in range(2):
            j = int(idx[i, slot])
            if j >= 0 and energy[i, slot] < HBOND_CUTOFF:
                bonds.add((i, j))
    return bonds


def _helix_flags(bb: _Backbone, bonds, stride: int) -> np.ndarray:
    flags = np.full(bb.n, _FLAG_NONE, dtype=np.int64)
    for i in range(bb.n - stride):
        if (i + stride, i) in bonds and bb.same_segment(i, i + stride):
            flags[i + stride] = _FLAG_END
            for j in range(i + 1, i + stride):
                if flags[j] == _FLAG_NONE:
                    flags[j] = _FLAG_MIDDLE
            flags[i] = _FLAG_START_END if flags[i] == _FLAG_END else _FLAG_START
    return flags


def _is_start(flags: np.ndarray, i: int) -> bool:
    return flags[i] in (_FLAG_START, _FLAG_START_END)


def _bridge_type(bb, bonds, i, j):
    # donates(d, a) is (d, a) in bonds; K&S Hbond(a, d) == donates(d, a)
    if not (bb.same_segment(i - 1, i + 1) and bb.same_segment(j - 1, j + 1)):
        return None
    if (((i + 1, j) in bonds and (j, i - 1) in bonds)
            or ((j + 1, i) in bonds and (i, j - 1) in bonds)):
        return "p"
    if (((i + 1, j - 1) in bonds and (j + 1, i - 1) in bonds)
            or ((j, i) in bonds and (i, j) in bonds)):
        return "a"
    return None


def _find_bridges(bb: _Backbone, bonds) -> list[tuple[int, int, str]]:
    # Candidate (i, j) pairs are generated from bond endpoints instead of
    # scanning all O(n^2) pairs; each bridge pattern touches the bond set.
    candidates = set()
    for d, a in bonds:
        for i, j in (
            (d - 1, a), (a + 1, d), (a, d - 1), (d, a + 1),      # parallel
            (d - 1, a + 1), (a + 1, d - 1), (a, d), (d, a),      # antiparallel
        ):
            if i > j:
                i, j = j, i
            if 1 <= i and j >= i + 3 and j < bb.n - 1:
                candidates.add((i, j))
    bridges = []
    for i, j in sorted(candidates):
        kind = _bridge_type(bb, bonds, i, j)
        if kind is not None:
            bridges.append((i, j, kind))
    return bridges


def _build_ladders(bridges) -> list[_Ladder]:
    ladders: list[_Ladder] = []
    for i, j, kind in bridges:
        for lad in ladders:
            if kind != lad.kind or i != lad.i_hi + 1:
                continue
            if kind == "p" and j == lad.j_hi + 1:
                lad.i_hi, lad.j_hi = i, j
                lad.n_bridges += 1
                break
            if kind == "a" and j == lad.j_lo - 1:
                lad.i_hi, lad.j_lo = i, j
                lad.n_bridges += 1
                break
        else:
            ladders.append(_Ladder(kind, i, i, j, j))
    return ladders


def _merge_bulges(bb: _Backbone, ladders: list[_Ladder]) -> list[_Ladder]:
    # Two ladders of the same type are bulge-linked when separated by at
    # most one extra residue on one strand and at most four on the other.
    ladders = sorted(ladders, key=lambda L: (L.i_lo, L.j_lo))
    k = 0
    while k < len(ladders):
        m = k + 1
        merged_any = False
        while m < len(ladders):
            a, b = ladders[k], ladders[m]
            if a.kind != b.kind:
                m += 1
                continue
            if a.i_hi >= b.i_lo and a.i_lo <= b.i_hi:  # i-strand ranges overlap
                m += 1
                continue
            i_gap = b.i_lo - a.i_hi
            j_gap = (b.j_lo - a.j_hi) if a.kind == "p" else (a.j_lo - b.j_hi)
            if not (1 <= i_gap < 6 and j_gap >= 0):
                m += 1
                continue
            if not ((j_gap < 6 and i_gap < 3) or j_gap < 3):
                m += 1
                continue
            if not (bb.same_segment(min(a.i_lo, b.i_lo), max(a.i_hi, b.i_hi))
                    and bb.same_segment(min(a.j_lo, b.j_lo), max(a.j_hi, b.j_hi))):
                m += 1
                continue
            a.i_lo, a.i_hi = min(a.i_lo, b.i_lo), max(a.i_hi, b.i_hi)
            a.j_lo, a.j_hi = min(a.j_lo, b.j_lo), max(a.j_hi, b.j_hi)
            a.n_bridges += b.n_bridges
            del ladders[m]
            merged_any = True
        if not merged_any:
            k += 1
    return ladders


def _kappa_bend(bb: _Backbone, i: int) -> bool:
    if i < 2 or i > bb.n - 3:
        return False
    if not bb.same_segment(i - 2, i + 2):
        return False
    if not (bb.has["CA"][i - 2] and bb.has["CA"][i] and bb.has["CA"][i + 2]):
        return False
    u = bb.xyz["CA"][i] - bb.xyz["CA"][i - 2]
    v = bb.xyz["CA"][i + 2] - bb.xyz["CA"][i]
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return False
    cos_k = float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
    return np.degrees(np.arccos(cos_k)) > BEND_ANGLE


def assign_dssp8(residues: Sequence[Residue]) -> str:
    """Assign an 8-class secondary-structure letter to every residue.

    The output has exactly one symbol per input residue. Raises
    TooShortError for fewer than 2 residues.
    """
    n = len(residues)
    if n < 2:
        raise TooShortError(f"need at least 2 residues, got {n}")

    bb = _Backbone(residues)
    bonds = _collect_bonds(bb)

    ss = ["C"] * n

    # Strands first; the alpha-helix pass below may overwrite them (H > E).
    ladders = _merge_bulges(bb, _build_ladders(_find_bridges(bb, bonds)))
    for lad in ladders:
        code = "E" if lad.n_bridges > 1 else "B"
        for span in ((lad.i_lo, lad.i_hi), (lad.j_lo, lad.j_hi)):
            for idx in range(span[0], span[1] + 1):
                if ss[idx] != "E":
                    ss[idx] = code

    flags = {stride: _helix_flags(bb, bonds, stride) for stride in (3, 4, 5)}

    for i in range(1, n - 4):
        if _is_start(flags[4], i) and _is_start(flags[4], i - 1):
            for j in range(i, i + 4):
                ss[j] = "H"

    for i in range(1, n - 3):
        if _is_start(flags[3], i) and _is_start(flags[3], i - 1):
            if all(ss[j] in ("C", "G") for j in range(i, i + 3)):
                for j in range(i, i + 3):
                    ss[j] = "G"

    for i in range(1, n - 5):
        if _is_start(flags[5], i) and _is_start(flags[5], i - 1):
            if all(ss[j] in ("C", "I") for j in range(i, i + 5)):
                for j in range(i, i + 5):
                    ss[j] = "I"

    for i in range(1, n - 1):
        if ss[i] != "C":
            continue
        in_turn = False
        for stride in (3, 4, 5):
            for k in range(1, stride):
                if i - k >= 0 and _is_start(flags[stride], i - k):
                    in_turn = True
                    break
            if in_turn:
                break
        if in_turn:
            ss[i] = "T"
        elif _kappa_bend(bb, i):
            ss[i] = "S"

    return "".join(ss)


def collapse_to_3(ss8_seq: str) -> str:
    """Deterministic 8-to-3 class collapse: H/G/I -> H, E/B -> E, rest -> C.

    Loop spellings from other writers ('L', '-', ' ') collapse like C.
    """
    try:
        return "".join(SS8_TO_SS3[ch] for ch in ss8_seq)
    except KeyError as exc:
        raise InvalidSymbolError(f"not an 8-class symbol: {exc.args[0]!r}") from None
