"""Shared domain types and the benchmark record schema.

Every other module either produces or consumes these types:

- ``DatabankId``       : typed accession for one of the four supported databanks.
- ``ProteinRecord``    : one protein (sequence + optional structure + metadata).
- ``Chain`` / ``Residue`` / ``StructureModel`` : parsed 3D coordinates.
- ``TokenizedStructure`` : the discrete serializations of one structure.
- ``BenchmarkExample`` : one row of the standard dataset schema.
- ``MetricReport``     : named metric values for one evaluation.

Records are stored on disk as JSON-lines, one ``BenchmarkExample`` per line,
UTF-8, using exactly the canonical field names (``aa_seq``, ``label``,
``name``, ``ss3_seq``, ``ss8_seq``, ``foldseek_seq``, ``esm3_structure_seq``,
``detail``).  Unknown keys are preserved verbatim in ``extra`` instead of
being rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

__all__ = [
    "AA_ALPHABET",
    "SS8_ALPHABET",
    "SS3_ALPHABET",
    "STRUCTURAL_ALPHABET",
    "EXAMPLE_FIELDS",
    "METRIC_NAMES",
    "Databank",
    "DatabankId",
    "ProteinRecord",
    "Residue",
    "Chain",
    "StructureModel",
    "TokenizedStructure",
    "BenchmarkExample",
    "MetricReport",
    "validate_example",
    "examples_to_jsonl",
    "examples_from_jsonl",
    "examples_to_csv",
    "write_jsonl",
    "read_jsonl",
]

# 20 standard residues plus X for unknown.
AA_ALPHABET = frozenset("ACDEFGHIKLMNPQRSTVWYX")

SS8_ALPHABET = "HGIEBTSC"
SS3_ALPHABET = "HEC"

# 8-to-3 class collapse; 'L', '-' and ' ' are loop spellings used by other
# secondary-structure writers and collapse like C.
SS8_TO_SS3 = {
    "H": "H", "G": "H", "I": "H",
    "E": "E", "B": "E",
    "T": "C", "S": "C", "C": "C",
    "L": "C", "-": "C", " ": "C",
}

# Default 20-symbol structural alphabet (one letter per codebook centroid).
STRUCTURAL_ALPHABET = "ACDEFGHIKLMNPQRSTVWY"

# Canonical record fields, in serialization order.
EXAMPLE_FIELDS = (
    "aa_seq",
    "label",
    "name",
    "ss3_seq",
    "ss8_seq",
    "foldseek_seq",
    "esm3_structure_seq",
    "detail",
)

METRIC_NAMES = frozenset(
    {
        "accuracy",
        "recall",
        "precision",
        "f1",
        "mcc",
        "auc",
        "f1_max",
        "spearman_corr",
        "mse",
    }
)

_UNIPROT_RE = re.compile(r"^[A-Za-z0-9]+$")
_RCSB_RE = re.compile(r"^[A-Za-z0-9]{4}$")
_INTERPRO_RE = re.compile(r"^IPR[0-9]+$")


class Databank(str, Enum):
    """The four supported data sources."""

    UNIPROT = "uniprot"
    RCSB_PDB = "rcsb"
    INTERPRO = "interpro"
    ALPHAFOLD_DB = "alphafold"


@dataclass(frozen=True)
class DatabankId:
    """A typed accession, e.g. UniProt ``A0A0C5B5G6`` or RCSB ``1A00``.

    Raises ``ValueError`` on construction if the accession does not match
    the databank's syntax: UniProt/AlphaFold accessions are non-empty
    alphanumeric, RCSB accessions are exactly 4 alphanumeric characters,
    and InterPro accessions are ``IPR`` followed by digits.
    """

    kind: Databank
    accession: str

    def __post_init__(self):
        acc = self.accession
        if self.kind in (Databank.UNIPROT, Databank.ALPHAFOLD_DB):
            ok = bool(acc) and _UNIPROT_RE.match(acc)
        elif self.kind is Databank.RCSB_PDB:
            ok = bool(_RCSB_RE.match(acc))
        else:
            ok = bool(_INTERPRO_RE.match(acc))
        if not ok:
            raise ValueError(f"invalid {self.kind.value} accession: {acc!r}")

    def __str__(self):
        return f"{self.kind.value}:{self.accession}"


@dataclass(frozen=True)
class Residue:
    """One residue: index, 3-letter name, and named atom coordinates (Å)."""

    index: int
    name: str
    atoms: Mapping[str, tuple[float, float, float]]
    icode: str = ""

    @property
    def backbone_complete(self) -> bool:
        return all(a in self.atoms for a in ("N", "CA", "C", "O"))

    def atom(self, name: str) -> Optional[tuple[float, float, float]]:
        return self.atoms.get(name)


@dataclass(frozen=True)
class Chain:
    chain_id: str
    residues: tuple[Residue, ...]


@dataclass(frozen=True)
class StructureModel:
    """Parsed 3D coordinates: chains -> residues -> named atoms.

    ``confidence`` carries per-residue pLDDT values in [0, 100] when the
    source file looks like a structure-prediction product (all B-factors in
    that range); order matches the concatenation of chain residues.
    """

    chains: tuple[Chain, ...]
    source_format: str  # "pdb" | "mmcif"
    confidence: Optional[tuple[float, ...]] = None
    entry_id: str = ""

    def __post_init__(self):
        for chain in self.chains:
            for res in chain.residues:
                for name, xyz in res.atoms.items():
                    if not all(math.isfinite(v) for v in xyz):
                        raise ValueError(
                            f"non-finite coordinate for atom {name!r} in "
                            f"residue {res.index} of chain {chain.chain_id}"
                        )
        if self.confidence is not None:
            for v in self.confidence:
                if not (0.0 <= v <= 100.0):
                    raise ValueError(f"pLDDT value out of [0,100]: {v}")

    def chain(self, chain_id: Optional[str] = None) -> Chain:
        if chain_id is None:
            return self.chains[0]
        for c in self.chains:
            if c.chain_id == chain_id:
                return c
        raise KeyError(chain_id)

    @property
    def n_residues(self) -> int:
        return sum(len(c.residues) for c in self.chains)


@dataclass(frozen=True)
class ProteinRecord:
    """One protein: identifier, sequence, optional structure, metadata."""

    id: DatabankId
    aa_seq: str
    structure: Optional[StructureModel] = None
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.aa_seq) < 1:
            raise ValueError("aa_seq must be non-empty")
        bad = set(self.aa_seq) - AA_ALPHABET
        if bad:
            raise ValueError(f"aa_seq contains non-amino-acid letters: {sorted(bad)}")


@dataclass(frozen=True)
class TokenizedStructure:
    """Discrete serializations of one structure, all of identical length.

    ``ss3_seq`` is the deterministic class collapse of ``ss8_seq`` and is
    derived automatically when not given.
    """

    ss8_seq: str
    alphabet_seq: str
    ss3_seq: Optional[str] = None
    imported_int_seq: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.ss3_seq is None:
            try:
                derived = "".join(SS8_TO_SS3[ch] for ch in self.ss8_seq)
            except KeyError as exc:
                raise ValueError(
                    f"cannot collapse symbol {exc.args[0]!r} to 3 classes") from None
            object.__setattr__(self, "ss3_seq", derived)
        n = len(self.ss8_seq)
        if len(self.ss3_seq) != n or len(self.alphabet_seq) != n:
            raise ValueError("token sequences must have identical lengths")
        if self.imported_int_seq is not None and len(self.imported_int_seq) != n:
            raise ValueError("imported_int_seq length mismatch")


Label = Union[int, float, list]


@dataclass
class BenchmarkExample:
    """One dataset row.

    ``aa_seq`` and ``label`` are required; the remaining fields are optional.
    ``extra`` holds unknown keys found in a record so that round-tripping a
    file written by other tooling is lossless.
    """

    aa_seq: str
    label: Label
    name: Optional[str] = None
    ss3_seq: Optional[str] = None
    ss8_seq: Optional[str] = None
    foldseek_seq: Optional[str] = None
    esm3_structure_seq: Optional[list[int]] = None
    detail: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {}
        for key in EXAMPLE_FIELDS:
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        out.update(self.extra)
        return out

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "BenchmarkExample":
        known = {k: payload[k] for k in EXAMPLE_FIELDS if k in payload}
        extra = {k: v for k, v in payload.items() if k not in EXAMPLE_FIELDS}
        return cls(
            aa_seq=known.get("aa_seq", ""),
            label=known.get("label"),
            name=known.get("name"),
            ss3_seq=known.get("ss3_seq"),
            ss8_seq=known.get("ss8_seq"),
            foldseek_seq=known.get("foldseek_seq"),
            esm3_structure_seq=known.get("esm3_structure_seq"),
            detail=known.get("detail"),
            extra=extra,
        )


@dataclass
class MetricReport:
    """Named metric values plus divergence flags for degenerate inputs.

    Only short names from the supported metric set appear in ``values``.
    A metric whose definition is undefined for the given inputs (for example
    AUROC with single-class gold) is absent from ``values`` and explained by
    an entry in ``flags``.
    """

    values: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    _BOUNDS = {
        "accuracy": (0.0, 1.0),
        "recall": (0.0, 1.0),
        "precision": (0.0, 1.0),
        "f1": (0.0, 1.0),
        "f1_max": (0.0, 1.0),
        "auc": (0.0, 1.0),
        "mcc": (-1.0, 1.0),
        "spearman_corr": (-1.0, 1.0),
        "mse": (0.0, math.inf),
    }

    def __post_init__(self):
        for name, value in self.values.items():
            if name not in METRIC_NAMES:
                raise ValueError(f"unknown metric name: {name!r}")
            lo, hi = self._BOUNDS[name]
            # Guard against tiny float excursions from valid computations.
            if not (lo - 1e-9 <= value <= hi + 1e-9):
                raise ValueError(f"metric {name} out of range: {value}")
            if not math.isfinite(value) and name != "mse":
                raise ValueError(f"metric {name} is not finite: {value}")

    def to_dict(self) -> dict:
        out = dict(self.values)
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def _is_sequence_of_int(value, lo=None, hi=None) -> bool:
    if not isinstance(value, (list, tuple)):
        return False
    for v in value:
        if isinstance(v, bool) or not isinstance(v, int):
            return False
        if lo is not None and v < lo:
            return False
        if hi is not None and v > hi:
            return False
    return True


def validate_example(ex: BenchmarkExample) -> list[str]:
    """Check one record against the schema; return violation descriptions.

    Total over arbitrary input: malformed optional fields are reported,
    never raised.  An empty list means the record is valid.
    """
    violations = []

    if not isinstance(ex.aa_seq, str) or len(ex.aa_seq) == 0:
        violations.append("aa_seq: required non-empty string")
        seq_len = None
    else:
        seq_len = len(ex.aa_seq)
        bad = set(ex.aa_seq) - AA_ALPHABET
        if bad:
            violations.append(f"aa_seq: invalid letters {sorted(bad)}")

    if ex.label is None:
        violations.append("label: required field missing")
    elif isinstance(ex.label, bool):
        violations.append("label: boolean is not a valid label type")
    elif isinstance(ex.label, list):
        if not _is_sequence_of_int(ex.label):
            violations.append("label: list labels must contain only integers")
    elif not isinstance(ex.label, (int, float)):
        violations.append(f"label: unsupported type {type(ex.label).__name__}")

    if ex.name is not None and not isinstance(ex.name, str):
        violations.append("name: must be a string")

    # structure-token strings: length must match the sequence; symbol sets
    # are producer conventions (loop spellings vary) and are not policed
    for fname in ("ss3_seq", "ss8_seq", "foldseek_seq"):
        value = getattr(ex, fname)
        if value is None:
            continue
        if not isinstance(value, str):
            violations.append(f"{fname}: must be a string")
            continue
        if seq_len is not None and len(value) != seq_len:
            violations.append(
                f"{fname}: length {len(value)} != aa_seq length {seq_len}"
            )

    if ex.esm3_structure_seq is not None:
        value = ex.esm3_structure_seq
        if not _is_sequence_of_int(value, lo=0, hi=4095):
            violations.append(
                "esm3_structure_seq: must be a list of integers in [0, 4095]"
            )
        elif seq_len is not None and len(value) != seq_len:
            violations.append(
                f"esm3_structure_seq: length {len(value)} != aa_seq length {seq_len}"
            )

    if ex.detail is not None and not isinstance(ex.detail, str):
        violations.append("detail: must be a string")

    return violations


def examples_to_jsonl(examples: Iterable[BenchmarkExample]) -> str:
    """Serialize records to JSON-lines text (stable key order)."""
    lines = []
    for ex in examples:
        lines.append(json.dumps(ex.to_dict(), ensure_ascii=False, sort_keys=False))
    return "\n".join(lines) + ("\n" if lines else "")


def examples_from_jsonl(text: str) -> list[BenchmarkExample]:
    out = []
    # split strictly on newline: JSON strings may contain raw U+0085/U+2028
    # which str.splitlines would treat as record boundaries
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(payload, dict):
            raise ValueError(f"line {lineno}: expected a JSON object")
        out.append(BenchmarkExample.from_dict(payload))
    return out


def write_jsonl(path: Union[str, Path], examples: Sequence[BenchmarkExample]) -> None:
    Path(path).write_text(examples_to_jsonl(examples), encoding="utf-8")


def read_jsonl(path: Union[str, Path]) -> list[BenchmarkExample]:
    return examples_from_jsonl(Path(path).read_text(encoding="utf-8"))


def iter_jsonl(path: Union[str, Path]) -> Iterator[BenchmarkExample]:
    """Stream records without loading the whole file."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            payload = json.loads(line)
            if not isinstance(payload, dict):
                raise ValueError(f"line {lineno}: expected a JSON object")
            yield BenchmarkExample.from_dict(payload)


def examples_to_csv(examples: Sequence[BenchmarkExample]) -> str:
    """Convenience CSV view of the canonical fields.

    JSON-lines is the primary on-disk encoding; this view is for
    spreadsheet inspection. List-valued cells (labels, integer token
    sequences) are JSON-encoded inside the cell; passthrough extras are
    not exported.
    """
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EXAMPLE_FIELDS)
    for ex in examples:
        row = []
        for key in EXAMPLE_FIELDS:
            value = getattr(ex, key)
            if value is None:
                row.append("")
            elif isinstance(value, (list, tuple)):
                row.append(json.dumps(list(value)))
            else:
                row.append(value)
        writer.writerow(row)
    return buffer.getvalue()
