"""Parsers for PDB, a pragmatic mmCIF subset, and FASTA.

Scope notes:

- PDB: fixed-column ATOM records, first MODEL only, altloc ' '/'A' kept.
- mmCIF: the ``_atom_site`` loop plus the entry id; full CIF grammar is out
  of scope.  Quoted values (e.g. atom name ``"C1'"``) are handled.
- B-factors are promoted to per-residue confidence (pLDDT) when every atom
  B-factor lies in [0, 100], the convention of structure-prediction output.

Errors are raised as typed exceptions carrying the offending line number;
they never leave a half-built model behind.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import Chain, Residue, StructureModel

__all__ = [
    "StructParseError",
    "MalformedRecordError",
    "EmptyModelError",
    "NoSuchChainError",
    "FastaError",
    "ExtractedChain",
    "parse_pdb",
    "parse_mmcif",
    "parse_fasta",
    "extract_chain",
    "THREE_TO_ONE",
]


class StructParseError(ValueError):
    """Base class for structure/sequence parsing failures."""


class MalformedRecordError(StructParseError):
    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class EmptyModelError(StructParseError):
    """No ATOM records (or no ``_atom_site`` loop) in the input."""


class NoSuchChainError(KeyError):
    pass


class FastaError(StructParseError):
    pass


# Standard 3-letter -> 1-letter residue codes; MSE (selenomethionine) is the
# one non-standard name mapped into the 20-letter alphabet. Everything else
# becomes X.
THREE_TO_ONE = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C",
    "GLN": "Q", "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I",
    "LEU": "L", "LYS": "K", "MET": "M", "PHE": "F", "PRO": "P",
    "SER": "S", "THR": "T", "TRP": "W", "TYR": "Y", "VAL": "V",
    "MSE": "M",
}

_KEPT_ALTLOCS = (" ", "", "A", ".", "?")


class _ResidueBuilder:
    __slots__ = ("index", "name", "icode", "atoms", "bfactors")

    def __init__(self, index, name, icode):
        self.index = index
        self.name = name
        self.icode = icode
        self.atoms = {}
        self.bfactors = {}

    def add(self, atom_name, xyz, bfactor):
        if atom_name in self.atoms:  # duplicate after altloc filtering
            return
        self.atoms[atom_name] = xyz
        if bfactor is not None:
            self.bfactors[atom_name] = bfactor

    def residue(self):
        return Residue(index=self.index, name=self.name,
                       atoms=dict(self.atoms), icode=self.icode)

    def plddt(self):
        if not self.bfactors:
            return None
        return self.bfactors.get("CA", next(iter(self.bfactors.values())))


def _assemble(chains_in_order, builders, source_format, entry_id):
    if not builders:
        raise EmptyModelError(f"no atom records found in {source_format} input")

    chains = []
    all_b = []
    plddts = []
    for chain_id in chains_in_order:
        keyed = builders[chain_id]
        ordered = sorted(keyed.values(), key=lambda b: (b.index, b.icode))
        chains.append(Chain(chain_id=chain_id,
                            residues=tuple(b.residue() for b in ordered)))
        for b in ordered:
            all_b.extend(b.bfactors.values())
            plddts.append(b.plddt())

    confidence = None
    if all_b and all(v is not None for v in plddts):
        if all(0.0 <= v <= 100.0 for v in all_b):
            confidence = tuple(plddts)

    return StructureModel(chains=tuple(chains), source_format=source_format,
                          confidence=confidence, entry_id=entry_id)


def parse_pdb(text: str) -> StructureModel:
    """Parse fixed-column PDB ATOM records into a StructureModel.

    Keeps the first MODEL of multi-model files and altloc ' '/'A' only.
    Raises MalformedRecordError (with line number) on a non-conforming ATOM
    line and EmptyModelError when no ATOM records survive.
    """
    builders: dict[str, dict] = {}
    chain_order: list[str] = []
    entry_id = ""
    in_first_model = True
    seen_model = False

    for line_no, line in enumerate(text.splitlines(), start=1):
        record = line[:6]
        if record.startswith("HEADER") and len(line) >= 66:
            entry_id = line[62:66].strip()
        elif record.startswith("MODEL"):
            if seen_model:
                in_first_model = False
            seen_model = True
        elif record.startswith("ENDMDL"):
            in_first_model = False
        elif record == "ATOM  " and in_first_model:
            if len(line) < 54:
                raise MalformedRecordError("ATOM record shorter than 54 columns",
                                           line_no)
            altloc = line[16]
            if altloc not in _KEPT_ALTLOCS:
                continue
            atom_name = line[12:16].strip()
            res_name = line[17:20].strip()
            chain_id = line[21].strip()
            icode = line[26].strip()
            try:
                res_seq = int(line[22:26])
                xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
            except ValueError as exc:
                raise MalformedRecordError(f"unparseable ATOM fields ({exc})",
                                           line_no) from exc
            bfactor = None
            bcol = line[60:66].strip()
            if bcol:
                try:
                    bfactor = float(bcol)
                except ValueError as exc:
                    raise MalformedRecordError("unparseable B-factor", line_no) from exc

            if chain_id not in builders:
                builders[chain_id] = {}
                chain_order.append(chain_id)
            key = (res_seq, icode)
            if key not in builders[chain_id]:
                builders[chain_id][key] = _ResidueBuilder(res_seq, res_name, icode)
            builders[chain_id][key].add(atom_name, xyz, bfactor)

    return _assemble(chain_order, builders, "pdb", entry_id)


def _cif_tokens(line: str) -> list[str]:
    """Split one CIF line into values, honoring '-quoted and "-quoted fields."""
    tokens = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        if ch in "'\"":
            quote = ch
            j = i + 1
            while j < n:
                if line[j] == quote and (j + 1 == n or line[j + 1] in " \t"):
                    break
                j += 1
            tokens.append(line[i + 1:j])
            i = j + 1
        else:
            j = i
            while j < n and line[j] not in " \t":
                j += 1
            tokens.append(line[i:j])
            i = j
    return tokens


def parse_mmcif(text: str) -> StructureModel:
    """Parse the ``_atom_site`` loop of an mmCIF file.

    Reads group_PDB, label_atom_id, label_comp_id, auth_asym_id,
    auth_seq_id, Cartn_x/y/z and B_iso_or_equiv (with label_* fallbacks),
    applying the same model/altloc conventions as :func:`parse_pdb`.
    """
    lines = text.splitlines()
    entry_id = ""
    tags: list[str] = []
    rows: list[list[str]] = []

    i = 0
    n_lines = len(lines)
    while i < n_lines:
        stripped = lines[i].strip()
        if stripped.startswith("data_") and not entry_id:
            entry_id = stripped[5:]
        elif stripped.startswith("_entry.id"):
            parts = _cif_tokens(stripped)
            if len(parts) >= 2:
                entry_id = parts[1]
        elif stripped == "loop_":
            j = i + 1
            loop_tags = []
            while j < n_lines and lines[j].strip().startswith("_"):
                loop_tags.append(lines[j].strip().split()[0])
                j += 1
            if loop_tags and loop_tags[0].startswith("_atom_site."):
                tags = [t.split(".", 1)[1] for t in loop_tags]
                pending: list[str] = []
                while j < n_lines:
                    row_line = lines[j].strip()
                    if (row_line.startswith("_") or row_line.startswith("loop_")
                            or row_line.startswith("data_") or row_line == "#"):
                        break
                    if row_line:
                        pending.extend(_cif_tokens(lines[j]))
                        while len(pending) >= len(tags):
                            rows.append(pending[:len(tags)])
                            pending = pending[len(tags):]
                    j += 1
                i = j
                continue
            i = j
            continue
        i += 1

    if not tags:
        raise EmptyModelError("no _atom_site loop found in mmCIF input")

    col = {tag: pos for pos, tag in enumerate(tags)}

    def field(row, *names, default=""):
        for name in names:
            pos = col.get(name)
            if pos is not None and pos < len(row):
                value = row[pos]
                if value not in (".", "?"):
                    return value
        return default

    builders: dict[str, dict] = {}
    chain_order: list[str] = []
    first_model = None

    for row_no, row in enumerate(rows, start=1):
        if field(row, "group_PDB") != "ATOM":
            continue
        model_num = field(row, "pdbx_PDB_model_num", default="1")
        if first_model is None:
            first_model = model_num
        elif model_num != first_model:
            continue
        altloc = field(row, "label_alt_id", default=".")
        if altloc not in _KEPT_ALTLOCS:
            continue
        atom_name = field(row, "label_atom_id", "auth_atom_id")
        res_name = field(row, "label_comp_id", "auth_comp_id")
        chain_id = field(row, "auth_asym_id", "label_asym_id")
        icode = field(row, "pdbx_PDB_ins_code")
        try:
            res_seq = int(field(row, "auth_seq_id", "label_seq_id"))
            xyz = (
                float(field(row, "Cartn_x")),
                float(field(row, "Cartn_y")),
                float(field(row, "Cartn_z")),
            )
        except ValueError as exc:
            raise MalformedRecordError(
                f"unparseable _atom_site row ({exc})", row_no) from exc
        braw = field(row, "B_iso_or_equiv")
        bfactor = float(braw) if braw else None

        if chain_id not in builders:
            builders[chain_id] = {}
            chain_order.append(chain_id)
        key = (res_seq, icode)
        if key not in builders[chain_id]:
            builders[chain_id][key] = _ResidueBuilder(res_seq, res_name, icode)
        builders[chain_id][key].add(atom_name, xyz, bfactor)

    return _assemble(chain_order, builders, "mmcif", entry_id)


def parse_fasta(text: str) -> list[tuple[str, str]]:
    """Parse FASTA text into (header, sequence) pairs in file order.

    Sequences are joined across wrapped lines; headers lose the leading
    '>' and trailing whitespace.
    """
    records: list[tuple[str, str]] = []
    header: Optional[str] = None
    parts: list[str] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip()
        if not line:
            continue
        if line.startswith(">"):
            if header is not None:
                records.append((header, "".join(parts)))
            header = line[1:].rstrip()
            parts = []
        else:
            if header is None:
                raise FastaError(f"line {line_no}: sequence data before any header")
            parts.append(line.strip())
    if header is not None:
        records.append((header, "".join(parts)))
    return records


@dataclass(frozen=True)
class ExtractedChain:
    """A chain flattened for tokenization: sequence plus retained residues.

    ``dropped`` reports residues that were removed because they lack a CA
    atom, as (residue index, residue name) pairs.
    """

    chain_id: str
    aa_seq: str
    residues: tuple[Residue, ...]
    dropped: tuple[tuple[int, str], ...] = ()


def extract_chain(model: StructureModel,
                  chain_id: Optional[str] = None) -> ExtractedChain:
    """Flatten one chain (default: first) into sequence + residue list.

    Unknown residue names map to 'X'; residues without a CA atom are
    dropped and reported in ``ExtractedChain.dropped``.
    """
    try:
        chain = model.chain(chain_id)
    except KeyError:
        raise NoSuchChainError(chain_id) from None

    kept: list[Residue] = []
    dropped: list[tuple[int, str]] = []
    letters: list[str] = []
    for res in chain.residues:
        if "CA" not in res.atoms:
            dropped.append((res.index, res.name))
            continue
        kept.append(res)
        letters.append(THREE_TO_ONE.get(res.name.upper(), "X"))
    return ExtractedChain(
        chain_id=chain.chain_id,
        aa_seq="".join(letters),
        residues=tuple(kept),
        dropped=tuple(dropped),
    )
