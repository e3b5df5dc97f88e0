"""Per-databank download clients.

Each client fetches one accession through an injected transport and, for
the materializing variants, writes the output layout:

    <root>/uniprot/<acc>.fasta
    <root>/rcsb/<acc>.<fmt> + <acc>.json   (metadata sidecar)
    <root>/alphafold/<prefix2>/<acc>.pdb   (sharded by 2-char ID prefix)
    <root>/interpro/<acc>/{detail.json, meta.json, uids.txt}

Base URLs default to the public services and are overridden by the
VF_UNIPROT_BASE / VF_RCSB_BASE / VF_AFDB_BASE / VF_INTERPRO_BASE
environment variables (which is how tests point everything at a mock).
Already-present outputs are treated as cache hits: no request is made.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..core import Databank, DatabankId, ProteinRecord
from ..structparse import FastaError, parse_fasta
from .transport import HttpTransport, TransportError

__all__ = [
    "Endpoints",
    "FetchError",
    "FetchClient",
    "fetch_uniprot",
    "fetch_rcsb",
    "fetch_alphafold",
    "fetch_interpro",
    "RCSB_FORMATS",
    "shard_prefix",
]

RCSB_FORMATS = ("cif", "pdb", "xml")

ERROR_CLASSES = ("timeout", "not_found", "rate_limited", "malformed_response",
                 "io_error")


class FetchError(Exception):
    """A failed download attempt, tagged with its error class."""

    def __init__(self, error_class: str, accession: str, message: str):
        assert error_class in ERROR_CLASSES
        super().__init__(f"{accession}: {message}")
        self.error_class = error_class
        self.accession = accession


@dataclass(frozen=True)
class Endpoints:
    """Base URLs per databank; the RCSB override covers files and metadata."""

    uniprot: str = "https://rest.uniprot.org/uniprotkb"
    rcsb_files: str = "https://files.rcsb.org/download"
    rcsb_meta: str = "https://data.rcsb.org/rest/v1/core/entry"
    alphafold: str = "https://alphafold.ebi.ac.uk/files"
    interpro: str = "https://www.ebi.ac.uk/interpro/api"

    @classmethod
    def from_env(cls, environ=os.environ) -> "Endpoints":
        kwargs = {}
        if base := environ.get("VF_UNIPROT_BASE"):
            kwargs["uniprot"] = base.rstrip("/")
        if base := environ.get("VF_RCSB_BASE"):
            base = base.rstrip("/")
            kwargs["rcsb_files"] = base
            kwargs["rcsb_meta"] = base
        if base := environ.get("VF_AFDB_BASE"):
            kwargs["alphafold"] = base.rstrip("/")
        if base := environ.get("VF_INTERPRO_BASE"):
            kwargs["interpro"] = base.rstrip("/")
        return cls(**kwargs)


def shard_prefix(accession: str) -> str:
    """Two-character ID prefix used for directory sharding."""
    return accession[:2].upper()


def _status_error(status: int, acc: str, url: str) -> FetchError:
    if status == 404 or status == 410:
        return FetchError("not_found", acc, f"HTTP {status} for {url}")
    if status == 429:
        return FetchError("rate_limited", acc, f"HTTP 429 for {url}")
    return FetchError("malformed_response", acc, f"HTTP {status} for {url}")


@dataclass
class FetchClient:
    """Transport plus endpoint configuration, shared by all clients."""

    transport: HttpTransport
    endpoints: Endpoints

    def get(self, url: str, acc: str) -> bytes:
        try:
            response = self.transport.get(url)
        except TransportError as exc:
            raise FetchError(exc.kind, acc, str(exc)) from exc
        if response.status != 200:
            raise _status_error(response.status, acc, url)
        return response.body

    def get_json(self, url: str, acc: str):
        body = self.get(url, acc)
        try:
            return json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FetchError("malformed_response", acc,
                             f"invalid JSON from {url}: {exc}") from exc


_HEADER_TAGS = {"OS": "organism", "OX": "taxon_id", "GN": "gene",
                "PE": "protein_existence", "SV": "sequence_version"}
_HEADER_TAG_RE = re.compile(r"\s(OS|OX|GN|PE|SV)=")


def _parse_uniprot_header(header: str) -> dict:
    meta: dict[str, object] = {"header": header}
    parts = header.split("|")
    if len(parts) >= 3:
        meta["database"] = parts[0]
        name, _, tail = parts[2].partition(" ")
        meta["entry_name"] = name
        fields = _HEADER_TAG_RE.split(tail)
        if fields[0].strip():
            meta["description"] = fields[0].strip()
        for tag, value in zip(fields[1::2], fields[2::2]):
            meta[_HEADER_TAGS[tag]] = value.strip()
    return meta


def fetch_uniprot(acc: str, client: FetchClient) -> ProteinRecord:
    """Fetch one UniProt entry as a ProteinRecord (sequence + header metadata)."""
    databank_id = DatabankId(Databank.UNIPROT, acc)  # precondition check
    url = f"{client.endpoints.uniprot}/{acc}.fasta"
    body = client.get(url, acc)
    try:
        records = parse_fasta(body.decode("utf-8", errors="replace"))
    except FastaError as exc:
        raise FetchError("malformed_response", acc, str(exc)) from exc
    if not records or not records[0][1]:
        raise FetchError("malformed_response", acc, "empty FASTA response")
    header, seq = records[0]
    return ProteinRecord(
        id=databank_id,
        aa_seq=seq.upper(),
        metadata=_parse_uniprot_header(header),
    )


def fetch_rcsb(acc: str, fmt: str, client: FetchClient,
               out_root: Path) -> list[Path]:
    """Fetch one RCSB structure file plus its metadata JSON sidecar.

    Returns the written paths, structure file first.
    """
    DatabankId(Databank.RCSB_PDB, acc)
    if fmt not in RCSB_FORMATS:
        raise ValueError(f"format must be one of {RCSB_FORMATS}, got {fmt!r}")

    out_dir = Path(out_root) / "rcsb"
    structure_path = out_dir / f"{acc}.{fmt}"
    meta_path = out_dir / f"{acc}.json"
    if structure_path.exists() and meta_path.exists():
        return [structure_path, meta_path]

    body = client.get(f"{client.endpoints.rcsb_files}/{acc}.{fmt}", acc)
    meta = client.get_json(f"{client.endpoints.rcsb_meta}/{acc}", acc)

    out_dir.mkdir(parents=True, exist_ok=True)
    structure_path.write_bytes(body)
    meta_path.write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return [structure_path, meta_path]


def fetch_alphafold(acc: str, client: FetchClient, out_root: Path) -> list[Path]:
    """Fetch a predicted structure by UniProt accession.

    Output is sharded under a two-character ID prefix subdirectory.
    """
    DatabankId(Databank.ALPHAFOLD_DB, acc)
    out_path = Path(out_root) / "alphafold" / shard_prefix(acc) / f"{acc}.pdb"
    if out_path.exists():
        return [out_path]

    url = f"{client.endpoints.alphafold}/AF-{acc}-F1-model_v4.pdb"
    body = client.get(url, acc)
    if b"ATOM" not in body[:100000]:
        raise FetchError("malformed_response", acc,
                         "response does not look like a PDB file")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(body)
    return [out_path]


def fetch_interpro(acc: str, client: FetchClient, out_root: Path) -> list[Path]:
    """Fetch one InterPro family bundle: detail.json, meta.json, uids.txt.

    ``detail.json`` is the full entry payload, ``meta.json`` its metadata
    object, and ``uids.txt`` the member UniProt accessions (one per line,
    paginated member lists are followed to the end).
    """
    DatabankId(Databank.INTERPRO, acc)
    out_dir = Path(out_root) / "interpro" / acc
    detail_path = out_dir / "detail.json"
    meta_path = out_dir / "meta.json"
    uids_path = out_dir / "uids.txt"
    if detail_path.exists() and meta_path.exists() and uids_path.exists():
        return [detail_path, meta_path, uids_path]

    detail = client.get_json(f"{client.endpoints.interpro}/entry/interpro/{acc}", acc)
    meta = detail.get("metadata", detail)

    uids: list[str] = []
    url: Optional[str] = (
        f"{client.endpoints.interpro}/protein/uniprot/entry/interpro/{acc}/")
    visited: set[str] = set()
    while url:
        if url in visited:  # malformed pagination must not loop forever
            raise FetchError("malformed_response", acc,
                             f"pagination cycle at {url}")
        visited.add(url)
        page = client.get_json(url, acc)
        for item in page.get("results", []):
            accession = (item.get("metadata") or {}).get("accession")
            if accession:
                uids.append(accession)
        url = page.get("next")

    out_dir.mkdir(parents=True, exist_ok=True)
    detail_path.write_text(json.dumps(detail, indent=2), encoding="utf-8")
    meta_path.write_text(json.dumps(meta, indent=2), encoding="utf-8")
    uids_path.write_text("".join(f"{u}\n" for u in uids), encoding="utf-8")
    return [detail_path, meta_path, uids_path]
