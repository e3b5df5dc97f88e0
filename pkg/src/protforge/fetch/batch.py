"""Bounded-concurrency batch downloads with retries and a failure ledger.

``run_batch`` drives a worker pool of the configured size, retries
transient failures with exponential backoff (base * 2^(attempt-1)), and
appends permanent failures to ``<root>/failed.txt`` as
``<accession>\\t<error class>`` lines. Every target lands in exactly one of
``FetchOutcome.succeeded`` / ``FetchOutcome.failed``.

Re-running against the same output root skips targets whose files already
exist, so a partially failed batch can simply be run again.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..core import Databank, DatabankId
from .clients import (
    RCSB_FORMATS,
    Endpoints,
    FetchClient,
    FetchError,
    fetch_alphafold,
    fetch_interpro,
    fetch_rcsb,
    fetch_uniprot,
)
from .transport import HttpTransport, RateLimitedTransport

__all__ = ["RetryPolicy", "FetchJob", "FetchOutcome", "run_batch"]

FAILED_LEDGER = "failed.txt"


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 0.5  # seconds; doubles per attempt

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.base_backoff < 0:
            raise ValueError("base_backoff must be >= 0")

    def backoff(self, attempt: int) -> float:
        return self.base_backoff * (2 ** (attempt - 1))


@dataclass
class FetchJob:
    """One batch download request."""

    targets: list[DatabankId]
    output_root: Path
    formats: dict = field(default_factory=dict)  # Databank -> format
    concurrency: int = 4
    retry_policy: RetryPolicy = field(default_factory=RetryPolicy)
    merge_fasta: bool = False
    requests_per_second: float = 10.0

    def __post_init__(self):
        self.output_root = Path(self.output_root)
        if not self.targets:
            raise ValueError("targets must be non-empty")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("targets must be deduplicated")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        fmt = self.formats.get(Databank.RCSB_PDB)
        if fmt is not None and fmt not in RCSB_FORMATS:
            raise ValueError(f"RCSB format must be one of {RCSB_FORMATS}")
        if self.requests_per_second <= 0:
            raise ValueError("requests_per_second must be positive")


@dataclass
class FetchOutcome:
    """Disjoint partition of the job's targets into successes and failures."""

    succeeded: list[tuple[DatabankId, Path]] = field(default_factory=list)
    failed: list[tuple[DatabankId, str, int]] = field(default_factory=list)

    def check_partition(self, targets) -> None:
        done = {t for t, _ in self.succeeded} | {t for t, _, _ in self.failed}
        overlap = {t for t, _ in self.succeeded} & {t for t, _, _ in self.failed}
        if overlap or done != set(targets):
            raise AssertionError("outcome does not partition the target set")


def _materialize(target: DatabankId, client: FetchClient, job: FetchJob) -> Path:
    """Fetch one target, write its artifacts, return the primary path."""
    root = job.output_root
    if target.kind is Databank.UNIPROT:
        out_path = root / "uniprot" / f"{target.accession}.fasta"
        if not out_path.exists():
            record = fetch_uniprot(target.accession, client)
            out_path.parent.mkdir(parents=True, exist_ok=True)
            header = record.metadata.get("header", target.accession)
            out_path.write_text(f">{header}\n{record.aa_seq}\n", encoding="utf-8")
        return out_path
    if target.kind is Databank.RCSB_PDB:
        fmt = job.formats.get(Databank.RCSB_PDB, "cif")
        return fetch_rcsb(target.accession, fmt, client, root)[0]
    if target.kind is Databank.ALPHAFOLD_DB:
        return fetch_alphafold(target.accession, client, root)[0]
    return fetch_interpro(target.accession, client, root)[0].parent


def _fetch_with_retries(target: DatabankId, client: FetchClient, job: FetchJob,
                        sleep: Callable[[float], None]):
    policy = job.retry_policy
    attempt = 0
    while True:
        attempt += 1
        try:
            return _materialize(target, client, job), attempt
        except FetchError as exc:
            # a 404 is authoritative; retrying cannot change it
            if exc.error_class == "not_found" or attempt >= policy.max_attempts:
                return exc, attempt
            sleep(policy.backoff(attempt))
        except OSError as exc:
            return FetchError("io_error", target.accession, str(exc)), attempt


def _merge_fasta(job: FetchJob, ordered_paths: list[Path]) -> Optional[Path]:
    merged = job.output_root / "merged.fasta"
    chunks = []
    for path in ordered_paths:
        text = path.read_text(encoding="utf-8")
        if not text.endswith("\n"):
            text += "\n"
        chunks.append(text)
    merged.write_text("".join(chunks), encoding="utf-8")
    return merged


def run_batch(job: FetchJob, transport: HttpTransport,
              endpoints: Optional[Endpoints] = None,
              sleep: Callable[[float], None] = time.sleep) -> FetchOutcome:
    """Download every job target with at most ``job.concurrency`` requests
    in flight; aggregate the outcome and append failures to failed.txt.
    """
    try:
        job.output_root.mkdir(parents=True, exist_ok=True)
        probe = job.output_root / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise FetchError("io_error", str(job.output_root),
                         f"output root not writable: {exc}") from exc

    client = FetchClient(
        transport=RateLimitedTransport(transport, job.requests_per_second),
        endpoints=endpoints or Endpoints.from_env(),
    )

    results: dict[DatabankId, object] = {}
    with ThreadPoolExecutor(max_workers=job.concurrency) as pool:
        futures = {
            target: pool.submit(_fetch_with_retries, target, client, job, sleep)
            for target in job.targets
        }
        for target, future in futures.items():
            results[target] = future.result()

    outcome = FetchOutcome()
    failed_lines = []
    uniprot_successes = []
    for target in job.targets:  # single writer, deterministic order
        result, attempts = results[target]
        if isinstance(result, FetchError):
            outcome.failed.append((target, result.error_class, attempts))
            failed_lines.append(f"{target.accession}\t{result.error_class}\n")
        else:
            outcome.succeeded.append((target, result))
            if target.kind is Databank.UNIPROT:
                uniprot_successes.append(result)

    if failed_lines:
        with open(job.output_root / FAILED_LEDGER, "a", encoding="utf-8") as ledger:
            ledger.writelines(failed_lines)

    if job.merge_fasta and uniprot_successes:
        _merge_fasta(job, uniprot_successes)

    outcome.check_partition(job.targets)
    return outcome
