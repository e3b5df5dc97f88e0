"""Bounded-concurrency databank downloads with retries and rate limiting."""

from .batch import FetchJob, FetchOutcome, RetryPolicy, run_batch
from .clients import (
    Endpoints,
    FetchClient,
    FetchError,
    RCSB_FORMATS,
    fetch_alphafold,
    fetch_interpro,
    fetch_rcsb,
    fetch_uniprot,
    shard_prefix,
)
from .transport import (
    DEFAULT_HEADERS,
    HttpTransport,
    RateLimitedTransport,
    RequestsTransport,
    TokenBucket,
    TransportError,
    TransportResponse,
)

__all__ = [
    "DEFAULT_HEADERS",
    "Endpoints",
    "FetchClient",
    "FetchError",
    "FetchJob",
    "FetchOutcome",
    "HttpTransport",
    "RCSB_FORMATS",
    "RateLimitedTransport",
    "RequestsTransport",
    "RetryPolicy",
    "TokenBucket",
    "TransportError",
    "TransportResponse",
    "fetch_alphafold",
    "fetch_interpro",
    "fetch_rcsb",
    "fetch_uniprot",
    "run_batch",
    "shard_prefix",
]
