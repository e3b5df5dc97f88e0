"""HTTP transport abstraction, live implementation, and rate limiting.

Downloads go through an injectable ``HttpTransport`` so the whole fetch
stack can run against a scripted transport or a local mock server; the
live databank endpoints are configuration, not logic.

``RateLimitedTransport`` enforces a per-host token bucket (default
10 requests/s). On an HTTP 429 the bucket rate is halved for 30 seconds,
a stated interpretation of "adaptive" limiting; no precise algorithm is
published.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Protocol
from urllib.parse import urlsplit

__all__ = [
    "TransportResponse",
    "TransportError",
    "HttpTransport",
    "RequestsTransport",
    "TokenBucket",
    "RateLimitedTransport",
    "DEFAULT_HEADERS",
]

# Static header set; rotating user agents is unnecessary for the public APIs.
DEFAULT_HEADERS = {
    "User-Agent": "protforge/0.1 (+https://example.invalid)",
    "Accept": "*/*",
}

DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class TransportResponse:
    status: int
    body: bytes
    headers: dict = field(default_factory=dict)

    def text(self, encoding="utf-8") -> str:
        return self.body.decode(encoding, errors="replace")


class TransportError(Exception):
    """Network-level failure (no HTTP status). ``kind`` is the retryable
    error class, currently always ``timeout``."""

    def __init__(self, message: str, kind: str = "timeout"):
        super().__init__(message)
        self.kind = kind


class HttpTransport(Protocol):
    def get(self, url: str, headers: Optional[dict] = None,
            timeout: Optional[float] = None) -> TransportResponse: ...


class RequestsTransport:
    """Live transport backed by a pooled requests session."""

    def __init__(self, timeout: float = DEFAULT_TIMEOUT):
        import requests

        self._session = requests.Session()
        self._timeout = timeout
        self._requests = requests

    def get(self, url, headers=None, timeout=None) -> TransportResponse:
        merged = dict(DEFAULT_HEADERS)
        if headers:
            merged.update(headers)
        try:
            resp = self._session.get(
                url, headers=merged, timeout=timeout or self._timeout)
        except (self._requests.Timeout, self._requests.ConnectionError) as exc:
            raise TransportError(f"GET {url}: {exc}") from exc
        return TransportResponse(
            status=resp.status_code, body=resp.content, headers=dict(resp.headers))


class TokenBucket:
    """Thread-safe token bucket; ``acquire`` blocks until a token is free.

    ``penalize`` halves the effective rate until a deadline (each call
    halves again), after which the configured rate is restored.
    """

    def __init__(self, rate: float, capacity: Optional[float] = None,
                 clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(rate, 1.0)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._updated = clock()
        self._penalty_factor = 1.0
        self._penalty_until = 0.0
        self._lock = threading.Lock()

    def _effective_rate(self, now: float) -> float:
        if now >= self._penalty_until:
            self._penalty_factor = 1.0
        return self.rate * self._penalty_factor

    def _refill(self, now: float) -> None:
        self._tokens = min(
            self.capacity,
            self._tokens + (now - self._updated) * self._effective_rate(now))
        self._updated = now

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._refill(now)
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self._effective_rate(now)
            self._sleep(wait)

    def penalize(self, duration: float = 30.0) -> None:
        with self._lock:
            now = self._clock()
            self._refill(now)
            self._penalty_factor *= 0.5
            self._penalty_until = now + duration


class RateLimitedTransport:
    """Per-host token-bucket front of another transport."""

    def __init__(self, inner: HttpTransport, requests_per_second: float = 10.0,
                 penalty_seconds: float = 30.0):
        self._inner = inner
        self._rate = requests_per_second
        self._penalty_seconds = penalty_seconds
        self._buckets: dict[str, TokenBucket] = {}
        self._lock = threading.Lock()

    def _bucket(self, url: str) -> TokenBucket:
        host = urlsplit(url).netloc
        with self._lock:
            bucket = self._buckets.get(host)
            if bucket is None:
                bucket = TokenBucket(self._rate)
                self._buckets[host] = bucket
            return bucket

    def get(self, url, headers=None, timeout=None) -> TransportResponse:
        bucket = self._bucket(url)
        bucket.acquire()
        response = self._inner.get(url, headers=headers, timeout=timeout)
        if response.status == 429:
            bucket.penalize(self._penalty_seconds)
        return response
