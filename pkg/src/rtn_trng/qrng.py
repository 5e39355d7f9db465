"""Client for a quantum RNG web API, filling a local binary cache.

The wire format follows the legacy ANU QRNG JSON interface::

    GET <base_url>?length=<batch_size>&type=uint16
    -> {"success": true, "type": "uint16", "length": N, "data": [...]}

Consecutive uint16 values are paired, first value as the high half, into
32-bit words that are appended big-endian to the cache file.
"""

from __future__ import annotations

import json
import logging
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from pathlib import Path
from typing import Callable

import numpy as np

from .backends import BackendError, UniformBackend

log = logging.getLogger(__name__)

DEFAULT_QRNG_URL = "https://qrng.anu.edu.au/API/jsonI.php"
QRNG_URL_ENV = "RTN_QRNG_URL"


class QrngError(BackendError):
    pass


class MalformedResponse(QrngError):
    pass


class RateLimited(QrngError):
    pass


class NetworkUnavailable(QrngError):
    pass


def resolve_base_url(base_url: str | None = None) -> str:
    return base_url or os.environ.get(QRNG_URL_ENV) or DEFAULT_QRNG_URL


def parse_response(payload: object) -> np.ndarray:
    """Validate a decoded JSON response and return its 32-bit words.

    Raises :class:`MalformedResponse` on any schema violation. The caller
    handles ``success == false`` before calling this.
    """
    if not isinstance(payload, dict):
        raise MalformedResponse("response is not a JSON object")
    for key in ("success", "length", "data"):
        if key not in payload:
            raise MalformedResponse(f"response lacks field {key!r}")
    if payload.get("type", "uint16") != "uint16":
        raise MalformedResponse(f"unexpected type {payload['type']!r}")
    data = payload["data"]
    length = payload["length"]
    if not isinstance(data, list) or isinstance(length, bool) or not isinstance(length, int):
        raise MalformedResponse("data must be a list and length an integer")
    if len(data) != length:
        raise MalformedResponse(f"length field {length} but {len(data)} values")
    if length % 2:
        raise MalformedResponse("odd number of uint16 values cannot be paired")
    for value in data:
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 0xFFFF:
            raise MalformedResponse(f"value {value!r} is not a uint16")
    halves = np.asarray(data, dtype=np.uint32)
    return (halves[0::2] << np.uint32(16)) | halves[1::2]


class QrngClient:
    """Fetches batches from the API and appends them to ``cache_path``.

    Failures (network errors, HTTP errors, ``success: false``) are retried
    with exponential backoff; consecutive requests are spaced at least
    ``min_interval`` seconds apart.
    """

    def __init__(
        self,
        base_url: str | None = None,
        batch_size: int = 1024,
        cache_path: str | os.PathLike = "qrng_cache.bin",
        min_interval: float = 60.0,
        max_retries: int = 5,
        backoff_base: float = 1.0,
        backoff_factor: float = 2.0,
        timeout: float = 10.0,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        if batch_size <= 0 or batch_size % 2:
            raise ValueError("batch_size must be a positive even number of uint16 values")
        self.base_url = resolve_base_url(base_url)
        self.batch_size = batch_size
        self.cache_path = Path(cache_path)
        self.min_interval = min_interval
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.timeout = timeout
        self._sleep = sleep
        self._clock = clock
        self._last_request: float | None = None
        self.requests_made = 0

    def request_url(self) -> str:
        query = urllib.parse.urlencode({"length": self.batch_size, "type": "uint16"})
        sep = "&" if "?" in self.base_url else "?"
        return f"{self.base_url}{sep}{query}"

    def _respect_rate_limit(self) -> None:
        if self._last_request is None:
            return
        wait = self._last_request + self.min_interval - self._clock()
        if wait > 0:
            self._sleep(wait)

    def _fetch(self) -> object:
        self._respect_rate_limit()
        self._last_request = self._clock()
        self.requests_made += 1
        with urllib.request.urlopen(self.request_url(), timeout=self.timeout) as resp:
            body = resp.read()
        try:
            return json.loads(body)
        except ValueError as exc:
            raise MalformedResponse(f"response is not JSON: {exc}") from exc

    def refill(self) -> int:
        """Fetch one batch and append it to the cache; return words cached."""
        rate_limited = False
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff_base * self.backoff_factor ** (attempt - 1))
            try:
                payload = self._fetch()
            except urllib.error.HTTPError as exc:
                rate_limited = exc.code == 429
                last_error = exc
                continue
            except (urllib.error.URLError, OSError) as exc:
                rate_limited = False
                last_error = exc
                continue
            if isinstance(payload, dict) and payload.get("success") is False:
                rate_limited = True
                last_error = None
                log.warning("QRNG returned success=false (attempt %d)", attempt + 1)
                continue
            if isinstance(payload, dict) and not isinstance(payload.get("success"), bool):
                raise MalformedResponse("field 'success' must be a boolean")
            words = parse_response(payload)
            with open(self.cache_path, "ab") as fh:
                fh.write(words.astype(">u4").tobytes())
            return len(words)
        if rate_limited:
            raise RateLimited(f"QRNG refused {self.max_retries + 1} requests")
        raise NetworkUnavailable(f"QRNG unreachable after retries: {last_error}")

    def cached_words(self) -> int:
        if not self.cache_path.exists():
            return 0
        return self.cache_path.stat().st_size // 4


def qrng_refill(client: QrngClient) -> int:
    return client.refill()


class QrngBackend(UniformBackend):
    """Consumes the QRNG cache from ``offset_words`` on, refilling on demand."""

    kind = "qrng"

    def __init__(self, client: QrngClient, offset_words: int = 0) -> None:
        super().__init__()
        self.client = client
        self._pos = offset_words

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "base_url": self.client.base_url,
            "cache_path": str(self.client.cache_path),
        }

    def _produce(self, n: int) -> np.ndarray:
        while self.client.cached_words() - self._pos < n:
            self.client.refill()
        with open(self.client.cache_path, "rb") as fh:
            fh.seek(4 * self._pos)
            data = fh.read(4 * n)
        self._pos += n
        return np.frombuffer(data, dtype=">u4").astype(np.uint32)
