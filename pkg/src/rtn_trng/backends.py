"""Uniform-variate sources that drive the RTN simulation.

Every backend hands out 32-bit words ``v`` and the corresponding variates
``u = v / 2**32``, so ``0 <= u < 1`` holds exactly in binary floating point.
Backends are single-consumer streams; words that a consumer reads ahead but
does not use can be given back with :meth:`UniformBackend.push_back`, which
keeps :attr:`UniformBackend.consumed` an exact count of variates used.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

U32_SCALE = 2.0**-32

LEHMER_MODULUS = 2**31 - 1
LEHMER_MULTIPLIER = 16807


class BackendError(Exception):
    """Base class for entropy backend failures."""


class BackendExhausted(BackendError):
    """A finite source (replay file, cache) ran out of words."""


class UniformBackend:
    """Base class: buffered stream of 32-bit words.

    Subclasses implement :meth:`_produce`, which returns at least ``n`` new
    words, or fewer only when the source is finite and has ended.
    """

    kind = "abstract"

    def __init__(self) -> None:
        self._pending = np.empty(0, dtype=np.uint32)
        self._consumed = 0

    def _produce(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}

    @property
    def consumed(self) -> int:
        """Exact number of variates handed out and not pushed back."""
        return self._consumed

    def take_words(self, n: int, partial: bool = False) -> np.ndarray:
        """Return the next ``n`` words as a ``uint32`` array.

        With ``partial=True`` a short (possibly empty) array is returned at
        end of stream; otherwise running out raises :class:`BackendExhausted`
        and nothing is consumed.
        """
        if n < 0:
            raise ValueError("n must be non-negative")
        if len(self._pending) < n:
            fresh = np.asarray(self._produce(n - len(self._pending)), dtype=np.uint32)
            self._pending = np.concatenate([self._pending, fresh])
        got = self._pending[:n]
        if len(got) < n and not partial:
            raise BackendExhausted(
                f"{self.kind} backend exhausted: requested {n} words, {len(got)} available"
            )
        self._pending = self._pending[len(got):]
        self._consumed += len(got)
        return got

    def uniforms(self, n: int, partial: bool = False) -> np.ndarray:
        return self.take_words(n, partial=partial) * U32_SCALE

    def next_uniform(self) -> float:
        return float(self.take_words(1)[0]) * U32_SCALE

    def push_back(self, words: np.ndarray) -> None:
        """Return unused words to the front of the stream, preserving order."""
        words = np.asarray(words, dtype=np.uint32)
        if len(words) > self._consumed:
            raise ValueError("cannot push back more words than were consumed")
        self._pending = np.concatenate([words, self._pending])
        self._consumed -= len(words)


def count_consumed(backend: UniformBackend) -> int:
    return backend.consumed


class OsEntropyBackend(UniformBackend):
    """Operating-system entropy (``os.urandom``)."""

    kind = "os"

    def _produce(self, n: int) -> np.ndarray:
        return np.frombuffer(os.urandom(4 * n), dtype=">u4").astype(np.uint32)


class SeededBackend(UniformBackend):
    """Deterministic high-quality stream from PCG64.

    Each raw 64-bit output is split into two words, high half first, so the
    stream does not depend on how requests are chunked.
    """

    kind = "seeded"

    def __init__(self, seed: int) -> None:
        super().__init__()
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self._bitgen = np.random.PCG64(seed)

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}

    def _produce(self, n: int) -> np.ndarray:
        raw = self._bitgen.random_raw((n + 1) // 2)
        out = np.empty(2 * len(raw), dtype=np.uint32)
        out[0::2] = raw >> np.uint64(32)
        out[1::2] = raw & np.uint64(0xFFFFFFFF)
        return out


def _lehmer_powers(count: int) -> np.ndarray:
    powers = np.array([LEHMER_MULTIPLIER], dtype=np.int64)
    while len(powers) < count:
        powers = np.concatenate([powers, (powers * powers[-1]) % LEHMER_MODULUS])
    return powers[:count]


class WeakLcgBackend(UniformBackend):
    """Minimal-standard Lehmer generator, the deliberately weak negative control.

    ``x <- 16807 * x mod (2**31 - 1)``; each state maps to the 32-bit grid as
    ``floor((x - 1) * 2**32 / (2**31 - 1))``.
    """

    kind = "weak-lcg"
    _BLOCK = 1 << 16
    _powers: np.ndarray | None = None

    def __init__(self, seed: int) -> None:
        super().__init__()
        if not 1 <= seed < LEHMER_MODULUS:
            raise ValueError("Lehmer seed must lie in [1, 2**31 - 2]")
        self.seed = seed
        self._x = seed

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}

    @classmethod
    def raw_block(cls, x: int, count: int) -> np.ndarray:
        """The next ``count`` Lehmer states after ``x``."""
        if cls._powers is None:
            cls._powers = _lehmer_powers(cls._BLOCK)
        parts = []
        while count > 0:
            k = min(count, cls._BLOCK)
            block = (cls._powers[:k] * x) % LEHMER_MODULUS
            parts.append(block)
            x = int(block[-1])
            count -= k
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)

    @staticmethod
    def to_word(states: np.ndarray) -> np.ndarray:
        # 2**32 == 2*m + 2, so (x-1)*2**32 // m == 2(x-1) + [2(x-1) >= m]
        t = 2 * (np.asarray(states, dtype=np.int64) - 1)
        return (t + (t >= LEHMER_MODULUS)).astype(np.uint32)

    def _produce(self, n: int) -> np.ndarray:
        states = self.raw_block(self._x, n)
        self._x = int(states[-1])
        return self.to_word(states)


class FileReplayBackend(UniformBackend):
    """Replays raw big-endian 32-bit words from a file, in order.

    A trailing partial word (file size not a multiple of 4) is ignored.
    """

    kind = "file"

    def __init__(self, path: str | os.PathLike, offset_words: int = 0) -> None:
        super().__init__()
        self.path = Path(path)
        self._fh = open(self.path, "rb")
        self._fh.seek(4 * offset_words)

    def describe(self) -> dict:
        return {"kind": self.kind, "path": str(self.path)}

    def _produce(self, n: int) -> np.ndarray:
        data = self._fh.read(4 * n)
        usable = len(data) - len(data) % 4
        return np.frombuffer(data[:usable], dtype=">u4").astype(np.uint32)

    def close(self) -> None:
        self._fh.close()


@dataclass(frozen=True)
class BackendSpec:
    """Declarative description of a backend, parsed from ``kind[:arg]``."""

    kind: str
    seed: int | None = None
    path: str | None = None
    base_url: str | None = None
    batch_size: int = 1024
    cache_path: str | None = None
    min_interval: float = 60.0

    @classmethod
    def parse(cls, text: str, **extra) -> "BackendSpec":
        kind, _, arg = text.partition(":")
        if kind == "os":
            return cls("os", **extra)
        if kind in ("seeded", "weak-lcg"):
            if not arg:
                raise ValueError(f"backend {kind!r} needs a seed, e.g. {kind}:42")
            return cls(kind, seed=int(arg, 0), **extra)
        if kind == "file":
            if not arg:
                raise ValueError("file backend needs a path, e.g. file:cache.bin")
            return cls("file", path=arg, **extra)
        if kind == "qrng":
            return cls("qrng", base_url=arg or None, **extra)
        raise ValueError(f"unknown backend {text!r}")

    def open(self) -> UniformBackend:
        if self.kind == "os":
            return OsEntropyBackend()
        if self.kind == "seeded":
            return SeededBackend(self.seed)
        if self.kind == "weak-lcg":
            return WeakLcgBackend(self.seed)
        if self.kind == "file":
            if not Path(self.path).is_file():
                raise BackendError(f"replay file not found: {self.path}")
            return FileReplayBackend(self.path)
        if self.kind == "qrng":
            from .qrng import QrngBackend, QrngClient

            client = QrngClient(
                base_url=self.base_url,
                batch_size=self.batch_size,
                cache_path=self.cache_path or "qrng_cache.bin",
                min_interval=self.min_interval,
            )
            return QrngBackend(client)
        raise ValueError(f"unknown backend kind {self.kind!r}")
