"""Counter-based entropy extraction from RTN edges.

A fast clock increments a W-bit counter; on each selected edge the counter is
read and reset.  The d most significant bits of each reading are dropped and
the remaining ``k = W - d`` bits are emitted MSB-first.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rtn_markov import RISING, FALLING, TransitionEvent


class EdgePolicy(str, enum.Enum):
    BOTH = "both"
    RISING = "rising"
    FALLING = "falling"


class SupplyExhausted(Exception):
    """The word supplier ended before the target bit count was reached."""


@dataclass(frozen=True)
class ExtractorConfig:
    counter_width: int = 8
    discard_msb: int = 2
    edge_policy: EdgePolicy = EdgePolicy.BOTH
    clock_div: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.counter_width <= 32:
            raise ValueError("counter_width must lie in [1, 32]")
        if not 0 <= self.discard_msb < self.counter_width:
            raise ValueError("discard_msb must lie in [0, counter_width)")
        if self.clock_div < 1:
            raise ValueError("clock_div must be at least 1")
        object.__setattr__(self, "edge_policy", EdgePolicy(self.edge_policy))

    @property
    def kept_bits(self) -> int:
        return self.counter_width - self.discard_msb


@dataclass(frozen=True)
class BitStream:
    """Packed bits; the first bit is the MSB of the first byte, pad bits zero."""

    bit_count: int
    payload: bytes

    def __post_init__(self) -> None:
        if self.bit_count < 0:
            raise ValueError("bit_count must be non-negative")
        if len(self.payload) != (self.bit_count + 7) // 8:
            raise ValueError(
                f"payload of {len(self.payload)} bytes does not hold exactly {self.bit_count} bits"
            )
        pad = (-self.bit_count) % 8
        if pad and self.payload[-1] & ((1 << pad) - 1):
            raise ValueError("pad bits must be zero")

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> "BitStream":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(len(bits), np.packbits(bits).tobytes())

    def bits(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.payload, dtype=np.uint8), count=self.bit_count)

    def __len__(self) -> int:
        return self.bit_count


def selected_ticks(events: Sequence[TransitionEvent], policy: EdgePolicy | str) -> np.ndarray:
    policy = EdgePolicy(policy)
    if policy is EdgePolicy.BOTH:
        chosen = [e.tick_index for e in events]
    else:
        want = RISING if policy is EdgePolicy.RISING else FALLING
        chosen = [e.tick_index for e in events if e.direction == want]
    return np.asarray(chosen, dtype=np.int64)


def intervals(events: Sequence[TransitionEvent], policy: EdgePolicy | str = EdgePolicy.BOTH) -> np.ndarray:
    """Tick spans between consecutive selected edges.

    The span before the first selected edge is discarded, so fewer than two
    selected edges give an empty array.
    """
    ticks = selected_ticks(events, policy)
    if len(ticks) and np.any(np.diff(ticks) <= 0):
        raise ValueError("events must be strictly increasing in tick_index")
    return np.diff(ticks)


def counter_read(interval, cfg: ExtractorConfig):
    """Counter value after ``interval`` ticks; the W-bit counter wraps."""
    return (interval // cfg.clock_div) % (1 << cfg.counter_width)


def truncate(value, cfg: ExtractorConfig):
    """Drop the ``discard_msb`` top bits of a W-bit counter reading."""
    return value % (1 << cfg.kept_bits)


def extract_words(events: Sequence[TransitionEvent], cfg: ExtractorConfig) -> np.ndarray:
    spans = intervals(events, cfg.edge_policy)
    return truncate(counter_read(spans, cfg), cfg).astype(np.uint32)


def words_to_bits(words: np.ndarray, word_bits: int) -> np.ndarray:
    words = np.asarray(words, dtype=np.uint32)
    shifts = np.arange(word_bits - 1, -1, -1, dtype=np.uint32)
    return ((words[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def pack(words: Iterable[int] | np.ndarray, target_bits: int, word_bits: int) -> BitStream:
    """Concatenate ``word_bits``-wide words MSB-first, cut to ``target_bits``.

    Only as many words as needed are pulled from ``words``.
    """
    if word_bits < 1:
        raise ValueError("word_bits must be positive")
    needed = -(-target_bits // word_bits)
    if isinstance(words, np.ndarray):
        taken = words[:needed]
    else:
        taken = np.fromiter(itertools.islice(words, needed), dtype=np.int64)
    if len(taken) < needed:
        raise SupplyExhausted(
            f"needed {needed} words for {target_bits} bits, supplier gave {len(taken)}"
        )
    if len(taken) and (np.min(taken) < 0 or np.max(taken) >= 1 << word_bits):
        raise ValueError(f"words must fit in {word_bits} bits")
    bits = words_to_bits(taken, word_bits)[:target_bits]
    return BitStream.from_bits(bits)


def unpack(stream: BitStream) -> np.ndarray:
    return stream.bits()


def one_probability(tau_eff: float, j: int) -> float:
    """Probability that bit j of an exponential interval (mean tau_eff) is 1."""
    a = 2.0**j / tau_eff
    return 1.0 / (math.exp(a) + 1.0)


def predict_bit_bias(tau_eff: float, k: int) -> np.ndarray:
    """Folding-model bias |1/2 - P(bit j = 1)| for bit positions j = 0..k-1."""
    if tau_eff <= 0:
        raise ValueError("tau_eff must be positive")
    return np.array([abs(0.5 - one_probability(tau_eff, j)) for j in range(k)])


def predicted_monobit_z(n_bits: int, tau_effs: Sequence[float], k: int) -> float:
    """Expected drift of the monobit statistic, in standard deviations.

    ``tau_effs`` lists the mean interval (in counter counts) of each interval
    class in rotation, e.g. both sojourn means for both-edge reads.
    """
    mean_shortfall = np.mean([predict_bit_bias(t, k).sum() for t in tau_effs])
    return 2.0 * (n_bits / k) * mean_shortfall / math.sqrt(n_bits)
