import numpy as np
import pytest

from rtn_trng.backends import UniformBackend

ACCEPTANCE_LINES: list[str] = []


class ArrayBackend(UniformBackend):
    """Finite backend over a fixed list of 32-bit words."""

    kind = "array"

    def __init__(self, words):
        super().__init__()
        self._words = np.asarray(words, dtype=np.uint32)
        self._pos = 0

    def _produce(self, n):
        out = self._words[self._pos : self._pos + n]
        self._pos += len(out)
        return out


def word_for(u: float) -> int:
    """Smallest 32-bit word whose variate is >= u."""
    return int(np.ceil(u * 2**32))


@pytest.fixture(scope="session")
def e_bits():
    """Binary expansion of e (integer part first), 10^6 bits."""
    mpmath = pytest.importorskip("mpmath")
    with mpmath.workprec(1_000_200):
        scaled = int(mpmath.floor(mpmath.e * mpmath.mpf(2) ** 1_000_050))
    text = bin(scaled)[2:][:1_000_000]
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


@pytest.fixture(scope="session")
def pi_bits():
    """Binary expansion of pi (integer part first)."""
    mpmath = pytest.importorskip("mpmath")
    with mpmath.workprec(2_000):
        scaled = int(mpmath.floor(mpmath.pi * mpmath.mpf(2) ** 1_500))
    text = bin(scaled)[2:]
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
