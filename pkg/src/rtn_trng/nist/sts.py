"""The SP 800-22 statistical tests, one function per test.

Every test takes a 0/1 ``uint8`` array and returns a :class:`TestResult`.
Inputs shorter than a test's hard minimum yield a not-applicable result;
lengths below the suite's recommendations only add warnings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf2 import berlekamp_massey, matrix_rows, rank_gf2
from .special import erfc, igamc, normal_cdf


@dataclass
class TestResult:
    test_id: str
    p_values: list[float] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    alpha: float = 0.01
    applicable: bool = True
    reason: str | None = None
    warnings: list[str] = field(default_factory=list)

    __test__ = False  # not a pytest class

    @property
    def passed(self) -> bool | None:
        if not self.applicable:
            return None
        return all(p >= self.alpha for p in self.p_values)

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return "N.A."
        return "Pass" if self.passed else "Fail"

    @property
    def min_p(self) -> float | None:
        return min(self.p_values) if self.p_values else None


def _bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    return arr


def parse_bits(text: str) -> np.ndarray:
    """'0110 1...' -> uint8 array; whitespace is ignored."""
    return np.array([int(c) for c in text if not c.isspace()], dtype=np.uint8)


def _not_applicable(test_id: str, reason: str, alpha: float, **params) -> TestResult:
    return TestResult(test_id, params=params, alpha=alpha, applicable=False, reason=reason)


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


def frequency_monobit(bits, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if n == 0:
        return _not_applicable("monobit", "empty input", alpha)
    s_n = 2 * int(eps.sum()) - n
    s_obs = abs(s_n) / math.sqrt(n)
    p = erfc(s_obs / math.sqrt(2))
    res = TestResult("monobit", [_clip(p)], details={"S_n": s_n, "s_obs": s_obs}, alpha=alpha)
    if n < 100:
        res.warnings.append("n < 100")
    return res


def block_frequency(bits, M: int | None = None, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if M is None:
        M = max(1, n // 100)
    N = n // M
    if N == 0:
        return _not_applicable("block_frequency", f"n={n} shorter than one block of M={M}", alpha, M=M)
    pi = eps[: N * M].reshape(N, M).mean(axis=1)
    chi2 = 4.0 * M * float(np.sum((pi - 0.5) ** 2))
    p = igamc(N / 2.0, chi2 / 2.0)
    res = TestResult("block_frequency", [_clip(p)], params={"M": M, "N": N}, details={"chi2": chi2}, alpha=alpha)
    if n < 100 or M < 20:
        res.warnings.append("parameters outside recommendations (n >= 100, M >= 20)")
    return res


def runs(bits, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if n < 2:
        return _not_applicable("runs", "n < 2", alpha)
    pi = float(eps.mean())
    tau = 2.0 / math.sqrt(n)
    if abs(pi - 0.5) >= tau:
        return TestResult("runs", [0.0], details={"pi": pi, "prerequisite": False}, alpha=alpha)
    v_n = 1 + int(np.count_nonzero(eps[1:] != eps[:-1]))
    num = abs(v_n - 2.0 * n * pi * (1 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)
    p = erfc(num / den)
    return TestResult("runs", [_clip(p)], details={"pi": pi, "V_n": v_n, "prerequisite": True}, alpha=alpha)


# (block length, category lower bound, category upper bound, probabilities)
LONGEST_RUN_TABLES = {
    8: (1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
    128: (4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    10000: (10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
}


def longest_run_block_size(n: int) -> int | None:
    if n < 128:
        return None
    if n < 6272:
        return 8
    if n < 750000:
        return 128
    return 10000


def longest_runs_per_block(blocks: np.ndarray) -> np.ndarray:
    cur = np.zeros(blocks.shape[0], dtype=np.int64)
    best = np.zeros(blocks.shape[0], dtype=np.int64)
    for j in range(blocks.shape[1]):
        cur = (cur + 1) * blocks[:, j]
        np.maximum(best, cur, out=best)
    return best


def longest_run(bits, M: int | None = None, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if M is None:
        M = longest_run_block_size(n)
        if M is None:
            return _not_applicable("longest_run", f"n={n} < 128", alpha)
    if M not in LONGEST_RUN_TABLES:
        raise ValueError(f"longest-run block size must be one of {sorted(LONGEST_RUN_TABLES)}")
    N = n // M
    if N == 0:
        return _not_applicable("longest_run", f"n={n} shorter than one block of M={M}", alpha, M=M)
    lo, hi, probs = LONGEST_RUN_TABLES[M]
    longest = longest_runs_per_block(eps[: N * M].reshape(N, M).astype(np.int64))
    nu = np.bincount(np.clip(longest, lo, hi) - lo, minlength=len(probs))
    expected = N * np.asarray(probs)
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    K = len(probs) - 1
    p = igamc(K / 2.0, chi2 / 2.0)
    return TestResult(
        "longest_run", [_clip(p)], params={"M": M, "N": N, "K": K},
        details={"nu": nu.tolist(), "chi2": chi2}, alpha=alpha,
    )


@lru_cache(maxsize=None)
def rank_probabilities(rows: int = 32, cols: int = 32) -> tuple[float, float, float]:
    """P(rank = full), P(rank = full - 1), P(rank <= full - 2) for random matrices."""

    def p_rank(r: int) -> float:
        log2 = r * (rows + cols - r) - rows * cols
        prod = 1.0
        for i in range(r):
            prod *= (1 - 2.0 ** (i - rows)) * (1 - 2.0 ** (i - cols)) / (1 - 2.0 ** (i - r))
        return 2.0**log2 * prod

    full = min(rows, cols)
    p_full = p_rank(full)
    p_minus = p_rank(full - 1)
    return p_full, p_minus, 1.0 - p_full - p_minus


def matrix_rank(bits, rows: int = 32, cols: int = 32, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    N = n // (rows * cols)
    if N == 0:
        return _not_applicable("matrix_rank", f"n={n} holds no {rows}x{cols} matrix", alpha)
    ranks = np.array([rank_gf2(m) for m in matrix_rows(eps, rows, cols)])
    full = min(rows, cols)
    f_full = int(np.count_nonzero(ranks == full))
    f_minus = int(np.count_nonzero(ranks == full - 1))
    f_rest = N - f_full - f_minus
    probs = rank_probabilities(rows, cols)
    chi2 = sum((f - N * q) ** 2 / (N * q) for f, q in zip((f_full, f_minus, f_rest), probs))
    p = math.exp(-chi2 / 2.0)
    res = TestResult(
        "matrix_rank", [_clip(p)], params={"rows": rows, "cols": cols, "N": N},
        details={"F": [f_full, f_minus, f_rest], "chi2": chi2}, alpha=alpha,
    )
    if N < 38:
        res.warnings.append(f"only {N} matrices (at least 38 recommended)")
    return res


def dft_moduli(x: np.ndarray) -> np.ndarray:
    """Moduli of the first n//2 DFT coefficients of a real sequence."""
    return np.abs(np.fft.fft(x))[: len(x) // 2]


def dft_spectral(bits, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if n < 2:
        return _not_applicable("dft_spectral", "n < 2", alpha)
    moduli = dft_moduli(2.0 * eps - 1.0)
    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = int(np.count_nonzero(moduli < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    p = erfc(abs(d) / math.sqrt(2))
    res = TestResult("dft_spectral", [_clip(p)], details={"T": threshold, "N0": n0, "N1": n1, "d": d}, alpha=alpha)
    if n < 1000:
        res.warnings.append("n < 1000")
    return res


def _template_str(value: int, m: int) -> str:
    return format(value, f"0{m}b")


def is_aperiodic(template: int, m: int) -> bool:
    """True when no proper shift of the template overlaps itself."""
    for k in range(1, m):
        if (template >> k) == template & ((1 << (m - k)) - 1):
            return False
    return True


@lru_cache(maxsize=None)
def aperiodic_templates(m: int) -> tuple[int, ...]:
    return tuple(t for t in range(1 << m) if is_aperiodic(t, m))


def window_values(eps: np.ndarray, m: int, circular: bool = False) -> np.ndarray:
    """Integer value of every m-bit window (first bit = MSB)."""
    seq = np.concatenate([eps, eps[: m - 1]]) if circular else eps
    count = len(seq) - m + 1
    if count <= 0:
        return np.empty(0, dtype=np.int64)
    vals = np.zeros(count, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | seq[j : j + count]
    return vals


def _nonoverlapping_count(windows: np.ndarray, template: int, m: int, aperiodic: bool) -> int:
    hits = np.flatnonzero(windows == template)
    if aperiodic or len(hits) == 0:
        return len(hits)
    count, next_free = 0, -1
    for h in hits:
        if h >= next_free:
            count += 1
            next_free = h + m
    return count


def nonoverlapping_template(
    bits, templates=None, m: int = 9, N: int = 8, alpha: float = 0.01
) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if templates is None:
        templates = aperiodic_templates(m)
    else:
        templates = [int(t, 2) if isinstance(t, str) else int(t) for t in templates]
    M = n // N
    if M < m:
        return _not_applicable("nonoverlapping_template", f"block length {M} < m={m}", alpha, m=m, N=N)
    mu = (M - m + 1) / 2.0**m
    var = M * (1 / 2.0**m - (2 * m - 1) / 2.0 ** (2 * m))
    block_windows = [window_values(eps[i * M : (i + 1) * M], m) for i in range(N)]
    aper = {t: is_aperiodic(t, m) for t in templates}
    if all(aper.values()):
        hist = np.stack([np.bincount(w, minlength=1 << m) for w in block_windows])
        counts = hist[:, list(templates)].T
    else:
        counts = np.array([[_nonoverlapping_count(w, t, m, aper[t]) for w in block_windows] for t in templates])
    chi2 = ((counts - mu) ** 2).sum(axis=1) / var
    pvals = [_clip(igamc(N / 2.0, float(c) / 2.0)) for c in chi2]
    res = TestResult(
        "nonoverlapping_template", pvals, params={"m": m, "N": N, "M": M},
        details={
            "templates": [_template_str(t, m) for t in templates],
            "W": counts.tolist(), "chi2": chi2.tolist(), "mu": mu, "sigma2": var,
        },
        alpha=alpha,
    )
    return res


@lru_cache(maxsize=None)
def overlapping_probabilities(m: int = 9, M: int = 1032, K: int = 5) -> tuple[float, ...]:
    """Exact distribution of overlapping all-ones m-runs in M fair bits.

    Returns P(count = 0..K-1) and P(count >= K), by dynamic programming over
    (trailing run of ones capped at m, count capped at K).
    """
    dist = np.zeros((m + 1, K + 1))
    dist[0, 0] = 1.0
    for _ in range(M):
        nxt = np.zeros_like(dist)
        nxt[0, :] += 0.5 * dist.sum(axis=0)  # next bit 0
        nxt[1:m, :] += 0.5 * dist[0 : m - 1, :]  # run grows, no hit yet
        hit = 0.5 * (dist[m - 1, :] + dist[m, :])  # run reaches m
        nxt[m, 1:] += hit[:-1]
        nxt[m, K] += hit[K]
        dist = nxt
    return tuple(dist.sum(axis=0).tolist())


def compound_poisson_probabilities(m: int, M: int, K: int) -> tuple[float, ...]:
    """The suite's compound-Poisson approximation to the same distribution."""
    eta = (M - m + 1) / 2.0**m / 2.0
    probs = [math.exp(-eta)]
    for u in range(1, K):
        total = 0.0
        for ell in range(1, u + 1):
            total += math.exp(
                -eta - u * math.log(2) + ell * math.log(eta) - math.lgamma(ell + 1)
                + math.lgamma(u) - math.lgamma(ell) - math.lgamma(u - ell + 1)
            )
        probs.append(total)
    probs.append(1.0 - sum(probs))
    return tuple(probs)


def overlapping_template(
    bits, m: int = 9, K: int = 5, M: int = 1032, probabilities=None, alpha: float = 0.01
) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    N = n // M
    if N == 0:
        return _not_applicable("overlapping_template", f"n={n} shorter than one block of M={M}", alpha)
    probs = np.asarray(probabilities if probabilities is not None else overlapping_probabilities(m, M, K))
    target = (1 << m) - 1
    windows = window_values(eps[: N * M], m)
    per_block = np.zeros(N, dtype=np.int64)
    starts = np.arange(len(windows))
    valid = (starts % M) <= M - m  # windows lying inside one block
    hits = starts[valid & (windows == target)]
    np.add.at(per_block, hits // M, 1)
    nu = np.bincount(np.minimum(per_block, K), minlength=K + 1)
    expected = N * probs
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    p = igamc(K / 2.0, chi2 / 2.0)
    res = TestResult(
        "overlapping_template", [_clip(p)], params={"m": m, "K": K, "M": M, "N": N},
        details={"nu": nu.tolist(), "pi": probs.tolist(), "chi2": chi2}, alpha=alpha,
    )
    if n < 10**6:
        res.warnings.append("n < 10^6 recommended for the overlapping template test")
    return res


LINEAR_COMPLEXITY_PROBS = (1 / 96, 1 / 32, 1 / 8, 1 / 2, 1 / 4, 1 / 16, 1 / 48)


def linear_complexity(bits, M: int = 500, probabilities=None, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    N = n // M
    if N == 0:
        return _not_applicable("linear_complexity", f"n={n} shorter than one block of M={M}", alpha, M=M)
    blocks = eps[: N * M].reshape(N, M)
    lengths = np.array([berlekamp_massey(b.tolist()) for b in blocks])
    sign = -1.0 if M % 2 else 1.0
    mu = M / 2.0 + (9 + (-1) ** (M + 1)) / 36.0 - (M / 3.0 + 2 / 9.0) / 2.0**M
    t = sign * (lengths - mu) + 2 / 9.0
    edges = np.array([-2.5, -1.5, -0.5, 0.5, 1.5, 2.5])
    nu = np.bincount(np.searchsorted(edges, t, side="left"), minlength=7)
    probs = LINEAR_COMPLEXITY_PROBS if probabilities is None else probabilities
    expected = N * np.asarray(probs)
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    p = igamc(3.0, chi2 / 2.0)
    res = TestResult(
        "linear_complexity", [_clip(p)], params={"M": M, "N": N, "K": 6},
        details={"nu": nu.tolist(), "chi2": chi2, "mu": mu}, alpha=alpha,
    )
    if n < 10**6:
        res.warnings.append("n < 10^6 recommended for the linear complexity test")
    if not 500 <= M <= 5000 or N < 200:
        res.warnings.append("parameters outside recommendations (500 <= M <= 5000, N >= 200)")
    return res


def pattern_counts(eps: np.ndarray, m: int) -> np.ndarray:
    """Counts of every m-bit pattern over the circularly extended sequence."""
    if m <= 0:
        return np.array([len(eps)])
    return np.bincount(window_values(eps, m, circular=True), minlength=1 << m)


def psi_squared(bits, m: int) -> float:
    eps = _bits(bits)
    n = len(eps)
    if m <= 0:
        return 0.0
    counts = pattern_counts(eps, m).astype(np.float64)
    return float(2.0**m / n * np.sum(counts**2) - n)


def serial(bits, m: int = 10, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if m < 2:
        raise ValueError("serial test needs m >= 2")
    if n < m:
        return _not_applicable("serial", f"n={n} < m={m}", alpha, m=m)
    psi = [psi_squared(eps, m - k) for k in range(3)]
    del1 = psi[0] - psi[1]
    del2 = psi[0] - 2 * psi[1] + psi[2]
    p1 = igamc(2.0 ** (m - 2), del1 / 2.0)
    p2 = igamc(2.0 ** (m - 3), del2 / 2.0)
    res = TestResult(
        "serial", [_clip(p1), _clip(p2)], params={"m": m},
        details={"psi2": psi, "del_psi2": del1, "del2_psi2": del2}, alpha=alpha,
    )
    if m >= int(math.log2(n)) - 2:
        res.warnings.append(f"m={m} not below floor(log2 n) - 2")
    return res


def phi(eps: np.ndarray, m: int) -> float:
    if m <= 0:
        return 0.0
    counts = pattern_counts(eps, m)
    c = counts[counts > 0] / len(eps)
    return float(np.sum(c * np.log(c)))


def approximate_entropy(bits, m: int = 8, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if n < m + 1:
        return _not_applicable("approximate_entropy", f"n={n} < m+1", alpha, m=m)
    apen = phi(eps, m) - phi(eps, m + 1)
    chi2 = 2.0 * n * (math.log(2) - apen)
    p = igamc(2.0 ** (m - 1), chi2 / 2.0)
    res = TestResult(
        "approximate_entropy", [_clip(p)], params={"m": m},
        details={"ApEn": apen, "chi2": chi2}, alpha=alpha,
    )
    if m >= int(math.log2(n)) - 5:
        res.warnings.append(f"m={m} not below floor(log2 n) - 5")
    return res


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def cusum_p_value(n: int, z: int) -> float:
    """Two-sided series for the maximal excursion ``z`` of an n-step walk."""
    if z == 0:
        return 1.0
    sqn = math.sqrt(n)
    nz = _trunc_div(n, z)
    total1 = 0.0
    for k in range(_trunc_div(-nz + 1, 4), _trunc_div(nz - 1, 4) + 1):
        total1 += normal_cdf((4 * k + 1) * z / sqn) - normal_cdf((4 * k - 1) * z / sqn)
    total2 = 0.0
    for k in range(_trunc_div(-nz - 3, 4), _trunc_div(nz - 1, 4) + 1):
        total2 += normal_cdf((4 * k + 3) * z / sqn) - normal_cdf((4 * k + 1) * z / sqn)
    return 1.0 - total1 + total2


def cumulative_sums(bits, mode: str = "forward", alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    n = len(eps)
    if mode not in ("forward", "reverse"):
        raise ValueError("mode must be 'forward' or 'reverse'")
    test_id = f"cumulative_sums_{mode}"
    if n == 0:
        return _not_applicable(test_id, "empty input", alpha)
    x = 2 * eps.astype(np.int64) - 1
    if mode == "reverse":
        x = x[::-1]
    z = int(np.max(np.abs(np.cumsum(x))))
    p = cusum_p_value(n, z)
    res = TestResult(test_id, [_clip(p)], params={"mode": mode}, details={"z": z}, alpha=alpha)
    if n < 100:
        res.warnings.append("n < 100")
    return res


EXCURSION_STATES = (-4, -3, -2, -1, 1, 2, 3, 4)
VARIANT_STATES = tuple(x for x in range(-9, 10) if x != 0)


def excursion_probabilities(x: int) -> tuple[float, ...]:
    """P(a cycle visits state x exactly k times), k = 0..4, and k >= 5."""
    ax = abs(x)
    q = 1 - 1 / (2 * ax)
    probs = [q]
    for k in range(1, 5):
        probs.append(1 / (4 * ax * ax) * q ** (k - 1))
    probs.append(1 / (2 * ax) * q**4)
    return tuple(probs)


def excursion_walk(eps: np.ndarray) -> tuple[np.ndarray, int]:
    """Walk of partial sums padded with a zero at each end, and cycle count J."""
    walk = np.concatenate([[0], np.cumsum(2 * eps.astype(np.int64) - 1), [0]])
    zeros = np.flatnonzero(walk == 0)
    return walk, len(zeros) - 1


def random_excursions(bits, min_cycles: int = 500, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    walk, J = excursion_walk(eps)
    cycle_of = np.cumsum(walk == 0) - 1
    table = {}
    for x in EXCURSION_STATES:
        visits = np.bincount(cycle_of[walk == x], minlength=J)[:J]
        table[x] = np.bincount(np.minimum(visits, 5), minlength=6).tolist()
    details = {"J": J, "states": list(EXCURSION_STATES), "nu": table}
    if J < min_cycles:
        res = _not_applicable("random_excursions", f"J={J} cycles < {min_cycles}", alpha)
        res.details = details
        return res
    pvals, chis = [], []
    for x in EXCURSION_STATES:
        expected = J * np.asarray(excursion_probabilities(x))
        chi2 = float(np.sum((np.asarray(table[x]) - expected) ** 2 / expected))
        chis.append(chi2)
        pvals.append(_clip(igamc(2.5, chi2 / 2.0)))
    details["chi2"] = chis
    return TestResult("random_excursions", pvals, details=details, alpha=alpha)


def random_excursions_variant(bits, min_cycles: int = 500, alpha: float = 0.01) -> TestResult:
    eps = _bits(bits)
    walk, J = excursion_walk(eps)
    offset = 9
    hist = np.bincount(np.clip(walk, -offset - 1, offset + 1) + offset + 1, minlength=2 * offset + 3)
    xi = {x: int(hist[x + offset + 1]) for x in VARIANT_STATES}
    details = {"J": J, "states": list(VARIANT_STATES), "xi": xi}
    if J < min_cycles:
        res = _not_applicable("random_excursions_variant", f"J={J} cycles < {min_cycles}", alpha)
        res.details = details
        return res
    pvals = [
        _clip(erfc(abs(xi[x] - J) / math.sqrt(2.0 * J * (4 * abs(x) - 2)))) for x in VARIANT_STATES
    ]
    return TestResult("random_excursions_variant", pvals, details=details, alpha=alpha)
