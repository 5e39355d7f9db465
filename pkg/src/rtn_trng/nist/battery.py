"""Runs the full battery in a fixed row order and aggregates the verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sts
from .sts import TestResult

MIN_BATTERY_BITS = 100

# (row label, test id) in fixed report order
ROWS = (
    ("Frequency Test (Monobit)", "monobit"),
    ("Frequency Test within a Block", "block_frequency"),
    ("Run Test", "runs"),
    ("Longest Run of Ones in a Block", "longest_run"),
    ("Binary Matrix Rank Test", "matrix_rank"),
    ("Discrete Fourier Transform", "dft_spectral"),
    ("Non-Overlapping Template Matching", "nonoverlapping_template"),
    ("Overlapping Template Matching", "overlapping_template"),
    ("Linear Complexity Test", "linear_complexity"),
    ("Serial Test", "serial"),
    ("Approximate Entropy Test", "approximate_entropy"),
    ("Cumulative Sums (Forward) Test", "cumulative_sums_forward"),
    ("Cumulative Sums (Reverse) Test", "cumulative_sums_reverse"),
    ("Random Excursions Test", "random_excursions"),
    ("Random Excursions Variant Test", "random_excursions_variant"),
)
ROW_NAMES = dict((tid, name) for name, tid in ROWS)


class InputTooShort(ValueError):
    pass


@dataclass(frozen=True)
class TestParams:
    """Battery knobs; ``None`` means pick from the input length."""

    alpha: float = 0.01
    block_freq_M: int | None = None  # n // 100
    longest_run_M: int | None = None  # 8 / 128 / 10000 by n
    rank_rows: int = 32
    rank_cols: int = 32
    template_m: int = 9
    # None selects every aperiodic template of length template_m
    templates: tuple[str, ...] | None = ("000000001",)
    template_blocks: int = 8
    overlapping_m: int = 9
    overlapping_K: int = 5
    overlapping_M: int = 1032
    linear_complexity_M: int = 500
    serial_m: int = 10
    apen_m: int = 8
    excursion_min_cycles: int = 500

    __test__ = False

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        sizes = (
            self.rank_rows, self.rank_cols, self.template_m, self.template_blocks,
            self.overlapping_m, self.overlapping_K, self.overlapping_M,
            self.linear_complexity_M, self.serial_m, self.apen_m,
        )
        if any(s <= 0 for s in sizes) or (self.block_freq_M is not None and self.block_freq_M <= 0):
            raise ValueError("all test sizes must be positive")
        if self.templates is not None:
            for t in self.templates:
                if len(t) != self.template_m or set(t) - {"0", "1"}:
                    raise ValueError(f"template {t!r} is not a {self.template_m}-bit pattern")


@dataclass
class BatteryReport:
    n: int
    results: list[TestResult]
    alpha: float = 0.01
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.results)

    @property
    def summary(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def rows(self) -> list[tuple[str, TestResult]]:
        return [(ROW_NAMES[r.test_id], r) for r in self.results]

    def result(self, test_id: str) -> TestResult:
        for r in self.results:
            if r.test_id == test_id:
                return r
        raise KeyError(test_id)

    def all_p_values(self) -> list[float]:
        return [p for r in self.results if r.applicable for p in r.p_values]


def run_battery(bits, params: TestParams | None = None, metadata: dict | None = None) -> BatteryReport:
    params = params or TestParams()
    eps = np.asarray(bits, dtype=np.uint8)
    n = len(eps)
    if n < MIN_BATTERY_BITS:
        raise InputTooShort(f"battery needs at least {MIN_BATTERY_BITS} bits, got {n}")
    a = params.alpha
    results = [
        sts.frequency_monobit(eps, alpha=a),
        sts.block_frequency(eps, M=params.block_freq_M, alpha=a),
        sts.runs(eps, alpha=a),
        sts.longest_run(eps, M=params.longest_run_M, alpha=a),
        sts.matrix_rank(eps, rows=params.rank_rows, cols=params.rank_cols, alpha=a),
        sts.dft_spectral(eps, alpha=a),
        sts.nonoverlapping_template(
            eps, templates=params.templates, m=params.template_m, N=params.template_blocks, alpha=a
        ),
        sts.overlapping_template(
            eps, m=params.overlapping_m, K=params.overlapping_K, M=params.overlapping_M, alpha=a
        ),
        sts.linear_complexity(eps, M=params.linear_complexity_M, alpha=a),
        sts.serial(eps, m=params.serial_m, alpha=a),
        sts.approximate_entropy(eps, m=params.apen_m, alpha=a),
        sts.cumulative_sums(eps, "forward", alpha=a),
        sts.cumulative_sums(eps, "reverse", alpha=a),
        sts.random_excursions(eps, min_cycles=params.excursion_min_cycles, alpha=a),
        sts.random_excursions_variant(eps, min_cycles=params.excursion_min_cycles, alpha=a),
    ]
    return BatteryReport(n=n, results=results, alpha=a, metadata=dict(metadata or {}))
