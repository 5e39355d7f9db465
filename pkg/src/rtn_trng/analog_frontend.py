"""Analog front end: drain-voltage waveform, low-pass reference, comparator.

The default pipeline skips this stage and feeds the simulated digital trace
to the extractor directly; enabling it lets the comparator see a noisy
two-level waveform instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backends import UniformBackend
from .rtn_markov import DigitalTrace


@dataclass(frozen=True)
class AnalogParams:
    v_high: float = 1.0
    v_low: float = 0.0
    noise_sigma: float = 0.0
    lp_window: int = 50000
    hysteresis: float = 0.0

    def __post_init__(self) -> None:
        if not self.v_high > self.v_low:
            raise ValueError("v_high must exceed v_low")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.lp_window < 1:
            raise ValueError("lp_window must be at least 1")
        if not 0 <= self.hysteresis < (self.v_high - self.v_low) / 2:
            raise ValueError("hysteresis must lie in [0, (v_high - v_low)/2)")


def gaussian(backend: UniformBackend, n: int) -> np.ndarray:
    """``n`` standard normals by Box-Muller, two variates per pair of samples."""
    pairs = (n + 1) // 2
    u = backend.uniforms(2 * pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))  # 1 - u > 0
    angle = 2.0 * math.pi * u[1::2]
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


class GaussianStream:
    """Standard normals from a backend, keeping the unused half of a pair.

    Draws are therefore independent of how requests are chunked.
    """

    def __init__(self, backend: UniformBackend) -> None:
        self.backend = backend
        self._spare = np.empty(0)

    def draw(self, n: int) -> np.ndarray:
        have = self._spare[:n]
        need = n - len(have)
        self._spare = self._spare[len(have):]
        if need <= 0:
            return have
        fresh = gaussian(self.backend, need + need % 2)
        self._spare = fresh[need:]
        return np.concatenate([have, fresh[:need]])


def synthesize(
    trace: DigitalTrace | np.ndarray,
    params: AnalogParams,
    noise: UniformBackend | GaussianStream | None = None,
) -> np.ndarray:
    states = trace.states if isinstance(trace, DigitalTrace) else np.asarray(trace)
    if len(states) == 0:
        raise ValueError("cannot synthesize an empty trace")
    samples = np.where(states.astype(bool), params.v_high, params.v_low).astype(np.float64)
    if params.noise_sigma > 0:
        if noise is None:
            raise ValueError("noise_sigma > 0 requires a noise backend")
        if not isinstance(noise, GaussianStream):
            noise = GaussianStream(noise)
        samples += params.noise_sigma * noise.draw(len(samples))
    return samples


def vref_lowpass(samples: np.ndarray, lp_window: int, history: np.ndarray | None = None) -> np.ndarray:
    """Causal moving average over the last ``lp_window`` samples.

    ``history`` holds samples that precede ``samples`` (at most
    ``lp_window - 1`` are used), for chunked processing.
    """
    if lp_window < 1:
        raise ValueError("lp_window must be at least 1")
    samples = np.asarray(samples, dtype=np.float64)
    if lp_window == 1:
        return samples.copy()
    if history is None:
        history = np.empty(0)
    history = np.asarray(history, dtype=np.float64)[len(history) - min(len(history), lp_window - 1):]
    full = np.concatenate([history, samples])
    csum = np.concatenate([[0.0], np.cumsum(full)])
    end = np.arange(len(history), len(full)) + 1
    start = np.maximum(0, end - lp_window)
    return (csum[end] - csum[start]) / (end - start)


def digitize(samples: np.ndarray, vref: np.ndarray, hysteresis: float = 0.0, initial: int | None = None) -> DigitalTrace:
    """Schmitt-trigger comparator.

    Output goes to 1 above ``vref + hysteresis``, to 0 below
    ``vref - hysteresis`` and holds otherwise.  The first output is
    ``samples[0] >= vref[0]`` unless a carried-over ``initial`` is given.
    """
    samples = np.asarray(samples, dtype=np.float64)
    vref = np.asarray(vref, dtype=np.float64)
    if samples.shape != vref.shape:
        raise ValueError(f"length mismatch: {samples.shape} samples vs {vref.shape} references")
    if len(samples) == 0:
        return DigitalTrace(np.empty(0, dtype=np.uint8))
    marks = np.full(len(samples), -1, dtype=np.int8)
    marks[samples < vref - hysteresis] = 0
    marks[samples > vref + hysteresis] = 1
    if initial is None:
        if marks[0] < 0:
            marks[0] = 1 if samples[0] >= vref[0] else 0
        start = None
    else:
        start = int(initial)
    idx = np.where(marks >= 0, np.arange(len(marks)), -1)
    last = np.maximum.accumulate(idx)
    out = np.where(last >= 0, marks[np.maximum(last, 0)], -1 if start is None else start)
    return DigitalTrace(out.astype(np.uint8))


class AnalogFrontend:
    """Chunked synthesize -> low-pass -> comparator with carried state."""

    def __init__(self, params: AnalogParams, noise: UniformBackend | None = None) -> None:
        self.params = params
        self.noise = GaussianStream(noise) if noise is not None else None
        self._history = np.empty(0)
        self._output: int | None = None

    def process(self, trace: DigitalTrace) -> DigitalTrace:
        samples = synthesize(trace, self.params, self.noise)
        vref = vref_lowpass(samples, self.params.lp_window, self._history)
        out = digitize(samples, vref, self.params.hysteresis, initial=self._output)
        keep = self.params.lp_window - 1
        if keep:
            self._history = np.concatenate([self._history, samples])[-keep:]
        self._output = int(out.states[-1])
        return out
