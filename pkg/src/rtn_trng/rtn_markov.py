"""Discrete-time two-state RTN (random telegraph noise) simulation.

State 0 is the low level (trap occupied), state 1 the high level (trap
vacant).  At every tick one uniform variate ``u`` is drawn and the state flips
when the per-tick transition probability of the current state exceeds ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backends import BackendExhausted, UniformBackend

RISING = 1
FALLING = 0


class InvalidParameter(ValueError):
    """A configuration that does not describe a physical RTN process."""


@dataclass(frozen=True)
class RtnParams:
    tau_c: float = 2500.0  # mean sojourn in state 1
    tau_e: float = 2500.0  # mean sojourn in state 0
    dt: float = 1.0

    def __post_init__(self) -> None:
        for name in ("tau_c", "tau_e", "dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be positive and finite, got {value}")
        if self.dt / self.tau_c > 1 or self.dt / self.tau_e > 1:
            raise InvalidParameter(
                f"dt={self.dt} exceeds a time constant (tau_c={self.tau_c}, tau_e={self.tau_e})"
            )


@dataclass(frozen=True)
class TransitionProbs:
    p01: float
    p10: float

    def __post_init__(self) -> None:
        for name in ("p01", "p10"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise InvalidParameter(f"{name} must lie in (0, 1], got {value}")


class TransitionEvent(NamedTuple):
    tick_index: int  # first tick at which the new state holds
    direction: int  # RISING (0->1) or FALLING (1->0)


@dataclass
class DigitalTrace:
    states: np.ndarray  # uint8, one entry per tick

    @property
    def tick_count(self) -> int:
        return len(self.states)


def derive_probs(params: RtnParams) -> TransitionProbs:
    return TransitionProbs(p01=params.dt / params.tau_e, p10=params.dt / params.tau_c)


def step(state: int, u: float, probs: TransitionProbs) -> int:
    if state == 0:
        return 1 if probs.p01 > u else 0
    return 0 if probs.p10 > u else 1


def events_from_states(states: np.ndarray, previous: int) -> list[TransitionEvent]:
    """Edges of a binary trace, given the state that held before tick 0."""
    states = np.asarray(states, dtype=np.int8)
    prev = np.concatenate([[previous], states[:-1]]).astype(np.int8)
    idx = np.flatnonzero(states != prev)
    return [TransitionEvent(int(i), int(states[i])) for i in idx]


class SimulationExhausted(BackendExhausted):
    """The backend ended before the requested limit; carries partial output."""

    def __init__(self, message: str, events: list, ticks: int) -> None:
        super().__init__(message)
        self.events = events
        self.ticks = ticks


class RtnSimulator:
    """Resumable simulator that draws exactly one variate per tick.

    Variates are read from the backend in chunks; the unused tail of a chunk
    is pushed back when a run stops on its event limit, so the backend's
    consumption count always equals :attr:`tick`.
    """

    def __init__(
        self,
        params: RtnParams,
        backend: UniformBackend,
        initial_state: int = 0,
        chunk_size: int = 1 << 20,
    ) -> None:
        if initial_state not in (0, 1):
            raise InvalidParameter("initial state must be 0 or 1")
        self.params = params
        self.probs = derive_probs(params)
        self.backend = backend
        self.state = initial_state
        self.tick = 0
        self.chunk_size = chunk_size
        # p > v * 2**-32  <=>  p * 2**32 > v, exact in float64
        self._thresholds = (self.probs.p01 * 2.0**32, self.probs.p10 * 2.0**32)

    def run(
        self,
        tick_limit: int | None = None,
        event_limit: int | None = None,
        record_states: bool = False,
    ) -> tuple[DigitalTrace | None, list[TransitionEvent]]:
        """Advance until ``tick_limit`` more ticks or ``event_limit`` more events."""
        if tick_limit is None and event_limit is None:
            raise ValueError("give tick_limit, event_limit, or both")
        events: list[TransitionEvent] = []
        chunks: list[np.ndarray] = []
        ticks_done = 0
        thr0, thr1 = self._thresholds
        while True:
            if tick_limit is not None and ticks_done >= tick_limit:
                break
            if event_limit is not None and len(events) >= event_limit:
                break
            n = self.chunk_size
            if tick_limit is not None:
                n = min(n, tick_limit - ticks_done)
            words = self.backend.take_words(n, partial=True)
            if len(words) == 0:
                raise SimulationExhausted(
                    f"backend exhausted after {self.tick} ticks", events, self.tick
                )
            v = words.astype(np.float64)
            cand0 = np.flatnonzero(thr0 > v)
            cand1 = cand0 if thr1 == thr0 else np.flatnonzero(thr1 > v)
            cands = (cand0, cand1)
            start_state = self.state
            state = start_state
            pos = 0
            used = len(words)
            local_events: list[int] = []
            while True:
                c = cands[state]
                k = np.searchsorted(c, pos)
                if k == len(c):
                    break
                i = int(c[k])
                state ^= 1
                local_events.append(i)
                events.append(TransitionEvent(self.tick + i, state))
                pos = i + 1
                if event_limit is not None and len(events) >= event_limit:
                    used = i + 1
                    break
            if used < len(words):
                self.backend.push_back(words[used:])
            if record_states:
                toggles = np.zeros(used, dtype=np.uint8)
                toggles[local_events] = 1
                chunks.append(start_state ^ (np.cumsum(toggles, dtype=np.int64) & 1).astype(np.uint8))
            self.state = state
            self.tick += used
            ticks_done += used
        trace = None
        if record_states:
            states = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.uint8)
            trace = DigitalTrace(states.astype(np.uint8))
        return trace, events


def simulate(
    params: RtnParams,
    backend: UniformBackend,
    tick_limit: int | None = None,
    event_limit: int | None = None,
    record_states: bool = True,
    initial_state: int = 0,
) -> tuple[DigitalTrace | None, list[TransitionEvent]]:
    """One-shot simulation from ``initial_state`` (0 by default)."""
    sim = RtnSimulator(params, backend, initial_state=initial_state)
    return sim.run(tick_limit=tick_limit, event_limit=event_limit, record_states=record_states)


def sojourn_lengths(events: list[TransitionEvent]) -> dict[int, np.ndarray]:
    """Completed sojourn lengths per state, from consecutive events."""
    ticks = np.array([e.tick_index for e in events], dtype=np.int64)
    dirs = np.array([e.direction for e in events], dtype=np.int8)
    lengths = np.diff(ticks)
    held = dirs[:-1]
    return {0: lengths[held == 0], 1: lengths[held == 1]}
