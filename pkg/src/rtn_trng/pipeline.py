"""Generate -> extract -> test orchestration."""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analog_frontend import AnalogFrontend, AnalogParams
from .backends import BackendError, BackendSpec, SeededBackend, UniformBackend
from .bitfile import write_bitstream
from .extractor import (
    BitStream,
    EdgePolicy,
    ExtractorConfig,
    extract_words,
    pack,
    predict_bit_bias,
    predicted_monobit_z,
)
from .nist.battery import BatteryReport, TestParams, run_battery
from .report import exit_code, render
from .rtn_markov import RtnParams, RtnSimulator, SimulationExhausted, TransitionEvent, events_from_states

log = logging.getLogger(__name__)

DEFAULT_TARGET_BITS = 111072
ANALOG_CHUNK_TICKS = 1 << 20
ANALOG_STALL_CHUNKS = 16


class GenerationStalled(RuntimeError):
    """The comparator output stopped switching, so no more bits can be extracted."""


class GenerationShortfall(BackendError):
    """The backend ran dry before ``target_bits`` bits were produced."""

    def __init__(self, produced: int, target: int, metadata: dict) -> None:
        super().__init__(
            f"backend exhausted: produced {produced} of {target} bits (shortfall {target - produced})"
        )
        self.produced = produced
        self.target = target
        self.shortfall = target - produced
        self.metadata = metadata


@dataclass
class PipelineConfig:
    rtn: RtnParams = field(default_factory=RtnParams)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    backend: BackendSpec = field(default_factory=lambda: BackendSpec("os"))
    target_bits: int = DEFAULT_TARGET_BITS
    analog: AnalogParams | None = None
    noise_seed: int = 1
    tests: TestParams = field(default_factory=TestParams)
    out_path: str | None = None
    out_format: str = "raw"
    report_format: str = "table"
    report_path: str | None = None

    def __post_init__(self) -> None:
        if self.target_bits < 100:
            raise ValueError("target_bits must be at least 100")
        if self.out_format not in ("raw", "ascii"):
            raise ValueError("out_format must be 'raw' or 'ascii'")
        if self.report_format not in ("table", "json"):
            raise ValueError("report_format must be 'table' or 'json'")

    def describe(self) -> dict:
        return {
            "rtn": asdict(self.rtn),
            "extractor": {**asdict(self.extractor), "edge_policy": self.extractor.edge_policy.value},
            "backend": {k: v for k, v in asdict(self.backend).items() if v is not None},
            "target_bits": self.target_bits,
            "analog": asdict(self.analog) if self.analog else None,
            "tests": asdict(self.tests),
        }


def interval_means(rtn: RtnParams, cfg: ExtractorConfig) -> list[float]:
    """Mean counter counts per interval class, for the bias guard."""
    scale = rtn.dt * cfg.clock_div
    if cfg.edge_policy is EdgePolicy.BOTH:
        return [rtn.tau_e / scale, rtn.tau_c / scale]
    return [(rtn.tau_c + rtn.tau_e) / scale]


def bias_guard(rtn: RtnParams, cfg: ExtractorConfig, n_bits: int) -> dict:
    k = cfg.kept_bits
    taus = interval_means(rtn, cfg)
    bias = np.mean([predict_bit_bias(t, k) for t in taus], axis=0)
    z = predicted_monobit_z(n_bits, taus, k)
    risky = 2**k > min(taus) / 4
    guard = {
        "kept_bits": k,
        "interval_means": taus,
        "bit_bias": bias.tolist(),
        "predicted_monobit_z": z,
        "warning": None,
    }
    if risky:
        guard["warning"] = (
            f"2^{k} kept-bit range exceeds a quarter of the mean interval ({min(taus):g}); "
            f"predicted monobit drift {z:.1f} sigma"
        )
    return guard


class _EventCollector:
    def __init__(self, policy: EdgePolicy, needed: int) -> None:
        self.policy = policy
        self.needed = needed
        self.events: list[TransitionEvent] = []
        self.selected = 0

    @property
    def missing(self) -> int:
        return self.needed - self.selected

    def add(self, events: list[TransitionEvent]) -> None:
        for e in events:
            if self.missing <= 0:
                break
            self.events.append(e)
            if self.policy is EdgePolicy.BOTH or e.direction == (1 if self.policy is EdgePolicy.RISING else 0):
                self.selected += 1


def _collect_digital(sim: RtnSimulator, collector: _EventCollector) -> None:
    while collector.missing > 0:
        _, events = sim.run(event_limit=collector.missing)
        collector.add(events)


def _collect_analog(sim: RtnSimulator, frontend: AnalogFrontend, collector: _EventCollector) -> None:
    previous: int | None = None
    idle = 0
    while collector.missing > 0:
        start = sim.tick
        trace, _ = sim.run(tick_limit=ANALOG_CHUNK_TICKS, record_states=True)
        out = frontend.process(trace).states
        if previous is None:
            previous = int(out[0])
        events = [TransitionEvent(start + e.tick_index, e.direction) for e in events_from_states(out, previous)]
        previous = int(out[-1])
        idle = 0 if events else idle + 1
        if idle >= ANALOG_STALL_CHUNKS:
            raise GenerationStalled(
                f"comparator produced no edges in {idle * ANALOG_CHUNK_TICKS} ticks; "
                "check lp_window, hysteresis and noise settings"
            )
        collector.add(events)


def generate(config: PipelineConfig, backend: UniformBackend | None = None) -> tuple[BitStream, dict]:
    """Simulate until exactly ``config.target_bits`` bits have been extracted."""
    cfg = config.extractor
    k = cfg.kept_bits
    words_needed = math.ceil(config.target_bits / k)
    backend = backend or config.backend.open()
    sim = RtnSimulator(config.rtn, backend)
    collector = _EventCollector(cfg.edge_policy, words_needed + 1)
    guard = bias_guard(config.rtn, cfg, config.target_bits)
    if guard["warning"]:
        log.warning(guard["warning"])
    meta = {"backend": backend.describe(), "bias_guard": guard}

    def accounting() -> dict:
        return {
            **meta,
            "ticks_simulated": sim.tick,
            "variates_consumed": backend.consumed,
            "events_observed": len(collector.events),
            "selected_events": collector.selected,
        }

    try:
        if config.analog is None:
            _collect_digital(sim, collector)
        else:
            noise = SeededBackend(config.noise_seed) if config.analog.noise_sigma > 0 else None
            _collect_analog(sim, AnalogFrontend(config.analog, noise), collector)
    except SimulationExhausted as exc:
        if config.analog is None:
            collector.add(exc.events)
        words = extract_words(collector.events, cfg)
        produced = min(len(words) * k, config.target_bits)
        raise GenerationShortfall(produced, config.target_bits, accounting()) from exc
    words = extract_words(collector.events, cfg)[:words_needed]
    stream = pack(words, config.target_bits, k)
    meta = accounting()
    meta["intervals_used"] = len(words)
    meta["bits"] = stream.bit_count
    return stream, meta


def evaluate_stream(stream: BitStream, params: TestParams, metadata: dict | None = None) -> BatteryReport:
    return run_battery(stream.bits(), params, metadata=metadata)


EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def run_pipeline(config: PipelineConfig, stdout=None, stderr=None) -> int:
    """generate -> write -> battery -> report; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        stream, meta = generate(config)
        if config.out_path:
            write_bitstream(stream, config.out_path, config.out_format)
        meta["config"] = config.describe()
        battery = evaluate_stream(stream, config.tests, metadata=meta)
        text = render(battery, config.report_format)
        if config.report_path:
            Path(config.report_path).write_text(text)
        stdout.write(text)
        return exit_code(battery)
    except (BackendError, GenerationStalled, OSError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
