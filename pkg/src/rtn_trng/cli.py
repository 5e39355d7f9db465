"""Command-line entry point: ``rtn-trng``."""

from __future__ import annotations

import argparse
import logging
import sys

from .analog_frontend import AnalogParams
from .backends import BackendError, BackendSpec
from .bitfile import BitstreamFormatError, read_bitstream
from .extractor import ExtractorConfig
from .nist.battery import InputTooShort, TestParams, run_battery
from .pipeline import DEFAULT_TARGET_BITS, EXIT_ERROR, PipelineConfig, run_pipeline
from .report import exit_code, render
from .rtn_markov import RtnParams


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rtn-trng",
        description="Simulate an RTN-based TRNG, extract bits and run the statistical battery.",
    )
    g = p.add_argument_group("RTN source")
    g.add_argument("--tau-c", type=float, default=2500.0, help="mean time in state 1")
    g.add_argument("--tau-e", type=float, default=2500.0, help="mean time in state 0")
    g.add_argument("--dt", type=float, default=1.0, help="simulation time step")

    g = p.add_argument_group("extractor")
    g.add_argument("--counter-width", type=int, default=8)
    g.add_argument("--discard-msb", type=int, default=2)
    g.add_argument("--edges", choices=["both", "rising", "falling"], default="both")
    g.add_argument("--clock-div", type=int, default=1)
    g.add_argument("--bits", type=int, default=DEFAULT_TARGET_BITS, help="number of output bits")

    g = p.add_argument_group("entropy backend")
    g.add_argument(
        "--backend", default="os",
        help="os | seeded:<seed> | weak-lcg:<seed> | qrng[:<url>] | file:<path>",
    )
    g.add_argument("--qrng-cache", default="qrng_cache.bin", help="QRNG cache file")
    g.add_argument("--qrng-batch", type=int, default=1024, help="uint16 values per QRNG request")
    g.add_argument("--qrng-interval", type=float, default=60.0, help="seconds between QRNG requests")

    g = p.add_argument_group("analog front end")
    g.add_argument("--analog", action="store_true", help="route the trace through the comparator model")
    g.add_argument("--v-high", type=float, default=1.0)
    g.add_argument("--v-low", type=float, default=0.0)
    g.add_argument("--noise-sigma", type=float, default=0.0)
    g.add_argument("--lp-window", type=int, default=50000)
    g.add_argument("--hysteresis", type=float, default=0.0)
    g.add_argument("--noise-seed", type=int, default=1, help="seed of the waveform noise stream")

    g = p.add_argument_group("output and testing")
    g.add_argument("--out", help="write the bitstream to this file")
    g.add_argument("--format", choices=["raw", "ascii"], default="raw", help="bitstream file format")
    g.add_argument("--report", choices=["table", "json"], default="table")
    g.add_argument("--report-out", help="also write the report to this file")
    g.add_argument("--alpha", type=float, default=0.01)
    g.add_argument(
        "--all-templates", action="store_true",
        help="run the non-overlapping test on every aperiodic 9-bit template",
    )
    g.add_argument("--test-file", help="skip generation and test an existing bitstream file")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    backend = BackendSpec.parse(
        args.backend,
        batch_size=args.qrng_batch,
        cache_path=args.qrng_cache,
        min_interval=args.qrng_interval,
    )
    analog = None
    if args.analog:
        analog = AnalogParams(
            v_high=args.v_high, v_low=args.v_low, noise_sigma=args.noise_sigma,
            lp_window=args.lp_window, hysteresis=args.hysteresis,
        )
    tests = TestParams(alpha=args.alpha, templates=None if args.all_templates else ("000000001",))
    return PipelineConfig(
        rtn=RtnParams(tau_c=args.tau_c, tau_e=args.tau_e, dt=args.dt),
        extractor=ExtractorConfig(
            counter_width=args.counter_width, discard_msb=args.discard_msb,
            edge_policy=args.edges, clock_div=args.clock_div,
        ),
        backend=backend,
        target_bits=args.bits,
        analog=analog,
        noise_seed=args.noise_seed,
        tests=tests,
        out_path=args.out,
        out_format=args.format,
        report_format=args.report,
        report_path=args.report_out,
    )


def _test_file(args: argparse.Namespace, config: PipelineConfig) -> int:
    try:
        stream = read_bitstream(args.test_file, args.format)
        battery = run_battery(stream.bits(), config.tests, metadata={"source": args.test_file})
    except (OSError, BitstreamFormatError, InputTooShort) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    sys.stdout.write(render(battery, config.report_format))
    return exit_code(battery)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except (ValueError, BackendError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    if args.test_file:
        return _test_file(args, config)
    return run_pipeline(config)


if __name__ == "__main__":
    sys.exit(main())
