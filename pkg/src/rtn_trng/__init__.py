"""Random-telegraph-noise true random number generator, simulated end to end."""

from .backends import BackendSpec, OsEntropyBackend, SeededBackend, WeakLcgBackend, FileReplayBackend
from .extractor import BitStream, EdgePolicy, ExtractorConfig
from .pipeline import PipelineConfig, generate, run_pipeline
from .rtn_markov import RtnParams, RtnSimulator, derive_probs, simulate, step

__version__ = "0.1.0"

__all__ = [
    "BackendSpec",
    "BitStream",
    "EdgePolicy",
    "ExtractorConfig",
    "FileReplayBackend",
    "OsEntropyBackend",
    "PipelineConfig",
    "RtnParams",
    "RtnSimulator",
    "SeededBackend",
    "WeakLcgBackend",
    "derive_probs",
    "generate",
    "run_pipeline",
    "simulate",
    "step",
]
