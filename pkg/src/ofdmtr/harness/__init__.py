"""Reproducible experiment runners and the command-line front end."""

from .config import ExperimentConfig, config_hash, load, parse, preset, serialize
from .experiments import (
    CcdfCurve,
    empirical_ccdf,
    run_ccdf_experiment,
    run_detection_experiment,
    run_envelope_experiment,
)
from .rng import qpsk, seeded_rng, uniform_phase

__all__ = [
    "CcdfCurve",
    "ExperimentConfig",
    "config_hash",
    "empirical_ccdf",
    "load",
    "parse",
    "preset",
    "qpsk",
    "run_ccdf_experiment",
    "run_detection_experiment",
    "run_envelope_experiment",
    "seeded_rng",
    "serialize",
    "uniform_phase",
]
