"""Leakage-aware surface code simulation and analysis."""

from .analysis import (FitModel, FitResult, NoCrossingError, ThresholdEstimate, compute_p_star,
                       estimate_threshold, expected_scaling, fit_empirical_distance)
from .codes import CodeLayout, PauliSupport, build_code
from .decoder_graph import DecoderGraph, build_decoder_graph
from .faultpath import EffectiveDistanceReport, certify_effective_distance, enumerate_leakage_error_set
from .matching import Decoder, mwpm
from .montecarlo import ExperimentConfig, SimResult, SimRow, run_experiment, run_trial
from .pauli_frame import LeakModel, NoiseParams
from .schedules import LRU, Schedule, Style, build_schedule

__version__ = "0.1.0"
__all__ = [
    "CodeLayout", "Decoder", "DecoderGraph", "EffectiveDistanceReport", "ExperimentConfig", "FitModel",
    "FitResult", "LRU", "LeakModel", "NoCrossingError", "NoiseParams", "PauliSupport", "Schedule",
    "SimResult", "SimRow", "Style", "ThresholdEstimate", "build_code", "build_decoder_graph",
    "build_schedule", "certify_effective_distance", "compute_p_star", "enumerate_leakage_error_set",
    "estimate_threshold", "expected_scaling", "fit_empirical_distance", "mwpm", "run_experiment",
    "run_trial",
]
