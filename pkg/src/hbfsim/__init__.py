"""Hybrid analog/digital beamforming link simulator.

Simulates the downlink of a multiuser mmWave massive-MIMO system with a
constant-modulus RF stage and per-user baseband processing, and compares
seven precoder/combiner designs through an eigenvalue metric, achievable
sum rate and uncoded BER under maximum-distance detection.
"""

from .analog import CiaSettings, column_iterative, recursive_cia
from .channel import ChannelSet, PathComponent, generate_channel
from .core import (ConfigError, Diagnostics, HybridPrecoder, SolverError,
                   SystemConfig, UserCombiner, hermitian_inv_sqrt,
                   normalize_power, phase_project, pseudo_det,
                   snr_to_noise_var)
from .detection import Constellation, DetectorMode, detect, detect_batch, \
    make_constellation
from .digital import (BdOutput, MmseProblem, MmseSolution, bd_precoder,
                      constrained_mmse, mmse_bb, pseudo_mmse)
from .harness import ExperimentSpec, RunSummary, run
from .metrics import TrialRecord, ber_trial, eig_product_metric, sum_rate
from .schemes import (DesignResult, SchemeId, design, design_channel_stage,
                      design_noise_stage)

__version__ = "0.1.0"

__all__ = [
    "BdOutput", "ChannelSet", "CiaSettings", "ConfigError", "Constellation",
    "DesignResult", "DetectorMode", "Diagnostics", "ExperimentSpec",
    "HybridPrecoder", "MmseProblem", "MmseSolution", "PathComponent",
    "RunSummary", "SchemeId", "SolverError", "SystemConfig", "TrialRecord",
    "UserCombiner", "ber_trial", "bd_precoder", "column_iterative",
    "constrained_mmse", "design", "design_channel_stage",
    "design_noise_stage", "detect", "detect_batch", "eig_product_metric",
    "generate_channel", "hermitian_inv_sqrt", "make_constellation",
    "mmse_bb", "normalize_power", "phase_project", "pseudo_det",
    "pseudo_mmse", "recursive_cia", "run", "snr_to_noise_var", "sum_rate",
    "__version__",
]
