"""Contraction and expansion coefficients of quantum channels under relative entropy."""

__version__ = "0.1.0"

from .channels import (AffineRep, Channel, apply, choi, complementary, cp_leq, make_amplitude_damping,
                       make_dephasing, make_depolarizing, make_erasure, make_flagged_mixture,
                       make_qubit_dephasing, to_affine)
from .coefficients import CoefficientEstimate
from .divergences import (SupportPolicy, bkm_metric, bkm_qubit, hockey_stick, rel_entropy,
                          trace_distance, vn_entropy)
from .estimator import OptimizerConfig, estimate_coefficient, nogo_witness
from .lessnoisy import RegionSample, classify_degradability, p_min
from .parse import parse_channel

__all__ = [
    "AffineRep", "Channel", "CoefficientEstimate", "OptimizerConfig", "RegionSample",
    "SupportPolicy", "apply", "bkm_metric", "bkm_qubit", "choi", "classify_degradability",
    "complementary", "cp_leq", "estimate_coefficient", "hockey_stick", "make_amplitude_damping",
    "make_dephasing", "make_depolarizing", "make_erasure", "make_flagged_mixture",
    "make_qubit_dephasing", "nogo_witness", "p_min", "parse_channel", "rel_entropy", "to_affine",
    "trace_distance", "vn_entropy",
]
