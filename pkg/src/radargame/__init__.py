"""Robust MIMO-radar waveform and receive-filter design against an adversarial extended target."""
from .detection import detection_probability, marcum_q1
from .model import (CMSC, EC, SCSC, Band, DesignResult, IterRecord, ModelError, Scenario, Waveform,
                    default_scenario, lfm_reference, noise_covariance, op_G, op_H, optimal_filter,
                    sinr, spectral_matrix, steering_vectors)

__version__ = "0.1.0"

__all__ = [
    "Band", "CMSC", "DesignResult", "EC", "IterRecord", "ModelError", "SCSC", "Scenario", "Waveform",
    "default_scenario", "detection_probability", "lfm_reference", "marcum_q1", "noise_covariance",
    "op_G", "op_H", "optimal_filter", "sinr", "spectral_matrix", "steering_vectors",
]
