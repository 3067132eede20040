"""Pieces shared by the three design algorithms."""
from __future__ import annotations

import numpy as np

from ..model import DesignResult, IterRecord, Scenario, Waveform, op_H, shift_matrix, target_gram
from ..solvers.trs import TrsResult, min_quad_ball


def worst_case_tir(scn: Scenario, s) -> TrsResult:
    """The target's best response to a fixed waveform; ``value`` is the resulting SINR."""
    s = s.s if isinstance(s, Waveform) else s
    return min_quad_ball(target_gram(scn, s), scn.t0, scn.radius)


def beam_covariance(scn: Scenario) -> np.ndarray:
    """``(I kron b)^H R_c^{-1} (I kron b)``.

    Because ``G(t) = (I kron b)(T kron a^T)``, every SINR quadratic form only
    sees the receive array through this ``(Q+L-1)``-square matrix.
    """
    _, b = scn.steering
    B = np.kron(np.eye(scn.tir_len + scn.code_len - 1), b[:, None])
    Rb = B.conj().T @ scn.cov_inv @ B
    return 0.5 * (Rb + Rb.conj().T)


def tx_tir_blocks(scn: Scenario) -> np.ndarray:
    """``J_{i-1} kron a^T`` for every tap: ``G(t) = (I kron b) sum_i t_i (.)_i``."""
    a, _ = scn.steering
    return np.stack([np.kron(shift_matrix(i, scn.tir_len, scn.code_len), a[None, :])
                     for i in range(scn.tir_len)])


def finish(scn: Scenario, s: np.ndarray, trace: list[IterRecord], converged: bool,
           info: dict | None = None, sinr_worst: float | None = None) -> DesignResult:
    """Worst-case response, matched filter and result record for a final waveform."""
    tr = worst_case_tir(scn, s)
    w = scn.cov_inv @ (op_H(scn, s) @ tr.t_star)
    value = tr.value if sinr_worst is None else sinr_worst
    return DesignResult(Waveform(s, scn.n_tx), w, tr.t_star, max(float(value), 0.0), trace,
                        converged, dict(info or {}))
