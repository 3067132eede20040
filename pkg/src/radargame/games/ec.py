"""Energy-constrained design: a convex SDP in the target response followed by an eigenvector."""
from __future__ import annotations

import time

import numpy as np

from ..model import DesignResult, IterRecord, ModelError, Scenario, waveform_gram
from ..solvers.conic import ConicProblem, complex_lmi_coeffs, solve_or_raise
from ..solvers.eig import herm_eig, principal_eigvec
from .common import beam_covariance, finish

# relative eigengap below which the top eigenvector of the waveform Gram is ambiguous
DEGENERATE_GAP = 1e-6


def _ball_soc(p: ConicProblem, scn: Scenario):
    q = scn.tir_len
    p.add_soc({"t": np.eye(2 * q)}, -np.concatenate([scn.t0.real, scn.t0.imag]), {}, scn.radius)


def _lmi_problem(scn: Scenario, literal: bool) -> tuple[ConicProblem, int]:
    """``min mu`` s.t. ``[[mu I, X(t)^H], [X(t), Y]] >= 0`` and the ball constraint.

    The literal form uses ``X = G(t)``, ``Y = R_c``.  The reduced form uses
    ``X = T(t)`` and ``Y`` the inverse beam covariance; its optimum is the
    literal one divided by ``n_tx``.
    """
    if literal:
        taps = scn.tap_operators
        Y = scn.noise_cov
    else:
        taps = np.stack([np.eye(scn.tir_len + scn.code_len - 1, scn.code_len, k=-i)
                         for i in range(scn.tir_len)])
        Y = np.linalg.inv(beam_covariance(scn))
        Y = 0.5 * (Y + Y.conj().T)
    k = taps.shape[2]
    m = k + Y.shape[0]
    p = ConicProblem()
    p.real("mu")
    p.complex("t", scn.tir_len)
    const = np.zeros((m, m), dtype=complex)
    const[k:, k:] = Y
    F_mu = np.zeros((1, m, m), dtype=complex)
    F_mu[0, :k, :k] = np.eye(k)
    K = np.zeros((scn.tir_len, m, m), dtype=complex)
    K[:, k:, :k] = taps
    p.add_lmi(const, {"mu": F_mu, "t": complex_lmi_coeffs(K)})
    _ball_soc(p, scn)
    p.minimize({"mu": 1.0})
    return p, k


def design_ec(scn: Scenario, e_t: float, literal: bool = False) -> DesignResult:
    """Robust waveform-filter pair under ``||s||^2 <= e_t``.

    The target's equilibrium response minimises the largest eigenvalue of
    ``G(t)^H R_c^{-1} G(t)`` over the ball; the waveform is the scaled
    principal eigenvector at that response.
    """
    if not e_t > 0:
        raise ModelError("e_t must be positive")
    start = time.perf_counter()
    info = {"form": "literal" if literal else "reduced"}
    dual_dir = None
    if scn.radius == 0:
        t_star = scn.t0.copy()
    else:
        p, k = _lmi_problem(scn, literal)
        sol = solve_or_raise(p, "energy-constrained design SDP")
        t_star = sol["t"]
        info.update(sdp_value=sol.objective_value * (1 if literal else scn.n_tx),
                    iterations=sol.iterations)
        if sol.lmi_duals:
            dual_dir = sol.lmi_duals[0][:k, :k]
    C = waveform_gram(scn, t_star)
    lam, _ = herm_eig(C)
    v = principal_eigvec(C)
    gap = (lam[0] - lam[1]) / max(lam[0], 1e-300) if lam.size > 1 else 1.0
    if gap < DEGENERATE_GAP and dual_dir is not None:
        # the dual block of the LMI singles out the equilibrium direction
        u = principal_eigvec(0.5 * (dual_dir + dual_dir.conj().T))
        if not literal:
            a, _ = scn.steering
            u = np.kron(u, np.conj(a)) / np.sqrt(scn.n_tx)
        v = u / np.linalg.norm(u)
        info["degenerate_top_eigenvalue"] = True
    s = np.sqrt(e_t) * v
    value = e_t * float(lam[0])
    trace = [IterRecord(1, value, None, 1e3 * (time.perf_counter() - start))]
    res = finish(scn, s, trace, True, info)
    res.t_worst = t_star
    res.w_opt = scn.cov_inv @ (np.einsum("qmk,k->mq", scn.tap_operators, s) @ t_star)
    res.sinr_worst = value
    return res
