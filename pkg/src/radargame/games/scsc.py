"""Spectrally compatible design with similarity, by minorise-maximise iterations.

Each step maximises a minoriser of the worst-case SINR.  The minoriser is an
indefinite quadratic in the target response, so its ball minimum is written
through the trust-region dual and the whole step becomes one SDP in
``(s, lam, gamma)``.  Waveforms are scaled by ``sqrt(e_t)`` inside the SDP.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import SCSC, DesignResult, IterRecord, ModelError, Scenario, Waveform, op_H
from ..solvers.conic import ConicProblem, SolverError, complex_lmi_coeffs, realify, solve_conic
from ..solvers.trs import trs_primal
from .common import finish, worst_case_tir


class InfeasibleError(ModelError):
    """The stop-band budget ``e_I`` admits no waveform; raise ``e_I``."""


@dataclass(frozen=True)
class Algo3Params:
    eps: float = 1e-3
    max_iter: int = 50
    init_waveform: Optional[Waveform] = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ModelError("eps must be positive")
        if self.max_iter < 1:
            raise ModelError("max_iter must be at least 1")


@dataclass
class MmState:
    s_l: Waveform
    z_tilde: float
    iter: int = 0


def minorizer_gram(scn: Scenario, s, s_l) -> np.ndarray:
    """``U(s, s_l) = H_l^H R^{-1} H + H^H R^{-1} H_l - H_l^H R^{-1} H_l`` (Hermitian, indefinite)."""
    Hl = op_H(scn, s_l)
    H = op_H(scn, s)
    X = Hl.conj().T @ scn.cov_inv @ H
    U = X + X.conj().T - Hl.conj().T @ scn.cov_inv @ Hl
    return 0.5 * (U + U.conj().T)


def minorizer_value(scn: Scenario, s, s_l) -> float:
    """Ball minimum of ``t^H U(s, s_l) t``; never above the worst-case SINR of ``s``."""
    s = s.s if isinstance(s, Waveform) else s
    s_l = s_l.s if isinstance(s_l, Waveform) else s_l
    return trs_primal(minorizer_gram(scn, s, s_l), scn.t0, scn.radius).value


def _sqrt_psd(R: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    return (V * np.sqrt(np.maximum(w, 0.0))) @ V.conj().T


def _box_and_energy(p: ConicProblem, x0: np.ndarray, rho: float):
    """``|x_i - x0_i| <= rho`` for every entry and ``||x|| <= 1`` on the complex block ``x``."""
    n = x0.size
    for i in range(n):
        sel = np.zeros((2, 2 * n))
        sel[0, i] = sel[1, n + i] = 1.0
        p.add_soc({"x": sel}, -np.array([x0[i].real, x0[i].imag]), {}, rho)
    p.add_soc({"x": np.eye(2 * n)}, np.zeros(2 * n), {}, 1.0)


def feasible_init(scn: Scenario, c: SCSC) -> tuple[Waveform, float]:
    """Least stop-band energy waveform in the energy and similarity sets, and that energy."""
    scale = np.sqrt(c.e_t)
    x0 = c.s0.s / scale
    n = x0.size
    root = realify(_sqrt_psd(c.interference))
    p = ConicProblem()
    p.complex("x", n)
    p.real("tau")
    _box_and_energy(p, x0, c.delta / np.sqrt(n))
    p.add_soc({"x": root}, np.zeros(2 * n), {"tau": [1.0]}, 0.0)
    p.minimize({"tau": 1.0})
    sol = solve_conic(p)
    if sol.status != "optimal":
        raise SolverError(f"stop-band energy minimisation returned {sol.status}", sol)
    s = scale * sol["x"]
    return Waveform(s, c.s0.n_tx), c.stopband_energy(s)


def lift_toward_reference(c: SCSC, s_floor: np.ndarray) -> np.ndarray:
    """Largest step from ``s_floor`` toward ``s0`` that keeps the stop-band energy within ``e_I``.

    Both end points satisfy the energy and similarity constraints, so every
    point of the segment does too; the stop-band energy along it is a convex
    quadratic in the step.
    """
    d = c.s0.s - s_floor
    R = c.interference
    a = float(np.vdot(d, R @ d).real)
    b = 2.0 * float(np.vdot(s_floor, R @ d).real)
    f0 = float(np.vdot(s_floor, R @ s_floor).real) - c.e_i
    if a + b + f0 <= 0:
        return c.s0.s.copy()
    if a <= 0:
        kappa = -f0 / b if b > 0 else 0.0
    else:
        disc = max(b * b - 4 * a * f0, 0.0)
        kappa = (-b + np.sqrt(disc)) / (2 * a)
    kappa = min(max(kappa, 0.0), 1.0) * (1 - 1e-12)
    return s_floor + kappa * d


def mm_step(scn: Scenario, c: SCSC, s_l) -> Waveform:
    """Maximise the minoriser at ``s_l`` over the constraint set (one SDP)."""
    s_l = s_l.s if isinstance(s_l, Waveform) else np.asarray(s_l, dtype=complex)
    scale = np.sqrt(c.e_t)
    x_l = s_l / scale
    x0 = c.s0.s / scale
    n, q = x_l.size, scn.tir_len
    Hw = scn.cov_inv @ op_H(scn, x_l)
    Hl = op_H(scn, x_l)
    C_l = Hl.conj().T @ Hw
    C_l = 0.5 * (C_l + C_l.conj().T)
    m = q + 1
    K = np.zeros((n, m, m), dtype=complex)
    # K_k[i, j] = (R^{-1} A_i x_l)^H A_j e_k, so that sum_k x_k K_k = H(x_l)^H R^{-1} H(x)
    K[:, :q, :q] = np.einsum("mi,jmk->kij", Hw.conj(), scn.tap_operators)
    const = np.zeros((m, m), dtype=complex)
    const[:q, :q] = -C_l
    t0 = scn.t0
    F_lam = np.zeros((1, m, m), dtype=complex)
    F_lam[0, :q, :q] = np.eye(q)
    F_lam[0, :q, q] = t0
    F_lam[0, q, :q] = t0.conj()
    F_lam[0, q, q] = float(np.vdot(t0, t0).real) - scn.radius ** 2
    F_gam = np.zeros((1, m, m), dtype=complex)
    F_gam[0, q, q] = -1.0

    p = ConicProblem()
    p.complex("x", n)
    p.real("lam")
    p.real("gamma")
    p.add_lmi(const, {"x": complex_lmi_coeffs(K), "lam": F_lam, "gamma": F_gam})
    p.add_linear({"lam": [[-1.0]]}, [0.0])
    _box_and_energy(p, x0, c.delta / np.sqrt(n))
    root = realify(_sqrt_psd(c.interference))
    p.add_soc({"x": root}, np.zeros(2 * n), {}, np.sqrt(c.e_i / c.e_t))
    p.maximize({"gamma": 1.0})
    sol = solve_conic(p)
    if sol.status == "infeasible":
        raise InfeasibleError(f"no waveform meets the stop-band budget e_I={c.e_i:g}; raise e_I")
    if sol.status != "optimal":
        raise SolverError(f"minorise-maximise step returned {sol.status} "
                          f"(kkt residual {sol.kkt_residual:.2e})", sol)
    return Waveform(scale * sol["x"], c.s0.n_tx)


def initial_waveform(scn: Scenario, c: SCSC) -> Waveform:
    """Least stop-band energy point, moved toward ``s0`` as far as ``e_I`` allows."""
    s_floor, floor = feasible_init(scn, c)
    if floor > c.e_i * (1 + 1e-9):
        raise InfeasibleError(f"the smallest attainable stop-band energy is {floor:.6g} > "
                              f"e_I={c.e_i:g}; raise e_I")
    return Waveform(lift_toward_reference(c, s_floor.s), c.s0.n_tx)


def design_scsc(scn: Scenario, c: SCSC, p: Algo3Params = Algo3Params()) -> DesignResult:
    """Robust waveform under energy, similarity and stop-band constraints."""
    s_l = p.init_waveform if p.init_waveform is not None else initial_waveform(scn, c)
    if c.violation(s_l.s) > 1e-7 * max(1.0, c.e_t):
        raise InfeasibleError("initial waveform violates the constraint set")
    z_touch = worst_case_tir(scn, s_l.s).value
    state = MmState(s_l, z_touch, 0)
    trace: list[IterRecord] = []
    start = time.perf_counter()
    converged = False
    kept = 0
    for it in range(1, p.max_iter + 1):
        cand = mm_step(scn, c, state.s_l)
        z_new = minorizer_value(scn, cand.s, state.s_l.s)
        if z_new < z_touch:
            # solver noise can cost ascent; the current point is still a valid maximiser candidate
            cand, z_new = state.s_l, z_touch
            kept += 1
        inc = z_new - state.z_tilde
        trace.append(IterRecord(it, z_new, inc, 1e3 * (time.perf_counter() - start)))
        state = MmState(cand, z_new, it)
        z_touch = worst_case_tir(scn, cand.s).value
        if abs(inc) <= p.eps:
            converged = True
            break
    info = {"e_i": c.e_i, "stopband_energy": c.stopband_energy(state.s_l.s),
            "iterations": len(trace), "steps_kept": kept}
    return finish(scn, state.s_l.s, trace, converged, info)
