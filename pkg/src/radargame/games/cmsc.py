"""Constant-modulus design with similarity: relaxed-game iteration, then randomisation."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..model import CMSC, DesignResult, IterRecord, ModelError, Scenario, Waveform, waveform_gram
from ..solvers.ball import project_ball
from ..solvers.trs import min_quad_ball
from ..solvers.conic import (ConicProblem, SolverError, complex_lmi_coeffs, hermitian_basis,
                             hermitian_params, solve_or_raise)
from .common import beam_covariance, finish, tx_tir_blocks, worst_case_tir

@dataclass(frozen=True)
class Algo2Params:
    beta: float = 0.05
    eta: float = 0.002
    eps: float = 1e-3
    max_iter: int = 200
    m_trials: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ModelError("beta must be nonnegative")
        for name in ("eta", "eps"):
            if not getattr(self, name) > 0:
                raise ModelError(f"{name} must be positive")
        if self.max_iter < 1 or self.m_trials < 1:
            raise ModelError("max_iter and m_trials must be at least 1")


@dataclass
class GameState2:
    R_s: np.ndarray
    t: np.ndarray
    iter: int = 0
    last_gap: float | None = None


def tir_gram(scn: Scenario, R_s: np.ndarray) -> np.ndarray:
    """``U(R_s)`` with entries ``tr(A_i^H R_c^{-1} A_j R_s)``, so ``t^H U t = tr(C(t) R_s)``."""
    A = scn.tap_operators
    U = np.einsum("imk,jmk->ij", A.conj(), scn.whitened_taps @ R_s)
    return 0.5 * (U + U.conj().T)


def relaxed_objective(scn: Scenario, R_s, t, R_s0, beta: float) -> float:
    """``t^H U(R_s) t - beta ||R_s - R_s0||_F^2``."""
    val = float(np.trace(waveform_gram(scn, t) @ R_s).real)
    return val - beta * float(np.linalg.norm(R_s - R_s0) ** 2)


def _project_fixed_diag(K: np.ndarray, d: float, tol: float = 1e-12,
                        max_iter: int = 100) -> tuple[np.ndarray, float]:
    """Nearest PSD matrix with every diagonal entry equal to ``d``.

    Semismooth Newton on the convex dual ``theta(y) = 1/2 ||(K + Diag y)_+||^2
    - d sum(y)``; its gradient is the diagonal residual and its generalised
    Hessian comes from the first divided differences of ``max(., 0)``.
    """
    n = K.shape[0]

    def evaluate(y):
        w, V = np.linalg.eigh(K + np.diag(y))
        P = (V * np.maximum(w, 0.0)) @ V.conj().T
        theta = 0.5 * float(np.sum(np.maximum(w, 0.0) ** 2)) - d * float(y.sum())
        return theta, P.diagonal().real - d, w, V, P

    y = d - K.diagonal().real
    theta, g, w, V, P = evaluate(y)
    # rounding in the eigendecomposition limits the attainable residual to about eps * ||K||
    stop = tol * max(d, 1.0, float(np.linalg.norm(K, 2)))
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= stop:
            break
        pos = np.maximum(w, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = (pos[:, None] - pos[None, :]) / (w[:, None] - w[None, :])
        same = np.abs(w[:, None] - w[None, :]) <= 1e-14 * max(1.0, np.max(np.abs(w)))
        omega = np.where(same, (w[:, None] > 0).astype(float), omega)
        # J[k, l] = x^H omega x with x_i = conj(V_ki) V_li
        X = V.conj()[:, None, :] * V[None, :, :]
        J = np.einsum("kli,kli->kl", X.conj(), X @ omega.T).real
        step = np.linalg.solve(J + 1e-12 * np.eye(n), -g)
        a = 1.0
        while True:
            cand = evaluate(y + a * step)
            # near the solution theta is swamped by rounding; residual decrease is the reliable test
            if (cand[0] <= theta + 1e-4 * a * float(g @ step)
                    or np.linalg.norm(cand[1]) <= (1 - 1e-4 * a) * np.linalg.norm(g)):
                break
            a *= 0.5
            if a < 1e-10:
                return 0.5 * (P + P.conj().T), float(np.max(np.abs(g)))
        y = y + a * step
        theta, g, w, V, P = cand
    return 0.5 * (P + P.conj().T), float(np.max(np.abs(g)))


def _max_trace_sdp(C: np.ndarray, d: float) -> np.ndarray:
    """``argmax tr(C R)`` over PSD ``R`` with diagonal ``d``, read off the dual of ``Diag(y) >= C``."""
    n = C.shape[0]
    p = ConicProblem()
    p.real("y", n)
    F = np.zeros((n, n, n), dtype=complex)
    F[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    p.add_lmi(-C, {"y": F})
    p.minimize({"y": d * np.ones(n)})
    sol = solve_or_raise(p, "relaxed waveform covariance")
    Z = sol.lmi_duals[0]
    return 0.5 * (Z + Z.conj().T)


def _prox_conic(C: np.ndarray, R_s0: np.ndarray, d: float, beta: float) -> np.ndarray:
    """Epigraph form: ``max tr(C R) - beta tau`` with ``||R - R_s0||_F^2 <= tau``."""
    n = C.shape[0]
    p = ConicProblem()
    p.hermitian("R", n)
    p.real("tau")
    basis = hermitian_basis(n)
    p.add_lmi(np.zeros((n, n)), {"R": basis})
    eq = np.zeros((n, n * n))
    eq[np.arange(n), np.arange(n)] = 1.0
    p.add_equality({"R": eq}, d * np.ones(n))
    # Frobenius norm in parameter coordinates: off-diagonal parameters count twice
    weights = np.concatenate([np.ones(n), np.full(n * n - n, np.sqrt(2.0))])
    p.add_quadratic({"R": np.diag(weights)}, -weights * hermitian_params(R_s0), {"tau": [-1.0]}, 0.0)
    p.maximize({"R": C, "tau": -beta})
    sol = solve_or_raise(p, "proximal covariance step")
    return sol["R"]


def algo2_inner_max(scn: Scenario, state: GameState2, R_s0: np.ndarray, beta: float, e_t: float,
                    method: str = "projection") -> np.ndarray:
    """Best covariance response to the current target response.

    ``max tr(C(t) R) - beta ||R - R_s0||_F^2`` over PSD ``R`` with diagonal
    ``e_t / (n_tx L)``.  For ``beta > 0`` this is the projection of
    ``R_s0 + C / (2 beta)`` onto that set, computed through its dual
    (``method="projection"``) or as a conic program (``method="conic"``).
    ``beta = 0`` is a plain SDP.
    """
    d = e_t / scn.code_dim
    C = waveform_gram(scn, state.t)
    if beta == 0:
        return _max_trace_sdp(C, d)
    if method == "conic":
        return _prox_conic(C, R_s0, d, beta)
    if method != "projection":
        raise ModelError(f"unknown method {method!r}")
    R, resid = _project_fixed_diag(R_s0 + C / (2.0 * beta), d)
    if resid > 1e-6 * max(d, 1.0):
        raise SolverError(f"covariance projection stalled with diagonal residual {resid:.2e}")
    return R


def algo2_t_step(scn: Scenario, state: GameState2, R_s_next: np.ndarray, eta: float) -> np.ndarray:
    """One projected gradient-descent step of the target: ``t - 2 eta U(R) t`` then back to the ball."""
    if not eta > 0:
        raise ModelError("eta must be positive")
    grad = 2.0 * tir_gram(scn, R_s_next) @ state.t
    return project_ball(state.t - eta * grad, scn.t0, scn.radius)


def randomize_cm(R_s_star: np.ndarray, s0: Waveform, delta: float, e_t: float, M: int,
                 seed=None) -> list[Waveform]:
    """Constant-modulus candidates drawn around ``s0`` from the relaxed covariance.

    ``xi ~ CN(0, R* o conj(s0) s0^T)`` and each entry of ``s0`` is rotated by
    ``(arg xi - pi) phi / (2 pi)`` with ``arg`` on ``[0, 2 pi)`` and
    ``phi = arccos(1 - delta^2 / 2)``.
    """
    if not 0 < delta <= 2:
        raise ModelError(f"delta must lie in (0, 2], got {delta}")
    ref = np.asarray(s0.s)
    n = ref.size
    mod = np.sqrt(e_t / n)
    unit = ref / np.where(np.abs(ref) > 0, np.abs(ref), 1.0)
    cov = R_s_star * np.outer(ref.conj(), ref)
    w, V = np.linalg.eigh(0.5 * (cov + cov.conj().T))
    root = V * np.sqrt(np.maximum(w, 0.0))
    phi = np.arccos(1.0 - delta ** 2 / 2.0)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(M):
        g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        xi = root @ g
        ang = np.mod(np.angle(xi), 2 * np.pi)
        out.append(Waveform(mod * unit * np.exp(1j * (ang - np.pi) * phi / (2 * np.pi)), s0.n_tx))
    return out


def relaxed_game_value(scn: Scenario, e_t: float) -> tuple[float, np.ndarray]:
    """Exact value of the relaxed game ``max_R min_t tr(C(t) R)`` (fixed diagonal, PSD).

    By the minimax theorem it equals ``min_t max_R``; the inner maximum is the
    dual ``min sum(d y)`` with ``Diag(y) >= C(t)``, and the Schur complement
    over the beam covariance makes the whole problem one SDP in ``(t, y)``.
    Every constant-modulus waveform of energy ``e_t`` is a rank-one point of
    the relaxed set, so this value bounds their worst-case SINR.
    """
    n = scn.code_dim
    d = e_t / n
    X = tx_tir_blocks(scn)
    k = X.shape[1]
    Y = np.linalg.inv(beam_covariance(scn))
    m = n + k
    p = ConicProblem()
    p.real("y", n)
    p.complex("t", scn.tir_len)
    const = np.zeros((m, m), dtype=complex)
    const[n:, n:] = 0.5 * (Y + Y.conj().T)
    F = np.zeros((n, m, m), dtype=complex)
    F[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    K = np.zeros((scn.tir_len, m, m), dtype=complex)
    K[:, n:, :n] = X
    p.add_lmi(const, {"y": F, "t": complex_lmi_coeffs(K)})
    if scn.radius == 0:
        p.add_equality({"t": np.eye(2 * scn.tir_len)}, np.concatenate([scn.t0.real, scn.t0.imag]))
    else:
        p.add_soc({"t": np.eye(2 * scn.tir_len)}, -np.concatenate([scn.t0.real, scn.t0.imag]), {},
                  scn.radius)
    p.minimize({"y": d * np.ones(n)})
    sol = solve_or_raise(p, "relaxed game value")
    return sol.objective_value, sol["t"]


def run_algo2(scn: Scenario, c: CMSC, p: Algo2Params) -> tuple[GameState2, list[IterRecord], bool]:
    """Alternate covariance best responses and target gradient steps until the gap is below ``eps``."""
    s0 = c.s0.s
    R0 = np.outer(s0, s0.conj())
    state = GameState2(R0.copy(), scn.t0.copy())
    z_prev = relaxed_objective(scn, state.R_s, state.t, R0, p.beta)
    trace: list[IterRecord] = []
    # fallback when the gap never settles: the covariance with the highest guaranteed payoff
    best = (-np.inf, state.R_s, state.t)
    start = time.perf_counter()
    converged = False
    for it in range(1, p.max_iter + 1):
        R_next = algo2_inner_max(scn, state, R0, p.beta, c.e_t)
        t_next = algo2_t_step(scn, state, R_next, p.eta)
        z = relaxed_objective(scn, R_next, t_next, R0, p.beta)
        gap = abs(z - z_prev)
        state = GameState2(R_next, t_next, it, gap)
        trace.append(IterRecord(it, z, gap, 1e3 * (time.perf_counter() - start)))
        if not converged:
            secured = min_quad_ball(tir_gram(scn, R_next), scn.t0, scn.radius).value
            if secured > best[0]:
                best = (secured, R_next, t_next)
        z_prev = z
        if gap <= p.eps:
            converged = True
            break
    if not converged:
        state = GameState2(best[1], best[2], state.iter, state.last_gap)
    return state, trace, converged


def design_cmsc(scn: Scenario, c: CMSC, p: Algo2Params = Algo2Params(),
                relaxed: tuple | None = None) -> DesignResult:
    """Robust constant-modulus waveform with similarity to ``c.s0``.

    The relaxed game ignores ``delta``, so a ``run_algo2`` result for the same
    scenario, energy and reference can be passed as ``relaxed`` and shared
    across similarity bounds.
    """
    mod = c.modulus
    if np.max(np.abs(np.abs(c.s0.s) - mod)) > 1e-9 * max(mod, 1.0):
        raise ModelError("reference code must be constant modulus with energy e_t")
    state, trace, converged = relaxed if relaxed is not None else run_algo2(scn, c, p)
    cands = randomize_cm(state.R_s, c.s0, c.delta, c.e_t, p.m_trials, p.seed)
    values = np.array([worst_case_tir(scn, w.s).value for w in cands])
    k = int(np.argmax(values))  # first maximiser on ties
    info = {"relaxed_objective": trace[-1].objective if trace else None,
            "candidate": k, "candidate_values": values, "iterations": len(trace),
            "R_s": state.R_s, "t_relaxed": state.t}
    return finish(scn, cands[k].s, trace, converged, info)
