"""Numerical equilibrium certificates and an independent max-min oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import DesignResult, Scenario, waveform_gram
from ..solvers.eig import principal_eigvec
from .common import worst_case_tir


@dataclass
class NashReport:
    target_gap: float
    """relative gap between the target's best response and the reported value"""
    radar_violation: float
    """largest ``worst_case(s') - sinr_worst`` over the sampled waveforms"""
    violations: int
    n_trials: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.target_gap <= 1e-4


def _random_waveforms(n: int, dim: int, e_t: float, rng) -> np.ndarray:
    g = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return np.sqrt(e_t) * g / np.linalg.norm(g, axis=1, keepdims=True)


def verify_nash_ec(scn: Scenario, e_t: float, result: DesignResult, n_trials: int = 500,
                   seed: int = 0, tol: float = 1e-6) -> NashReport:
    """Check both best-response conditions of an energy-constrained equilibrium.

    The target condition compares its exact best response to ``s*`` against
    the reported value.  The radar condition samples ``n_trials`` waveforms on
    the energy sphere and counts those whose worst case beats ``s*`` by more
    than ``tol``.
    """
    v = result.sinr_worst
    best = worst_case_tir(scn, result.s_opt.s).value
    target_gap = abs(best - v) / max(abs(v), 1e-300)
    rng = np.random.default_rng(seed)
    worst_excess = -np.inf
    count = 0
    for s in _random_waveforms(n_trials, scn.code_dim, e_t, rng):
        excess = worst_case_tir(scn, s).value - v
        worst_excess = max(worst_excess, excess)
        count += excess > tol
    return NashReport(target_gap, float(worst_excess), count, n_trials, tol)


def maxmin_oracle(scn: Scenario, e_t: float, iters: int = 400, starts: int = 4, seed: int = 0,
                  step0: float = 0.5) -> tuple[float, np.ndarray]:
    """Projected subgradient ascent on ``s -> min_t s^H C(t) s`` over ``||s||^2 = e_t``.

    The inner minimum is solved exactly; by Danskin's theorem ``2 C(t*) s`` is
    a supergradient.  Steps are normalised and shrink like ``1/sqrt(k)``.
    One start is the principal eigenvector at the nominal response, the rest
    are random.  Returns the best value seen and its waveform.
    """
    rng = np.random.default_rng(seed)
    inits = [np.sqrt(e_t) * principal_eigvec(waveform_gram(scn, scn.t0))]
    inits += list(_random_waveforms(starts - 1, scn.code_dim, e_t, rng))
    best_val, best_s = -np.inf, inits[0]
    for s in inits:
        for k in range(1, iters + 1):
            tr = worst_case_tir(scn, s)
            if tr.value > best_val:
                best_val, best_s = tr.value, s.copy()
            g = waveform_gram(scn, tr.t_star) @ s
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            s = s + (step0 / np.sqrt(k)) * np.sqrt(e_t) * g / gn
            s *= np.sqrt(e_t) / np.linalg.norm(s)
    return float(best_val), best_s
