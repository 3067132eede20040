"""Quadratic minimisation over the ball ``||t - t0|| <= r``.

``min_quad_ball`` handles the convex case by bisection on the multiplier of
the ball constraint.  ``trs_dual`` handles indefinite forms through the
single-constraint dual SDP and then recovers a primal minimiser from the
stationarity system ``(U + lam I) t = lam t0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import ConicProblem, solve_or_raise
from .eig import herm_eig

RADIUS_TOL = 1e-10
LAM_FLOOR = 1e-12


@dataclass
class TrsResult:
    t_star: np.ndarray
    value: float
    multiplier: float

    def slackness(self, t0, r: float) -> float:
        if not np.isfinite(self.multiplier):
            return 0.0
        d = np.linalg.norm(self.t_star - np.asarray(t0))
        return abs(self.multiplier * (d * d - r * r))


def _quad(U, t) -> float:
    return float(np.vdot(t, U @ t).real)


class _Spectral:
    """``U = V diag(d) V^H`` with ``c = V^H t0``; evaluates the multiplier path ``t(lam)``."""

    def __init__(self, U, t0):
        self.d, self.V = herm_eig(U)
        self.c = self.V.conj().T @ t0
        self.t0 = t0

    def offset(self, lam):
        # V^H (t(lam) - t0) = -d/(d+lam) * c
        return -(self.d / (self.d + lam)) * self.c

    def dist(self, lam) -> float:
        return float(np.linalg.norm(self.offset(lam)))

    def point(self, lam):
        return self.t0 + self.V @ self.offset(lam)


def min_quad_ball(U, t0, r: float) -> TrsResult:
    """Global minimiser of ``t^H U t`` (``U`` PSD) over the ball."""
    U = np.asarray(U, dtype=complex)
    t0 = np.asarray(t0, dtype=complex)
    if np.linalg.norm(t0) <= r:
        return TrsResult(np.zeros_like(t0), 0.0, 0.0)
    if r == 0:
        return TrsResult(t0.copy(), _quad(U, t0), float("inf"))
    sp = _Spectral(U, t0)
    # numerically negative eigenvalues of a PSD input would break monotonicity
    sp.d = np.maximum(sp.d, 0.0)
    lo = LAM_FLOOR
    if sp.dist(lo) <= r:
        t = sp.point(lo)
        return TrsResult(t, _quad(U, t), 0.0)
    hi = max(1.0, float(sp.d[0]))
    while sp.dist(hi) > r:
        hi *= 2.0
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if sp.dist(mid) > r:
            lo = mid
        else:
            hi = mid
        if abs(sp.dist(hi) - r) <= RADIUS_TOL or hi - lo <= 1e-15 * hi:
            break
    t = sp.point(hi)
    return TrsResult(t, _quad(U, t), hi)


def trs_primal(U, t0, r: float, lam_hint: float | None = None) -> TrsResult:
    """Solve the (possibly indefinite) trust-region problem from its stationarity system."""
    U = np.asarray(U, dtype=complex)
    t0 = np.asarray(t0, dtype=complex)
    if r == 0:
        return TrsResult(t0.copy(), _quad(U, t0), float("inf"))
    sp = _Spectral(U, t0)
    dmin = float(sp.d[-1])
    scale = max(1.0, float(np.max(np.abs(sp.d))))
    lam_lo = max(0.0, -dmin)
    # components in the bottom eigenspace decide between the easy and hard case
    bottom = sp.d <= dmin + 1e-12 * scale
    if lam_lo == 0.0:
        # convex: interior solution with lam = 0 if the null-space projection of t0 is in reach
        nz = sp.d > 1e-14 * scale
        tau = sp.c.copy()
        tau[nz] = 0.0
        if np.linalg.norm(sp.c[nz]) <= r:
            t = sp.V @ tau
            return TrsResult(t, _quad(U, t), 0.0)
    else:
        free = ~bottom
        d_free = sp.d[free] + lam_lo
        off = -(sp.d[free] / d_free) * sp.c[free]
        c_bottom = np.linalg.norm(sp.c[bottom])
        if c_bottom <= 1e-10 * max(1.0, np.linalg.norm(sp.c)) and np.linalg.norm(off) <= r:
            # hard case: pad along the bottom eigenvector until the boundary is hit
            tau_off = np.zeros_like(sp.c)
            tau_off[free] = off
            tau_off[np.flatnonzero(bottom)[0]] += np.sqrt(max(r * r - np.linalg.norm(off) ** 2, 0.0))
            t = t0 + sp.V @ tau_off
            return TrsResult(t, _quad(U, t), lam_lo)
    # easy case: unique root of ||t(lam) - t0|| = r to the right of lam_lo
    lo = lam_lo
    hi = max(lam_lo + 1.0, 2.0 * (lam_hint or 0.0), lam_lo + scale)
    while sp.dist(hi) > r:
        hi = lam_lo + 2.0 * (hi - lam_lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            dm = sp.dist(mid)
            if not np.isfinite(dm) or dm > r:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 4e-16 * max(hi, 1e-300):
                break
    t = sp.point(hi)
    return TrsResult(t, _quad(U, t), hi)


def trs_dual(U, t0, r: float) -> tuple[float, TrsResult]:
    """Dual SDP of the trust-region problem; returns ``(dual value, primal solution)``.

    ``max gamma  s.t.  [[U + lam I, lam t0], [lam t0^H, lam (|t0|^2 - r^2) - gamma]] >= 0,
    lam >= 0``.
    """
    U = np.asarray(U, dtype=complex)
    t0 = np.asarray(t0, dtype=complex)
    q = t0.size
    p = ConicProblem()
    p.real("lam")
    p.real("gamma")
    const = np.zeros((q + 1, q + 1), dtype=complex)
    const[:q, :q] = 0.5 * (U + U.conj().T)
    F_lam = np.zeros((1, q + 1, q + 1), dtype=complex)
    F_lam[0, :q, :q] = np.eye(q)
    F_lam[0, :q, q] = t0
    F_lam[0, q, :q] = t0.conj()
    F_lam[0, q, q] = np.vdot(t0, t0).real - r * r
    F_gam = np.zeros((1, q + 1, q + 1), dtype=complex)
    F_gam[0, q, q] = -1.0
    p.add_lmi(const, {"lam": F_lam, "gamma": F_gam})
    p.add_linear({"lam": [[-1.0]]}, [0.0])
    p.maximize({"gamma": 1.0})
    sol = solve_or_raise(p, "trust-region dual")
    res = trs_primal(U, t0, r, lam_hint=sol["lam"])
    return float(sol["gamma"]), res
