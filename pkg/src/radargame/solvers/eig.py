"""Hermitian eigendecomposition by parallel-ordered cyclic Jacobi rotations."""
from __future__ import annotations

import numpy as np

from ..model import ModelError

_MAX_SWEEPS = 60


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: ``n - 1`` rounds of disjoint index pairs (``n`` even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def herm_eig(A: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and unitary eigenvectors of a Hermitian matrix.

    Rotations acting on disjoint index pairs commute, so each round of the
    tournament ordering is applied as one vectorised update.
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ModelError("herm_eig needs a square matrix")
    n = A.shape[0]
    scale = max(np.max(np.abs(A)) if A.size else 0.0, 1e-300)
    if np.max(np.abs(A - A.conj().T), initial=0.0) > tol * scale:
        raise ModelError("matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    if n == 1:
        return A.real.diagonal().copy(), np.ones((1, 1), dtype=complex)

    m = n + (n % 2)
    if m != n:
        # dummy row/column: a decoupled zero eigenvalue that is dropped afterwards
        A = np.pad(A, ((0, 1), (0, 1)))
    V = np.eye(m, dtype=complex)
    rounds = _round_robin(m)
    fro = np.linalg.norm(A)
    stop = 1e-15 * fro
    for _ in range(_MAX_SWEEPS):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= stop or fro == 0.0:
            break
        for p, q in rounds:
            apq = A[p, q]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not np.any(active):
                continue
            phase = np.where(active, apq / np.where(active, mag, 1.0), 1.0)
            app, aqq = A[p, p].real, A[q, q].real
            with np.errstate(divide="ignore", invalid="ignore"):
                tau = np.where(active, (aqq - app) / (2.0 * np.where(active, mag, 1.0)), 0.0)
            sgn = np.where(tau >= 0, 1.0, -1.0)
            t = np.where(active, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # 2x2 block [[jpp, jpq], [jqp, jqq]] of the unitary rotation
            jpp, jpq = c, s * np.ones_like(phase)
            jqp, jqq = -s * np.conj(phase), c * np.conj(phase)
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * jpp + Aq * jqp
            A[:, q] = Ap * jpq + Aq * jqq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = np.conj(jpp)[:, None] * Ap + np.conj(jqp)[:, None] * Aq
            A[q, :] = np.conj(jpq)[:, None] * Ap + np.conj(jqq)[:, None] * Aq
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * jpp + Vq * jqp
            V[:, q] = Vp * jpq + Vq * jqq
            A[p, q] = 0.0
            A[q, p] = 0.0

    # one Newton-Schulz step restores orthonormality lost to rounding
    V = V @ (1.5 * np.eye(m) - 0.5 * (V.conj().T @ V))
    w = A.diagonal().real.copy()
    if m != n:
        keep = np.abs(V[n, :]) < 0.5
        w, V = w[keep], V[:n, keep]
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def principal_eigvec(A: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the largest eigenvalue, phase-fixed so its largest entry is real positive."""
    _, V = herm_eig(A)
    v = V[:, 0]
    k = int(np.argmax(np.abs(v)))
    v = v * (np.abs(v[k]) / v[k])
    return v / np.linalg.norm(v)
