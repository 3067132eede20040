"""Euclidean ball utilities for the target uncertainty set."""
from __future__ import annotations

import numpy as np


def project_ball(t, t0, r: float) -> np.ndarray:
    t = np.asarray(t, dtype=complex)
    t0 = np.asarray(t0, dtype=complex)
    d = t - t0
    nd = np.linalg.norm(d)
    if nd <= r:
        return t.copy()
    return t0 + (r / nd) * d


def sample_ball(t0, r: float, n: int, seed=None) -> list[np.ndarray]:
    """``n`` uniform draws from the complex ball ``||x - t0|| <= r``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    t0 = np.asarray(t0, dtype=complex)
    q = t0.size
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, q)) + 1j * rng.standard_normal((n, q))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radii = r * rng.uniform(size=n) ** (1.0 / (2 * q))
    return [t0 + rad * gi for rad, gi in zip(radii, g)]
