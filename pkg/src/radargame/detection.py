"""Detection probability of a Swerling-0 target in complex Gaussian noise."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ive

from .model import ModelError

_TERM_CUTOFF = 1e-14


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q function ``Q_1(a, b)`` by its modified-Bessel series.

    The exponentially scaled Bessel values keep every term finite, so no
    asymptotic switch is needed for large arguments.  For ``a < b``::

        Q_1 = exp(-(a - b)^2 / 2) * sum_{k>=0} (a/b)^k ive(k, ab)

    and for ``a >= b`` the complementary series over ``(b/a)^k, k >= 1``.
    """
    if a < 0 or b < 0:
        raise ModelError("Marcum Q arguments must be nonnegative")
    if b == 0:
        return 1.0
    if a == 0:
        return math.exp(-0.5 * b * b)
    z = a * b
    scale = math.exp(-0.5 * (a - b) ** 2)
    if scale == 0.0:
        return 0.0 if a < b else 1.0
    lower = a < b
    ratio = a / b if lower else b / a
    start = 0 if lower else 1
    total = 0.0
    # terms decrease monotonically; sum in blocks until the tail is negligible
    block = 64 + int(8 * math.sqrt(z))
    k = start
    while True:
        ks = np.arange(k, k + block)
        with np.errstate(under="ignore"):
            terms = np.exp(ks * math.log(ratio)) * ive(ks, z) if ratio > 0 else np.zeros(block)
        total += float(terms.sum())
        if terms[-1] <= _TERM_CUTOFF * max(total, 1e-300) or terms[-1] == 0.0:
            break
        k += block
    q = scale * total
    return min(max(q if lower else 1.0 - q, 0.0), 1.0)


def detection_probability(sinr_lin: float, pfa: float) -> float:
    """``Q_1(sqrt(2 SINR), sqrt(-2 ln pfa))`` for a square-law detector."""
    if not 0.0 < pfa < 1.0:
        raise ModelError(f"pfa must lie in (0, 1), got {pfa}")
    if sinr_lin < 0:
        raise ModelError("SINR must be nonnegative")
    return marcum_q1(math.sqrt(2.0 * sinr_lin), math.sqrt(-2.0 * math.log(pfa)))
