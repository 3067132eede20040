"""Signal model for a colocated MIMO radar observing an extended target.

The transmit code is an ``n_tx x code_len`` matrix ``S``; the library works
with ``s = vec(S)`` (column stacking, so consecutive entries belong to the
same time sample).  The target impulse response ``t`` has ``tir_len`` taps and
the received space-time snapshot has ``(tir_len + code_len - 1) * n_rx``
entries.  Two linear views of the target return are provided::

    y_t = G(t) @ s = H(s) @ t
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla

HERMITIAN_TOL = 1e-12


class ModelError(ValueError):
    """Raised for out-of-domain inputs to the signal model."""


@dataclass(frozen=True, eq=False)
class Scenario:
    """Array geometry, dimensions, noise statistics and target uncertainty."""

    n_tx: int
    n_rx: int
    code_len: int
    tir_len: int
    theta_t: float
    noise_cov: np.ndarray
    t0: np.ndarray
    radius: float
    tx_spacing: float = 1.0
    rx_spacing: float = 0.5

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "code_len", "tir_len"):
            if int(getattr(self, name)) < 1:
                raise ModelError(f"{name} must be a positive integer")
        if self.radius < 0:
            raise ModelError("radius must be nonnegative")
        t0 = np.asarray(self.t0, dtype=complex).ravel()
        if t0.size != self.tir_len:
            raise ModelError(f"t0 has {t0.size} taps, expected tir_len={self.tir_len}")
        cov = np.asarray(self.noise_cov, dtype=complex)
        dim = self.rx_dim
        if cov.shape != (dim, dim):
            raise ModelError(f"noise_cov must be {dim}x{dim}, got {cov.shape}")
        if np.max(np.abs(cov - cov.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(cov))):
            raise ModelError("noise_cov is not Hermitian")
        if np.linalg.eigvalsh(cov).min() <= 0:
            raise ModelError("noise_cov is not positive definite")
        t0.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "noise_cov", cov)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def code_dim(self) -> int:
        return self.n_tx * self.code_len

    @property
    def rx_dim(self) -> int:
        return (self.tir_len + self.code_len - 1) * self.n_rx

    def with_radius(self, radius: float) -> "Scenario":
        return Scenario(self.n_tx, self.n_rx, self.code_len, self.tir_len, self.theta_t,
                        self.noise_cov, self.t0, radius, self.tx_spacing, self.rx_spacing)

    @cached_property
    def steering(self) -> tuple[np.ndarray, np.ndarray]:
        return steering_vectors(self)

    @cached_property
    def cov_inv(self) -> np.ndarray:
        inv = np.linalg.inv(self.noise_cov)
        return 0.5 * (inv + inv.conj().T)

    @cached_property
    def tap_operators(self) -> np.ndarray:
        """Stack of ``A_i = J_{i-1} kron (b a^T)``, shape ``(Q, rx_dim, code_dim)``."""
        a, b = self.steering
        ba = np.outer(b, a)
        Q, L = self.tir_len, self.code_len
        return np.stack([np.kron(shift_matrix(i, Q, L), ba) for i in range(Q)])

    @cached_property
    def whitened_taps(self) -> np.ndarray:
        """``R_c^{-1} A_i`` for every tap."""
        return np.einsum("mn,qnk->qmk", self.cov_inv, self.tap_operators)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Space-time transmit code ``s = vec(S)``."""

    s: np.ndarray
    n_tx: int

    def __post_init__(self):
        s = np.asarray(self.s, dtype=complex).ravel().copy()
        if s.size % self.n_tx:
            raise ModelError("waveform length is not a multiple of n_tx")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def energy(self) -> float:
        return float(np.vdot(self.s, self.s).real)

    @property
    def code_len(self) -> int:
        return self.s.size // self.n_tx

    @property
    def matrix(self) -> np.ndarray:
        """The ``n_tx x code_len`` code matrix ``S``."""
        return self.s.reshape(self.code_len, self.n_tx).T

    @classmethod
    def from_matrix(cls, S: np.ndarray) -> "Waveform":
        S = np.asarray(S, dtype=complex)
        return cls(S.T.ravel(), S.shape[0])

    def scaled(self, factor: complex) -> "Waveform":
        return Waveform(self.s * factor, self.n_tx)


@dataclass(frozen=True)
class Band:
    f1: float
    f2: float
    weight: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.f1 < self.f2 <= 1.0):
            raise ModelError(f"band needs 0 <= f1 < f2 <= 1, got [{self.f1}, {self.f2}]")
        if self.weight < 0:
            raise ModelError("band weight must be nonnegative")


@dataclass(frozen=True, eq=False)
class EC:
    """Total-energy budget ``||s||^2 <= e_t``."""

    e_t: float
    kind = "ec"

    def __post_init__(self):
        if not self.e_t > 0:
            raise ModelError("e_t must be positive")


def _check_similarity(e_t, delta):
    if not e_t > 0:
        raise ModelError("e_t must be positive")
    if not 0 < delta <= 2:
        raise ModelError(f"similarity bound delta must lie in (0, 2], got {delta}")


@dataclass(frozen=True, eq=False)
class CMSC:
    """Constant modulus plus similarity to a reference code."""

    e_t: float
    delta: float
    s0: Waveform
    kind = "cmsc"

    def __post_init__(self):
        _check_similarity(self.e_t, self.delta)

    @property
    def modulus(self) -> float:
        return float(np.sqrt(self.e_t / self.s0.s.size))

    @property
    def sim_radius(self) -> float:
        return self.delta * self.modulus

    def contains(self, s: np.ndarray, tol: float = 1e-9) -> bool:
        s = np.asarray(s).ravel()
        return bool(np.all(np.abs(np.abs(s) - self.modulus) <= tol * max(1.0, self.modulus))
                    and np.max(np.abs(s - self.s0.s)) <= self.sim_radius * (1 + tol) + tol)


@dataclass(frozen=True, eq=False)
class SCSC:
    """Energy, similarity and stop-band energy constraints."""

    e_t: float
    delta: float
    s0: Waveform
    bands: tuple[Band, ...]
    e_i: float
    kind = "scsc"

    def __post_init__(self):
        _check_similarity(self.e_t, self.delta)
        if not self.e_i > 0:
            raise ModelError("e_I must be positive")
        if not self.bands:
            raise ModelError("at least one stop band is required")
        object.__setattr__(self, "bands", tuple(self.bands))

    @property
    def sim_radius(self) -> float:
        return self.delta * float(np.sqrt(self.e_t / self.s0.s.size))

    @cached_property
    def interference(self) -> np.ndarray:
        return spectral_matrix(self.bands, self.s0.code_len, self.s0.n_tx)

    def stopband_energy(self, s: np.ndarray) -> float:
        s = np.asarray(s).ravel()
        return float(np.vdot(s, self.interference @ s).real)

    def violation(self, s: np.ndarray) -> float:
        """Largest constraint excess (<= 0 when feasible)."""
        s = np.asarray(s).ravel()
        return max(float(np.vdot(s, s).real) - self.e_t,
                   float(np.max(np.abs(s - self.s0.s))) - self.sim_radius,
                   self.stopband_energy(s) - self.e_i)

    def with_e_i(self, e_i: float) -> "SCSC":
        return SCSC(self.e_t, self.delta, self.s0, self.bands, e_i)


ConstraintSet = Union[EC, CMSC, SCSC]


@dataclass
class IterRecord:
    iter: int
    objective: float
    gap: Optional[float] = None
    wall_ms: float = 0.0


@dataclass
class DesignResult:
    s_opt: Waveform
    w_opt: np.ndarray
    t_worst: np.ndarray
    sinr_worst: float
    trace: list[IterRecord] = field(default_factory=list)
    converged: bool = True
    info: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# geometry and operators

def steering_vectors(scn: Scenario) -> tuple[np.ndarray, np.ndarray]:
    st = np.sin(scn.theta_t)
    a = np.exp(2j * np.pi * scn.tx_spacing * np.arange(scn.n_tx) * st)
    b = np.exp(2j * np.pi * scn.rx_spacing * np.arange(scn.n_rx) * st)
    return a, b


def shift_matrix(i: int, tir_len: int, code_len: int) -> np.ndarray:
    """``(Q+L-1) x L`` matrix with ones where ``row - col == i``."""
    if not 0 <= i <= tir_len - 1:
        raise ModelError(f"shift index {i} outside [0, {tir_len - 1}]")
    return np.eye(tir_len + code_len - 1, code_len, k=-i)


def _as_vector(x, size, name) -> np.ndarray:
    x = np.asarray(x, dtype=complex).ravel()
    if x.size != size:
        raise ModelError(f"{name} has length {x.size}, expected {size}")
    return x


def tir_matrix(scn: Scenario, t) -> np.ndarray:
    """``T = sum_i t(i) J_{i-1}``."""
    t = _as_vector(t, scn.tir_len, "t")
    T = np.zeros((scn.tir_len + scn.code_len - 1, scn.code_len), dtype=complex)
    for i, ti in enumerate(t):
        T += ti * shift_matrix(i, scn.tir_len, scn.code_len)
    return T


def op_G(scn: Scenario, t) -> np.ndarray:
    a, b = scn.steering
    return np.kron(tir_matrix(scn, t), np.outer(b, a))


def op_H(scn: Scenario, s) -> np.ndarray:
    s = _as_vector(s, scn.code_dim, "s")
    return (scn.tap_operators @ s).T


def noise_covariance(rho: float, dim: int) -> np.ndarray:
    """Toeplitz covariance with entries ``rho**|m - n|``."""
    if not 0 <= rho < 1:
        raise ModelError(f"rho must lie in [0, 1), got {rho}")
    return sla.toeplitz(rho ** np.arange(dim)).astype(complex)


def target_gram(scn: Scenario, s) -> np.ndarray:
    """``H(s)^H R_c^{-1} H(s)``: SINR of the matched filter is ``t^H (.) t``."""
    Hs = op_H(scn, s)
    U = Hs.conj().T @ scn.cov_inv @ Hs
    return 0.5 * (U + U.conj().T)


def waveform_gram(scn: Scenario, t) -> np.ndarray:
    """``G(t)^H R_c^{-1} G(t)``."""
    G = op_G(scn, t)
    C = G.conj().T @ scn.cov_inv @ G
    return 0.5 * (C + C.conj().T)


def sinr(scn: Scenario, s, w, t) -> float:
    w = _as_vector(w, scn.rx_dim, "w")
    den = float(np.vdot(w, scn.noise_cov @ w).real)
    if den <= 0:
        raise ModelError("filter must be nonzero")
    y = op_H(scn, s) @ _as_vector(t, scn.tir_len, "t")
    return abs(np.vdot(w, y)) ** 2 / den


def optimal_filter(scn: Scenario, s, t) -> np.ndarray:
    """Matched filter ``R_c^{-1} H(s) t`` for a known response."""
    return scn.cov_inv @ (op_H(scn, s) @ _as_vector(t, scn.tir_len, "t"))


def reference_t0() -> np.ndarray:
    mags = [0.2, 0.3, 0.8, 0.3, 0.2, 0.1]
    phases = [np.pi / 4, np.pi / 3, 0.0, -np.pi / 6, -np.pi / 3, -np.pi / 3]
    return np.array(mags) * np.exp(1j * np.array(phases))


def default_scenario(radius: float = 0.5, rho: float = 0.8, t0: Sequence[complex] | None = None,
                     n_tx: int = 2, n_rx: int = 4, code_len: int = 16,
                     theta_deg: float = 30.0) -> Scenario:
    """The two-transmitter, four-receiver, 16-sample, six-tap reference setup."""
    t0 = reference_t0() if t0 is None else np.asarray(t0, dtype=complex)
    dim = (t0.size + code_len - 1) * n_rx
    return Scenario(n_tx=n_tx, n_rx=n_rx, code_len=code_len, tir_len=t0.size,
                    theta_t=np.deg2rad(theta_deg), noise_cov=noise_covariance(rho, dim),
                    t0=t0, radius=radius)


# --------------------------------------------------------------------------
# reference code and spectral shaping

def lfm_reference(n_tx: int, code_len: int, e_t: float) -> Waveform:
    """Orthogonal LFM code with every entry of modulus ``sqrt(e_t / (n_tx L))``."""
    n = np.arange(1, n_tx + 1)[:, None]
    l = np.arange(code_len)[None, :]
    S = np.sqrt(e_t / (n_tx * code_len)) * np.exp(1j * np.pi * (2 * n * l + l ** 2) / code_len)
    return Waveform.from_matrix(S)


def band_matrix(f1: float, f2: float, code_len: int) -> np.ndarray:
    """Energy of a length-``code_len`` sequence inside ``[f1, f2]`` as a Hermitian form."""
    d = np.arange(code_len)[:, None] - np.arange(code_len)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        off = (np.exp(2j * np.pi * f2 * d) - np.exp(2j * np.pi * f1 * d)) / (2j * np.pi * d)
    return np.where(d == 0, f2 - f1, off)


def spectral_matrix(bands: Sequence[Band], code_len: int, n_tx: int) -> np.ndarray:
    """Weighted stop-band energy matrix acting on ``s = vec(S)``.

    Each transmitter row of ``S`` sees the same band matrix; with time-major
    stacking that is ``R_band kron I_{n_tx}``.
    """
    R = sum(b.weight * band_matrix(b.f1, b.f2, code_len) for b in bands)
    R = np.kron(R, np.eye(n_tx))
    return 0.5 * (R + R.conj().T)
