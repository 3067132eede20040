"""Small dense conic programs: linear objective, LMIs, second-order cones.

Problems are written over named variable blocks (real vectors, complex
vectors, Hermitian matrices).  Each block is stored as real parameters:

* ``real``      -- the entries themselves,
* ``complex``   -- ``[Re z, Im z]``,
* ``hermitian`` -- diagonal, then real and imaginary parts of the strict
  upper triangle (row-major).

Complex Hermitian LMIs are embedded as real symmetric matrices of twice the
size, ``[[Re X, -Im X], [Im X, Re X]]``, and the assembled cone program is
handed to the CVXOPT primal-dual interior-point method.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from cvxopt import matrix, solvers

DEFAULTS = {"feastol": 1e-8, "reltol": 1e-8, "abstol": 1e-10, "maxiters": 200, "refinement": 2}
ACCEPT_FEAS = 1e-8
ACCEPT_GAP = 1e-7


class SolverError(RuntimeError):
    """A conic solve did not reach an optimal point."""

    def __init__(self, message: str, solution: Optional["ConicSolution"] = None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class Var:
    name: str
    kind: str
    size: int
    offset: int

    @property
    def nparam(self) -> int:
        if self.kind == "real":
            return self.size
        if self.kind == "complex":
            return 2 * self.size
        return self.size * self.size

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.nparam)


def embed(X: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a Hermitian matrix."""
    X = np.asarray(X)
    return np.block([[X.real, -X.imag], [X.imag, X.real]])


def realify(A: np.ndarray) -> np.ndarray:
    """Real matrix acting on ``[Re z, Im z]`` that reproduces ``[Re Az, Im Az]``."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def complex_lmi_coeffs(K: np.ndarray) -> np.ndarray:
    """LMI coefficients for a complex vector ``z`` entering as ``sum z_i K_i + conj(z_i) K_i^H``."""
    K = np.asarray(K, dtype=complex)
    KH = np.conj(np.swapaxes(K, 1, 2))
    return np.concatenate([K + KH, 1j * (K - KH)])


def _upper(m):
    return np.triu_indices(m, 1)


def hermitian_basis(m: int) -> np.ndarray:
    """Basis matrices matching the Hermitian parameter layout, shape ``(m*m, m, m)``."""
    iu, ju = _upper(m)
    k = iu.size
    B = np.zeros((m + 2 * k, m, m), dtype=complex)
    B[np.arange(m), np.arange(m), np.arange(m)] = 1.0
    idx = m + np.arange(k)
    B[idx, iu, ju] = 1.0
    B[idx, ju, iu] = 1.0
    idx = m + k + np.arange(k)
    B[idx, iu, ju] = -1j
    B[idx, ju, iu] = 1j
    return B


def hermitian_params(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    iu, ju = _upper(X.shape[0])
    return np.concatenate([X.diagonal().real, X[iu, ju].real, -X[iu, ju].imag])


def hermitian_from_params(p: np.ndarray, m: int) -> np.ndarray:
    iu, ju = _upper(m)
    k = iu.size
    X = np.diag(p[:m]).astype(complex)
    upper = p[m:m + k] - 1j * p[m + k:m + 2 * k]
    X[iu, ju] = upper
    X[ju, iu] = np.conj(upper)
    return X


Coeffs = Mapping[str, np.ndarray]


@dataclass
class ConicSolution:
    status: str
    values: dict
    objective_value: float
    kkt_residual: float
    iterations: int = 0
    lmi_duals: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.values[name]


class ConicProblem:
    """Builder for ``min c^T x`` subject to LMI, SOC, linear and convex quadratic constraints."""

    def __init__(self):
        self.vars: dict[str, Var] = {}
        self.n = 0
        self.objective: dict[str, np.ndarray] = {}
        self.lmis: list[tuple[np.ndarray, dict]] = []
        self.socs: list[tuple[dict, np.ndarray, dict, float]] = []
        self.linear: list[tuple[dict, np.ndarray]] = []
        self.equalities: list[tuple[dict, np.ndarray]] = []

    # -- variables -------------------------------------------------------
    def _add(self, name, kind, size) -> Var:
        if name in self.vars:
            raise ValueError(f"variable {name!r} already declared")
        v = Var(name, kind, int(size), self.n)
        self.vars[name] = v
        self.n += v.nparam
        return v

    def real(self, name: str, size: int = 1) -> Var:
        return self._add(name, "real", size)

    def complex(self, name: str, size: int) -> Var:
        return self._add(name, "complex", size)

    def hermitian(self, name: str, size: int) -> Var:
        return self._add(name, "hermitian", size)

    # -- objective and constraints -------------------------------------
    def minimize(self, coeffs: Coeffs):
        """Linear objective; a complex block ``z`` with coefficient ``c`` contributes ``Re(c^H z)``."""
        self.objective = {k: self._linear_row(k, v) for k, v in coeffs.items()}

    def maximize(self, coeffs: Coeffs):
        self.minimize({k: -np.asarray(v) for k, v in coeffs.items()})
        self._sense = -1

    def _linear_row(self, name, c):
        v = self.vars[name]
        c = np.asarray(c)
        if v.kind == "complex":
            c = np.broadcast_to(c.astype(complex), (v.size,))
            return np.concatenate([c.real, c.imag])
        if v.kind == "hermitian" and c.ndim == 2:
            # coefficient matrix C gives Re tr(C X)
            return np.einsum("kij,ji->k", hermitian_basis(v.size), c).real
        return np.broadcast_to(np.asarray(c, dtype=float), (v.nparam,)).copy()

    def add_lmi(self, const: np.ndarray, coeffs: Coeffs):
        """``const + sum_k x_k F_k >= 0`` with ``coeffs[name]`` of shape ``(nparam, m, m)``."""
        const = np.asarray(const, dtype=complex)
        m = const.shape[0]
        terms = {}
        for name, F in coeffs.items():
            F = np.asarray(F, dtype=complex)
            v = self.vars[name]
            if F.shape != (v.nparam, m, m):
                raise ValueError(f"LMI coefficient for {name!r} has shape {F.shape}, "
                                 f"expected {(v.nparam, m, m)}")
            if np.max(np.abs(F - np.conj(np.swapaxes(F, 1, 2))), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(F))):
                raise ValueError(f"LMI coefficient for {name!r} is not Hermitian")
            terms[name] = F
        if np.max(np.abs(const - const.conj().T), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(const))):
            raise ValueError("LMI constant term is not Hermitian")
        self.lmis.append((const, terms))
        return len(self.lmis) - 1

    def add_soc(self, A: Coeffs, b, c: Coeffs, d: float):
        """``||A x + b||_2 <= c^T x + d`` over real parameters."""
        A = {k: np.atleast_2d(np.asarray(v, dtype=float)) for k, v in A.items()}
        c = {k: np.asarray(v, dtype=float) for k, v in c.items()}
        self.socs.append((A, np.asarray(b, dtype=float).ravel(), c, float(d)))

    def add_quadratic(self, F: Coeffs, f, q: Coeffs, r: float):
        """Convex quadratic ``||F x + f||^2 + q^T x + r <= 0`` (rewritten as a cone)."""
        f = np.asarray(f, dtype=float).ravel()
        A = {k: np.vstack([2 * np.atleast_2d(v), np.zeros((1, self.vars[k].nparam))])
             for k, v in F.items()}
        for k, v in q.items():
            row = np.asarray(v, dtype=float).reshape(1, -1)
            if k in A:
                A[k][-1] += row[0]
            else:
                A[k] = np.vstack([np.zeros((f.size, self.vars[k].nparam)), row])
        self.add_soc(A, np.concatenate([2 * f, [1.0 + r]]), {k: -np.asarray(v) for k, v in q.items()},
                     1.0 - r)

    def add_linear(self, A: Coeffs, b):
        """``A x <= b`` elementwise."""
        self.linear.append(({k: np.atleast_2d(np.asarray(v, dtype=float)) for k, v in A.items()},
                            np.atleast_1d(np.asarray(b, dtype=float))))

    def add_equality(self, A: Coeffs, b):
        self.equalities.append(({k: np.atleast_2d(np.asarray(v, dtype=float)) for k, v in A.items()},
                                np.atleast_1d(np.asarray(b, dtype=float))))

    # -- assembly ----------------------------------------------------------
    def _rows(self, coeffs: dict, nrows: int) -> np.ndarray:
        M = np.zeros((nrows, self.n))
        for name, blk in coeffs.items():
            v = self.vars[name]
            M[:, v.slice] += np.broadcast_to(blk, (nrows, v.nparam))
        return M

    def assemble(self):
        c = np.zeros(self.n)
        for name, row in self.objective.items():
            c[self.vars[name].slice] += row
        G_parts, h_parts = [], []
        n_lin = 0
        for A, b in self.linear:
            G_parts.append(self._rows(A, b.size))
            h_parts.append(b)
            n_lin += b.size
        q_dims = []
        for A, b, cc, d in self.socs:
            Ax = self._rows(A, b.size)
            cx = self._rows({k: v.reshape(1, -1) for k, v in cc.items()}, 1)
            G_parts.append(np.vstack([-cx, -Ax]))
            h_parts.append(np.concatenate([[d], b]))
            q_dims.append(b.size + 1)
        s_dims = []
        for const, terms in self.lmis:
            m2 = 2 * const.shape[0]
            Gs = np.zeros((m2 * m2, self.n))
            for name, F in terms.items():
                v = self.vars[name]
                emb = np.block([[F.real, -F.imag], [F.imag, F.real]])
                Gs[:, v.slice] = -emb.transpose(0, 2, 1).reshape(v.nparam, -1).T
            G_parts.append(Gs)
            h_parts.append(embed(const).ravel(order="F"))
            s_dims.append(m2)
        G = np.vstack(G_parts) if G_parts else np.zeros((0, self.n))
        h = np.concatenate(h_parts) if h_parts else np.zeros(0)
        if self.equalities:
            A = np.vstack([self._rows(Ai, bi.size) for Ai, bi in self.equalities])
            b = np.concatenate([bi for _, bi in self.equalities])
        else:
            A, b = None, None
        dims = {"l": n_lin, "q": q_dims, "s": s_dims}
        return c, G, h, dims, A, b

    def unpack(self, x: np.ndarray) -> dict:
        out = {}
        for name, v in self.vars.items():
            p = x[v.slice]
            if v.kind == "real":
                out[name] = float(p[0]) if v.size == 1 else p.copy()
            elif v.kind == "complex":
                out[name] = p[:v.size] + 1j * p[v.size:]
            else:
                out[name] = hermitian_from_params(p, v.size)
        return out


def solve_conic(p: ConicProblem, **options) -> ConicSolution:
    """Solve with the CVXOPT cone-LP interior-point method.

    ``status`` is ``optimal`` when primal/dual residuals are below ``1e-8`` and
    the relative gap below ``1e-7`` (also accepted when CVXOPT stops short of
    its own tighter defaults), ``infeasible`` on a primal or dual
    infeasibility certificate, and ``max_iter`` otherwise.
    """
    opts = dict(DEFAULTS, show_progress=False)
    opts.update(options)
    c, G, h, dims, A, b = p.assemble()
    args = dict(dims=dims, options=opts)
    if A is not None:
        args.update(A=matrix(A), b=matrix(b))
    sol = solvers.conelp(matrix(c), matrix(G), matrix(h), **args)

    raw = sol["status"]
    sense = getattr(p, "_sense", 1)
    if raw in ("primal infeasible", "dual infeasible"):
        return ConicSolution("infeasible", {}, float("nan"), float("inf"),
                             sol.get("iterations", 0), info={"certificate": raw})
    x = np.array(sol["x"]).ravel()
    pres = sol["primal infeasibility"] or 0.0
    dres = sol["dual infeasibility"] or 0.0
    relgap = sol["relative gap"]
    gap = abs(sol["gap"]) if sol["gap"] is not None else float("inf")
    gap_measure = min(relgap if relgap is not None else float("inf"), gap)
    kkt = max(pres, dres, gap_measure)
    ok = raw == "optimal" or (pres <= ACCEPT_FEAS and dres <= ACCEPT_FEAS and gap_measure <= ACCEPT_GAP)
    duals = []
    z = np.array(sol["z"]).ravel()
    off = dims["l"] + sum(dims["q"])
    for m2 in dims["s"]:
        Z = z[off:off + m2 * m2].reshape(m2, m2, order="F")
        k = m2 // 2
        duals.append(Z[:k, :k] + Z[k:, k:] + 1j * (Z[k:, :k] - Z[:k, k:]))
        off += m2 * m2
    return ConicSolution("optimal" if ok else "max_iter", p.unpack(x), sense * float(c @ x), kkt,
                         sol["iterations"], duals,
                         info={"raw_status": raw, "primal_infeasibility": pres,
                               "dual_infeasibility": dres, "relative_gap": relgap, "gap": gap})


def solve_or_raise(p: ConicProblem, what: str, **options) -> ConicSolution:
    sol = solve_conic(p, **options)
    if sol.status != "optimal":
        raise SolverError(f"{what}: conic solver returned {sol.status} "
                          f"({sol.info.get('raw_status', sol.info.get('certificate'))}, "
                          f"kkt residual {sol.kkt_residual:.2e})", sol)
    return sol
