from .ball import project_ball, sample_ball
from .conic import ConicProblem, ConicSolution, SolverError, solve_conic, solve_or_raise
from .eig import herm_eig, principal_eigvec
from .trs import TrsResult, min_quad_ball, trs_dual, trs_primal

__all__ = [
    "ConicProblem", "ConicSolution", "SolverError", "TrsResult", "herm_eig", "min_quad_ball",
    "principal_eigvec", "project_ball", "sample_ball", "solve_conic", "solve_or_raise",
    "trs_dual", "trs_primal",
]
