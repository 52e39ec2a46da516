"""Semidefinite programs over extension sets and their solver."""

from .builders import (FeasibilityReport, build_emax, build_emax_dual,
                       build_emin, build_emin_dual, build_fidelity,
                       build_fidelity_dual, build_two_extendible,
                       two_extendible_feasibility)
from .dump import dump_problem
from .embed import (embed_matrix, embed_problem, solve_embedded,
                    unembed_matrix, unembed_solution)
from .problem import (Block, ConicProblem, ExtensionProgram,
                      expand_against_basis, hermitian_basis,
                      support_isometry)
from .solver import ConicSolution, solve

__all__ = [
    "Block", "ConicProblem", "ConicSolution", "ExtensionProgram",
    "FeasibilityReport", "build_emax", "build_emax_dual", "build_emin",
    "build_emin_dual", "build_fidelity", "build_fidelity_dual",
    "build_two_extendible", "dump_problem", "embed_matrix", "embed_problem",
    "expand_against_basis", "hermitian_basis", "solve", "solve_embedded",
    "support_isometry", "two_extendible_feasibility", "unembed_matrix", "unembed_solution",
]
