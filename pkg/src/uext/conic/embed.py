"""Complex-Hermitian to real-symmetric problem embedding.

A Hermitian A maps to the symmetric E(A) = [[Re A, -Im A], [Im A, Re A]];
X >= 0 iff E(X) >= 0, and tr[E(A) E(B)] = 2 Re tr[A B]. Embedded problems
therefore carry halved coefficient and objective matrices so that feasible
embedded points reproduce the original rows and objective values exactly.
The real program optimizes over general symmetric PSD blocks of doubled
order; averaging any feasible point with its J-conjugate (J the symplectic
swap) restores the embedded structure without changing objective or
residuals, which is what unembedding performs.
"""

from __future__ import annotations

from typing import Dict

import numpy as np

from ..linalg import hermitianize
from .problem import Block, ConicProblem
from .solver import ConicSolution


def embed_matrix(a: np.ndarray) -> np.ndarray:
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def unembed_matrix(w: np.ndarray) -> np.ndarray:
    n = w.shape[0] // 2
    re = 0.5 * (w[:n, :n] + w[n:, n:])
    im = 0.5 * (w[n:, :n] - w[:n, n:])
    return hermitianize(re + 1j * im)


def embed_problem(problem: ConicProblem) -> ConicProblem:
    """Real-symmetric equivalent with doubled block orders and halved
    coefficients."""
    blocks = tuple(Block(b.name, 2 * b.order) for b in problem.blocks)
    rows: Dict[str, np.ndarray] = {}
    for b in problem.blocks:
        stack = problem.rows[b.name]
        m = stack.shape[0]
        out = np.zeros((m, 2 * b.order, 2 * b.order))
        for j in range(m):
            out[j] = 0.5 * embed_matrix(stack[j])
        rows[b.name] = out
    objective = {name: 0.5 * embed_matrix(np.asarray(c))
                 for name, c in problem.objective.items()}
    meta = dict(problem.meta)
    meta["real_embedding"] = True
    return ConicProblem(blocks=blocks, objective=objective, rows=rows,
                        rhs=problem.rhs.copy(), sense=problem.sense, meta=meta)


def unembed_solution(sol: ConicSolution, original: ConicProblem) -> ConicSolution:
    """Fold an embedded solve back onto the complex blocks. Objectives,
    multipliers and residuals carry over unchanged."""
    if sol.status not in ("optimal", "max_iter"):
        return sol
    blocks = {name: unembed_matrix(mat) for name, mat in sol.blocks.items()}
    # halved embedded coefficients mean the embedded slack is half the
    # complex-form slack, while primal blocks fold back one-to-one
    slack = {name: 2.0 * unembed_matrix(mat) for name, mat in sol.slack.items()}
    meta = dict(sol.meta)
    meta["real_embedding"] = True
    return ConicSolution(
        status=sol.status, blocks=blocks, slack=slack, y=sol.y,
        primal_objective=sol.primal_objective, dual_objective=sol.dual_objective,
        gap=sol.gap, iterations=sol.iterations, residuals=sol.residuals,
        certificate=sol.certificate, meta=meta)


def solve_embedded(problem: ConicProblem, tol: float = 1e-8,
                   max_iters: int = 200) -> ConicSolution:
    from .solver import solve

    return unembed_solution(solve(embed_problem(problem), tol=tol,
                                  max_iters=max_iters), problem)
