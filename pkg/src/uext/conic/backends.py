"""Adapter to external conic solvers, used as an independent oracle.

Kept apart from the native interior-point path so cross-checks compare two
genuinely different code routes. cvxpy is imported lazily; it is a test-only
dependency.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .problem import ConicProblem

_PREFERENCE = ("CLARABEL", "SCS", "CVXOPT")


def solve_external(problem: ConicProblem, solver: Optional[str] = None,
                   tol: float = 1e-9) -> dict:
    """Solve a ConicProblem with a generic external solver. Returns
    {"value", "blocks", "solver", "status"}. Intended for small audit
    instances; raises RuntimeError if every backend fails."""
    import cvxpy as cp

    variables = {}
    constraints = []
    for blk in problem.blocks:
        data = [problem.rows[blk.name]]
        if blk.name in problem.objective:
            data.append(problem.objective[blk.name])
        # hermitian variables only where the data is genuinely complex;
        # cvxpy's complex-to-real pass is noisy on real-valued blocks
        if any(np.iscomplexobj(d) and np.max(np.abs(np.imag(d))) > 0
               for d in data):
            var = cp.Variable((blk.order, blk.order), hermitian=True)
        elif blk.order == 1:
            var = cp.Variable((1, 1), nonneg=True)
        else:
            var = cp.Variable((blk.order, blk.order), symmetric=True)
        variables[blk.name] = var
        if not var.attributes.get("nonneg"):
            constraints.append(var >> 0)

    for j in range(problem.m):
        expr = 0
        for blk in problem.blocks:
            coeff = np.ascontiguousarray(problem.rows[blk.name][j])
            if np.max(np.abs(coeff)) == 0:
                continue
            expr = expr + cp.real(cp.trace(coeff @ variables[blk.name]))
        constraints.append(expr == problem.rhs[j])

    objective = 0
    for name, cmat in problem.objective.items():
        objective = objective + cp.real(cp.trace(np.asarray(cmat) @ variables[name]))
    prob = cp.Problem(cp.Minimize(objective) if problem.sense == "min"
                      else cp.Maximize(objective), constraints)

    order = (solver,) if solver else _PREFERENCE
    last_error = None
    for name in order:
        if name not in cp.installed_solvers():
            continue
        try:
            if name == "SCS":
                prob.solve(solver=name, eps=1e-10, max_iters=200000)
            else:
                prob.solve(solver=name)
            if prob.value is not None and prob.status in ("optimal",
                                                          "optimal_inaccurate"):
                return {
                    "value": float(prob.value),
                    "blocks": {nm: np.asarray(variables[nm].value)
                               for nm in variables},
                    "solver": name,
                    "status": prob.status,
                }
            if prob.status in ("infeasible", "unbounded"):
                return {"value": None, "blocks": {}, "solver": name,
                        "status": prob.status}
        except Exception as exc:  # pragma: no cover - backend-specific
            last_error = exc
    raise RuntimeError(f"no external solver succeeded: {last_error}")
