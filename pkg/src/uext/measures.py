"""Unextendible-entanglement measures.

Three routes compute a measure value:

  - single SDP solves for e_max_u, e_min_u and unext_fidelity (the builders
    of the conic package);
  - Frank-Wolfe over the extension spectrahedron for the divergence-induced
    measures e_rel_u and petz_alpha_u, with each linear-minimization step an
    SDP with linear objective over the extension set;
  - closed forms on Schmidt spectra for pure inputs (pure_state_measures).

All values are in bits except unext_fidelity, which is the raw root-fidelity
optimum in [0, 1] (its bit form -log2 F is in the diagnostics).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from . import divergences, linalg
from .conic import (ExtensionProgram, FeasibilityReport, build_emax,
                    build_emin, build_fidelity, solve, solve_embedded,
                    two_extendible_feasibility)
from .divergences import LN2
from .states import BipartiteState

__all__ = [
    "FWOptions", "MeasureResult", "e_max_u", "e_min_u", "e_rel_u",
    "is_two_extendible", "petz_alpha_u", "pure_state_measures",
    "unext_fidelity",
]


@dataclass(frozen=True)
class FWOptions:
    """Knobs for the Frank-Wolfe measures.

    tol is the target duality gap of the Frank-Wolfe iteration, in bits of
    the measure. floor regularizes the optimized marginal (tr_B sigma +
    floor*I) before logs and inverse powers; reported values should be
    insensitive to it across a decade. sigma0 warm-starts the iteration from
    a caller-supplied extension; its marginal pin is validated.
    """

    tol: float = 1e-5
    max_iters: int = 500
    floor: float = 1e-12
    solver_tol: float = 1e-8
    sigma0: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.floor < 0:
            raise ValueError("floor must be nonnegative")
        if not self.solver_tol > 0:
            raise ValueError("solver_tol must be positive")


@dataclass(frozen=True)
class MeasureResult:
    """Outcome of a measure evaluation.

    value: bits (unext_fidelity: raw number in [0, 1]).
    optimal_extension: the extension sigma on ABB' achieving the value, when
      the route provides one; its marginal residual is in the diagnostics.
    dual_certificate: equality multipliers and dual objective for the SDP
      routes; None for the first-order routes.
    diagnostics: iteration counts, residuals, final gap and route details.
    """

    value: float
    optimal_extension: Optional[np.ndarray] = None
    dual_certificate: Optional[dict] = None
    diagnostics: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


def _solve_primal(problem, tol: float):
    """Native solve with a real-embedding retry; raises when neither lands."""
    sol = solve(problem, tol=tol)
    route = "native"
    if sol.status != "optimal":
        emb = solve_embedded(problem, tol=tol)
        if emb.status == "optimal":
            sol, route = emb, "real_embedding"
    if sol.status != "optimal":
        raise RuntimeError(
            f"{problem.meta.get('kind', 'conic')} solve failed: {sol.status} "
            f"(residuals {sol.residuals})")
    return sol, route


def _extension_of(problem, sol) -> np.ndarray:
    sigma = sol.blocks[problem.meta["extension_block"]]
    v = problem.meta["isometry"]
    return linalg.hermitianize(v @ sigma @ v.conj().T)


def _sdp_diagnostics(rho: BipartiteState, sol, route: str,
                     extension: np.ndarray) -> dict:
    return {
        "iterations": sol.iterations,
        "residuals": sol.residuals,
        "gap": sol.gap,
        "route": route,
        "marginal_residual": ExtensionProgram(rho).feasibility_residual(extension),
    }


def e_max_u(rho: BipartiteState, tol: float = 1e-8) -> MeasureResult:
    """Max-unextendible entanglement: -1/2 log2 of the largest lambda with
    lambda * rho_AB' <= tr_B[sigma] over extensions sigma of rho."""
    problem = build_emax(rho)
    sol, route = _solve_primal(problem, tol)
    lam = float(sol.primal_objective)
    extension = _extension_of(problem, sol)
    diag = _sdp_diagnostics(rho, sol, route, extension)
    diag["lambda_star"] = lam
    value = -0.5 * math.log2(min(max(lam, 1e-300), 1.0))
    cert = {"y": sol.y, "dual_objective": sol.dual_objective}
    return MeasureResult(value=value, optimal_extension=extension,
                         dual_certificate=cert, diagnostics=diag)


def e_min_u(rho: BipartiteState, tol: float = 1e-8) -> MeasureResult:
    """Min-unextendible entanglement: -1/2 log2 of the maximal overlap
    tr[Pi_rho sigma_AB'] over extensions sigma of rho."""
    problem = build_emin(rho)
    sol, route = _solve_primal(problem, tol)
    overlap = float(sol.primal_objective)
    extension = _extension_of(problem, sol)
    diag = _sdp_diagnostics(rho, sol, route, extension)
    diag["overlap"] = overlap
    value = -0.5 * math.log2(min(max(overlap, 1e-300), 1.0))
    cert = {"y": sol.y, "dual_objective": sol.dual_objective}
    return MeasureResult(value=value, optimal_extension=extension,
                         dual_certificate=cert, diagnostics=diag)


def unext_fidelity(rho: BipartiteState, tol: float = 1e-8) -> MeasureResult:
    """Unextendible fidelity F^u in [0, 1] (root-fidelity convention): the
    largest root fidelity between rho and the B-marginal of an extension.
    diagnostics["e_half_bits"] carries the induced measure -log2 F^u."""
    problem = build_fidelity(rho)
    sol, route = _solve_primal(problem, tol)
    fid = float(min(max(sol.primal_objective, 0.0), 1.0))
    extension = _extension_of(problem, sol)
    diag = _sdp_diagnostics(rho, sol, route, extension)
    diag["e_half_bits"] = -math.log2(max(fid, 1e-300))
    cert = {"y": sol.y, "dual_objective": sol.dual_objective}
    return MeasureResult(value=fid, optimal_extension=extension,
                         dual_certificate=cert, diagnostics=diag)


def is_two_extendible(rho: BipartiteState, tol: float = 1e-8,
                      margin_tol: float = 1e-7) -> FeasibilityReport:
    """Whether rho admits an extension with equal AB and AB' marginals.
    The report carries the verdict, the eigenvalue margin and, when
    feasible, the normalized two-sided extension as certificate."""
    return two_extendible_feasibility(rho, tol=tol, margin_tol=margin_tol)


def pure_state_measures(psi: BipartiteState, family: str,
                        alpha: float = 1.0) -> float:
    """Closed forms on the Schmidt spectrum of a pure state.

    petz:       H_gamma(psi_A) with gamma = (2 - alpha)/alpha, alpha in (0, 2]
    sandwiched: H_beta(psi_A) with beta = 1/(2 alpha - 1), alpha in [1/2, inf]
    geometric:  H_0(psi_A) = log2 Schmidt rank, any alpha in (0, 2]
    rel:        H(psi_A) (alpha ignored)

    Values are Renyi entropies of the squared Schmidt coefficients, in bits.
    """
    if psi.purity() < 1.0 - 1e-9:
        raise ValueError("pure_state_measures expects a pure state")
    spectrum = np.clip(np.linalg.eigvalsh(
        linalg.hermitianize(psi.marginal_a())), 0.0, None)
    if family == "petz":
        if not 0.0 < alpha <= 2.0:
            raise ValueError("petz alpha must be in (0, 2]")
        gamma = (2.0 - alpha) / alpha
        return divergences.renyi_entropy_spectrum(spectrum, gamma)
    if family == "sandwiched":
        if alpha < 0.5:
            raise ValueError("sandwiched alpha must be in [1/2, inf]")
        beta = math.inf if alpha == 0.5 else 1.0 / (2.0 * alpha - 1.0)
        return divergences.renyi_entropy_spectrum(spectrum, beta)
    if family == "geometric":
        if not 0.0 < alpha <= 2.0:
            raise ValueError("geometric alpha must be in (0, 2]")
        return divergences.renyi_entropy_spectrum(spectrum, 0.0)
    if family == "rel":
        return divergences.renyi_entropy_spectrum(spectrum, 1.0)
    raise ValueError(f"unknown family {family!r}")


def _golden_section(fun: Callable[[float], float], tol: float = 1e-9,
                    max_iters: int = 200) -> Tuple[float, float]:
    """Minimize a convex scalar function on [0, 1] by golden-section."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, 1.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iters):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _frank_wolfe(rho: BipartiteState, objective, gradient, to_bits,
                 opts: FWOptions) -> dict:
    """Frank-Wolfe over the extension set of rho.

    objective(tau) -> native value to minimize, where tau is the floored
    B-marginal of the iterate; gradient(tau) -> its gradient on AB';
    to_bits(native_value, native_gap) -> (bits, gap_bits) converts both to
    bits of the measure at the current iterate.

    The iterate stays an exact extension: it starts from one (rho (x) rho_B
    or opts.sigma0) and moves along convex combinations with LMO vertices.
    """
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    n = ext.extension_order
    nb = rho.d_a * rho.d_b

    if opts.sigma0 is not None:
        sigma = linalg.hermitianize(np.asarray(opts.sigma0, dtype=np.complex128))
        if sigma.shape != (n, n):
            raise ValueError("sigma0 has wrong shape for the extension set")
        if ext.feasibility_residual(sigma) > 1e-8:
            raise ValueError("sigma0 is not an extension of rho")
    else:
        sigma = linalg.kron(rho.rho, rho.marginal_b())

    floor_eye = opts.floor * np.eye(nb)

    def marginal(s: np.ndarray) -> np.ndarray:
        return linalg.hermitianize(
            linalg.partial_trace(s, list(dims), (1,))) + floor_eye

    status = "max_iters"
    gap_bits = math.inf
    iters = 0
    val = objective(marginal(sigma))
    for k in range(opts.max_iters):
        iters = k + 1
        tau = marginal(sigma)
        grad = linalg.hermitianize(gradient(tau))
        lmo = ext.lmo_problem(linalg.embed_operator(grad, dims, (0, 2)))
        sol = solve(lmo, tol=opts.solver_tol)
        if sol.status != "optimal":
            emb = solve_embedded(lmo, tol=opts.solver_tol)
            if emb.status != "optimal":
                raise RuntimeError(
                    f"extension LMO failed: {sol.status}/{emb.status}")
            sol = emb
        vertex = ext.uncompress(sol.blocks["sigma"])
        tau_vertex = marginal(vertex)

        native_gap = float(np.real(np.trace(grad @ (tau - tau_vertex))))
        val = objective(tau)
        _, gap_bits = to_bits(val, max(native_gap, 0.0))
        if gap_bits <= opts.tol:
            status = "converged"
            break

        gamma, _ = _golden_section(
            lambda g: objective((1.0 - g) * tau + g * tau_vertex))
        sigma = linalg.hermitianize(sigma + gamma * (vertex - sigma))
        val = objective(marginal(sigma))

    bits, _ = to_bits(val, 0.0)
    return {
        "sigma": sigma,
        "bits": bits,
        "gap_bits": gap_bits,
        "iterations": iters,
        "status": status,
        "marginal_residual": ext.feasibility_residual(sigma),
    }


def _fw_result(rho: BipartiteState, run: dict, opts: FWOptions,
               extra: Optional[dict] = None) -> MeasureResult:
    diag = {
        "iterations": run["iterations"],
        "gap_bits": run["gap_bits"],
        "status": run["status"],
        "marginal_residual": run["marginal_residual"],
        "floor": opts.floor,
        "value_raw": run["bits"],
    }
    if extra:
        diag.update(extra)
    return MeasureResult(value=max(run["bits"], 0.0),
                         optimal_extension=run["sigma"],
                         dual_certificate=None, diagnostics=diag)


def e_rel_u(rho: BipartiteState, opts: Optional[FWOptions] = None) -> MeasureResult:
    """Relative-entropy unextendible entanglement: half the minimum of
    D(rho_AB || tr_B sigma) over extensions sigma, by Frank-Wolfe with exact
    line search; each linear-minimization step is an SDP over the extension
    set. Stops when the Frank-Wolfe gap is at most opts.tol bits; at the
    iteration cap the best value is returned with the gap reported."""
    opts = opts or FWOptions()
    mat = rho.rho

    def objective(tau: np.ndarray) -> float:
        return 0.5 * float(divergences.relative_entropy(mat, tau))

    def gradient(tau: np.ndarray) -> np.ndarray:
        return (-0.5 / LN2) * linalg.log_frechet_gradient(tau, mat)

    def to_bits(value: float, gap: float) -> Tuple[float, float]:
        return value, gap

    run = _frank_wolfe(rho, objective, gradient, to_bits, opts)
    return _fw_result(rho, run, opts)


def petz_alpha_u(rho: BipartiteState, alpha: float,
                 opts: Optional[FWOptions] = None) -> MeasureResult:
    """Petz-Renyi unextendible entanglement for alpha in (0, 1) u (1, 2]:
    half the extremum of D_alpha(rho_AB || tr_B sigma) over extensions.
    The trace functional Q_alpha = tr[rho^alpha tau^(1-alpha)] is convex in
    tau for alpha > 1 (minimized) and concave for alpha < 1 (maximized);
    both run through the same Frank-Wolfe engine with the sign folded in.
    alpha = 1 delegates to e_rel_u."""
    if alpha == 1.0:
        return e_rel_u(rho, opts)
    if not (0.0 < alpha <= 2.0):
        raise ValueError("alpha must be in (0, 1) u (1, 2]")
    opts = opts or FWOptions()
    sign = 1.0 if alpha > 1.0 else -1.0
    rho_pow = linalg.matrix_function(rho.rho, lambda x: x ** alpha,
                                     support_only=True)

    def f_pow(x: np.ndarray) -> np.ndarray:
        return x ** (1.0 - alpha)

    def fp_pow(x: np.ndarray) -> np.ndarray:
        return (1.0 - alpha) * x ** (-alpha)

    def objective(tau: np.ndarray) -> float:
        q = float(np.real(np.trace(rho_pow @ linalg.matrix_function(tau, f_pow))))
        return sign * q

    def gradient(tau: np.ndarray) -> np.ndarray:
        return sign * linalg.matrix_function_trace_gradient(tau, rho_pow,
                                                            f_pow, fp_pow)

    def to_bits(value: float, gap: float) -> Tuple[float, float]:
        q = max(sign * value, 1e-300)
        bits = math.log2(q) / (2.0 * (alpha - 1.0))
        # first-order gap transfer; for alpha > 1 the optimum may sit at a
        # smaller Q, so the bound is taken at the pessimistic end
        q_ref = max(q - gap, 1e-300) if alpha > 1.0 else q
        gap_bits = gap / (2.0 * abs(alpha - 1.0) * q_ref * LN2)
        return bits, gap_bits

    run = _frank_wolfe(rho, objective, gradient, to_bits, opts)
    return _fw_result(rho, run, opts, extra={"alpha": alpha})
