"""Program builders for the unextendible-entanglement SDPs.

All builders return ConicProblem instances in the equality standard form of
problem.py. Conventions shared by every builder:

  - sigma lives on A (x) B (x) B' with dims (d_A, d_B, d_B); position indices
    are (0, 1, 2) and B' is congruent to B.
  - "rho on AB'" is the same matrix as rho_AB, reinterpreted on A (x) B'.
  - operator equations are expanded against the orthonormal Hermitian basis
    of their equation space, so coefficient slices are Hermitian and the
    right-hand sides real.
  - the primal builders work in support-reduced coordinates: extensions are
    carried on supp(rho) (x) B' and the AB' operator equations on
    supp(rho_A) (x) B'. The reduction is exact (every feasible point lives
    on that face) and restores strict feasibility for pure and low-rank
    inputs, which the interior-point solver needs for fast convergence.
    meta["isometry"] maps the sigma block back to the full ABB' space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import linalg
from ..states import BipartiteState
from .problem import (Block, ConicProblem, ExtensionProgram,
                      expand_against_basis, hermitian_basis, support_isometry)


def _ab_prime_support(rho: BipartiteState) -> np.ndarray:
    """Isometry supp(rho_A) (x) B' -> AB'. Both tr_B[sigma] (for any
    extension sigma) and rho on AB' are supported there, so the AB'
    constraints can be carried on that subspace without loss."""
    rho_a = linalg.partial_trace(rho.rho, [rho.d_a, rho.d_b], (1,))
    return np.kron(support_isometry(rho_a), np.eye(rho.d_b))


def _reduced_tr_b_rows(ext: ExtensionProgram, w: np.ndarray,
                       basis_hat: np.ndarray) -> np.ndarray:
    """Coefficient slices of the reduced sigma block for the equation
    W^dag tr_B[sigma] W expanded against basis_hat: the j-th slice is
    V^dag embed(W basis_hat_j W^dag; AB') V."""
    dims = ext.extension_dims
    lifted = np.matmul(w, np.matmul(basis_hat, w.conj().T))
    big = linalg.embed_operator(lifted, dims, (0, 2))
    v = ext.isometry
    return np.matmul(v.conj().T, np.matmul(big, v))


def build_emax(rho: BipartiteState) -> ConicProblem:
    """max lambda s.t. lambda * rho_AB' <= tr_B[sigma], tr_B'[sigma] = rho,
    sigma >= 0. The optimum is 2^(-2 E_max)."""
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    n_red = ext.reduced_order
    w = _ab_prime_support(rho)
    q = w.shape[1]
    rho_hat_red = linalg.hermitianize(w.conj().T @ rho.rho @ w)
    basis_hat = hermitian_basis(q)
    m1 = ext.marginal_rows.shape[0]
    m = m1 + q * q

    rows_sigma = np.zeros((m, n_red, n_red), dtype=np.complex128)
    rows_slack = np.zeros((m, q, q), dtype=np.complex128)
    rows_lam = np.zeros((m, 1, 1), dtype=np.complex128)
    rhs = np.zeros(m)

    rows_sigma[:m1] = ext.marginal_rows
    rhs[:m1] = ext.marginal_rhs

    # tr_B[sigma] - lambda * rho_AB' - slack = 0 on supp(rho_A) (x) B'
    rows_sigma[m1:] = _reduced_tr_b_rows(ext, w, basis_hat)
    rows_lam[m1:, 0, 0] = -expand_against_basis(basis_hat, rho_hat_red)
    rows_slack[m1:] = -basis_hat

    return ConicProblem(
        blocks=(Block("sigma", n_red), Block("slack", q), Block("lam", 1)),
        objective={"lam": np.ones((1, 1), dtype=np.complex128)},
        rows={"sigma": rows_sigma, "slack": rows_slack, "lam": rows_lam},
        rhs=rhs,
        sense="max",
        meta={"kind": "emax", "extension_block": "sigma", "dims": dims,
              "isometry": ext.isometry, "reduced": n_red < ext.extension_order},
    )


def _reduced_tr_b_adjoint(ext: ExtensionProgram, w: np.ndarray,
                          slice_red: np.ndarray) -> np.ndarray:
    """Adjoint of the map N -> V^dag embed(W N W^dag; AB') V used by the
    dual LMIs: lifts a reduced-extension slice to ABB', traces out B and
    compresses onto supp(rho_A) (x) B'."""
    v = ext.isometry
    lifted = v @ slice_red @ v.conj().T
    back = linalg.partial_trace(lifted, list(ext.extension_dims), (1,))
    return linalg.hermitianize(w.conj().T @ back @ w)


def build_emax_dual(rho: BipartiteState) -> ConicProblem:
    """min tr[rho Y] s.t. tr[rho X] >= 1, X on AB' (x) I_B <= Y on AB (x)
    I_B', X >= 0. Equals the build_emax optimum by strong duality. The
    multipliers are carried in the primal's support coordinates (Y on
    supp(rho), X on supp(rho_A) (x) B'): the value is unchanged, but the
    compressed rho is full rank there, so the optimal set is bounded and
    the solve stays well conditioned for rank-deficient inputs. Intended
    for the small-instance duality audits."""
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    d_b = dims[1]
    r = ext.rank
    n_red = ext.reduced_order
    w = _ab_prime_support(rho)
    q = w.shape[1]
    rho_hat_red = linalg.hermitianize(w.conj().T @ rho.rho @ w)
    basis = hermitian_basis(n_red)
    mb = basis.shape[0]
    m = mb + 1

    rows_y = np.zeros((m, r, r), dtype=np.complex128)
    rows_x = np.zeros((m, q, q), dtype=np.complex128)
    rows_t = np.zeros((m, n_red, n_red), dtype=np.complex128)
    rows_u = np.zeros((m, 1, 1), dtype=np.complex128)
    rhs = np.zeros(m)

    # Y (x) I_B' - X (x) I_B - T = 0 on supp(rho) (x) B'
    for j in range(mb):
        rows_y[j] = linalg.partial_trace(basis[j], [r, d_b], (1,))
        rows_x[j] = -_reduced_tr_b_adjoint(ext, w, basis[j])
        rows_t[j] = -basis[j]

    # tr[rho X] - u = 1
    rows_x[mb] = rho_hat_red
    rows_u[mb, 0, 0] = -1.0
    rhs[mb] = 1.0

    return ConicProblem(
        blocks=(Block("Y", r), Block("X", q), Block("T", n_red),
                Block("u", 1)),
        objective={"Y": ext.rho_reduced.astype(np.complex128)},
        rows={"Y": rows_y, "X": rows_x, "T": rows_t, "u": rows_u},
        rhs=rhs,
        sense="min",
        meta={"kind": "emax_dual", "dims": dims, "isometry": ext.support,
              "ab_prime_isometry": w},
    )


def build_emin(rho: BipartiteState) -> ConicProblem:
    """max tr[Pi_rho on AB' sigma_AB'] over extensions of rho, with Pi the
    support projector of rho. The optimum is 2^(-2 E_min)."""
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    pi = linalg.support_projector(rho.rho)
    objective = ext.compress(linalg.embed_operator(pi, dims, (0, 2)))
    return ConicProblem(
        blocks=(Block("sigma", ext.reduced_order),),
        objective={"sigma": objective},
        rows={"sigma": ext.marginal_rows},
        rhs=ext.marginal_rhs,
        sense="max",
        meta={"kind": "emin", "extension_block": "sigma", "dims": dims,
              "isometry": ext.isometry,
              "reduced": ext.reduced_order < ext.extension_order},
    )


def build_emin_dual(rho: BipartiteState) -> ConicProblem:
    """min tr[rho X] s.t. X on AB (x) I_B' >= Pi_rho on AB' (x) I_B.
    Equals the build_emin optimum by strong duality. Carried on supp(rho)
    like the primal, which keeps the optimal set bounded for rank-deficient
    inputs; meta["isometry"] lifts X back to AB."""
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    d_b = dims[1]
    r = ext.rank
    n_red = ext.reduced_order
    pi_red = ext.compress(linalg.embed_operator(
        linalg.support_projector(rho.rho), dims, (0, 2)))
    basis = hermitian_basis(n_red)
    mb = basis.shape[0]

    rows_x = np.zeros((mb, r, r), dtype=np.complex128)
    rows_t = np.zeros((mb, n_red, n_red), dtype=np.complex128)
    for j in range(mb):
        rows_x[j] = linalg.partial_trace(basis[j], [r, d_b], (1,))
        rows_t[j] = -basis[j]
    rhs = expand_against_basis(basis, pi_red)

    return ConicProblem(
        blocks=(Block("X", r), Block("T", n_red)),
        objective={"X": ext.rho_reduced.astype(np.complex128)},
        rows={"X": rows_x, "T": rows_t},
        rhs=rhs,
        sense="min",
        meta={"kind": "emin_dual", "dims": dims, "isometry": ext.support},
    )


def build_fidelity(rho: BipartiteState) -> ConicProblem:
    """max (tr[X] + tr[X^dag])/2 s.t. [[rho, X], [X^dag, tr_B sigma]] >= 0
    over extensions sigma of rho. The optimum is the unextendible fidelity
    F^u (root-fidelity convention, in [0, 1]). The H block is carried on
    supp(rho) (+) supp(rho_A) (x) B'; PSD-ness forces the corner X onto
    that face, so nothing is lost."""
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    n_red = ext.reduced_order
    r = ext.rank
    p = ext.support
    w = _ab_prime_support(rho)
    q = w.shape[1]
    h_order = r + q
    basis_hat = hermitian_basis(q)
    m1 = ext.marginal_rows.shape[0]
    m = 2 * m1 + q * q

    rows_sigma = np.zeros((m, n_red, n_red), dtype=np.complex128)
    rows_h = np.zeros((m, h_order, h_order), dtype=np.complex128)
    rhs = np.zeros(m)

    rows_sigma[:m1] = ext.marginal_rows
    rhs[:m1] = ext.marginal_rhs

    # top-left corner of H pinned to rho on its support
    rows_h[m1:2 * m1, :r, :r] = ext.marginal_basis
    rhs[m1:2 * m1] = ext.marginal_rhs

    # bottom-right corner of H pinned to tr_B[sigma]
    rows_h[2 * m1:, r:, r:] = basis_hat
    rows_sigma[2 * m1:] = -_reduced_tr_b_rows(ext, w, basis_hat)

    c_h = np.zeros((h_order, h_order), dtype=np.complex128)
    c_h[:r, r:] = 0.5 * (p.conj().T @ w)
    c_h[r:, :r] = c_h[:r, r:].conj().T

    return ConicProblem(
        blocks=(Block("sigma", n_red), Block("H", h_order)),
        objective={"H": c_h},
        rows={"sigma": rows_sigma, "H": rows_h},
        rhs=rhs,
        sense="max",
        meta={"kind": "fidelity", "extension_block": "sigma", "dims": dims,
              "isometry": ext.isometry, "reduced": n_red < ext.extension_order},
    )


def build_fidelity_dual(rho: BipartiteState) -> ConicProblem:
    """Linearized dual of build_fidelity: min tr[rho Y1] + tr[rho Y2] s.t.
    Y1 on AB (x) I_B' >= Y3 on AB' (x) I_B and [[Y2, -I/2], [-I/2, Y3]] >= 0,
    the off-diagonal corners pinned. At the optimum the two objective terms
    equalize, recovering the geometric-mean form of the dual. Carried in
    the primal's support coordinates (Y1, Y2 on supp(rho), Y3 on
    supp(rho_A) (x) B'), so the corner pin is the compressed overlap of the
    two support isometries. Small-instance audits only."""
    ext = ExtensionProgram(rho)
    dims = ext.extension_dims
    d_b = dims[1]
    r = ext.rank
    n_red = ext.reduced_order
    p = ext.support
    w = _ab_prime_support(rho)
    q = w.shape[1]
    g_order = r + q
    basis = hermitian_basis(n_red)
    mb = basis.shape[0]

    corner = np.zeros((g_order, g_order), dtype=np.complex128)
    corner[:r, r:] = -0.5 * (p.conj().T @ w)
    corner[r:, :r] = corner[:r, r:].conj().T

    gbasis = hermitian_basis(g_order)
    off = [j for j in range(gbasis.shape[0])
           if np.any(np.abs(gbasis[j][:r, r:]) > 0)]
    mg = len(off)
    m = mg + mb

    rows_y1 = np.zeros((m, r, r), dtype=np.complex128)
    rows_g = np.zeros((m, g_order, g_order), dtype=np.complex128)
    rows_t = np.zeros((m, n_red, n_red), dtype=np.complex128)
    rhs = np.zeros(m)

    # pin the off-diagonal corners of G to the compressed -I/2
    for i, j in enumerate(off):
        rows_g[i] = gbasis[j]
        rhs[i] = float(np.real(np.trace(gbasis[j] @ corner)))

    # Y1 (x) I_B' - Y3 (x) I_B - T = 0, with Y3 the lower-right corner of G
    for j in range(mb):
        rows_y1[mg + j] = linalg.partial_trace(basis[j], [r, d_b], (1,))
        rows_g[mg + j, r:, r:] = -_reduced_tr_b_adjoint(ext, w, basis[j])
        rows_t[mg + j] = -basis[j]

    c_g = np.zeros((g_order, g_order), dtype=np.complex128)
    c_g[:r, :r] = ext.rho_reduced

    return ConicProblem(
        blocks=(Block("Y1", r), Block("G", g_order), Block("T", n_red)),
        objective={"Y1": ext.rho_reduced.astype(np.complex128), "G": c_g},
        rows={"Y1": rows_y1, "G": rows_g, "T": rows_t},
        rhs=rhs,
        sense="min",
        meta={"kind": "fidelity_dual", "dims": dims, "isometry": ext.support,
              "ab_prime_isometry": w},
    )


def build_two_extendible(rho: BipartiteState) -> ConicProblem:
    """max t s.t. sigma = Y + (t/n) I with Y >= 0, tr_B'[sigma] = rho and
    tr_B[sigma] = rho on AB'. The optimum is n times the best attainable
    smallest eigenvalue of a two-sided extension; rho is two-extendible
    exactly when it is >= 0. Always strictly feasible (in the full ABB'
    space: the identity shift provides the interior), so the solve is
    well-conditioned even at the feasibility boundary. t is split as
    t = tplus - tminus to stay in the PSD standard form."""
    dims = (rho.d_a, rho.d_b, rho.d_b)
    n = dims[0] * dims[1] * dims[2]
    nb = rho.d_a * rho.d_b
    basis = hermitian_basis(nb)
    m1 = basis.shape[0]
    m = 2 * m1

    rows_y = np.zeros((m, n, n), dtype=np.complex128)
    rows_tp = np.zeros((m, 1, 1), dtype=np.complex128)
    rhs = np.zeros(m)

    pin_rhs = expand_against_basis(basis, rho.rho)
    traces = np.real(np.einsum("jaa->j", basis)) * (rho.d_b / n)
    rows_y[:m1] = linalg.embed_operator(basis, dims, (0, 1))
    rows_tp[:m1, 0, 0] = traces
    rhs[:m1] = pin_rhs

    rows_y[m1:] = linalg.embed_operator(basis, dims, (0, 2))
    rows_tp[m1:, 0, 0] = traces
    rhs[m1:] = pin_rhs

    return ConicProblem(
        blocks=(Block("Y", n), Block("tplus", 1), Block("tminus", 1)),
        objective={"tplus": np.ones((1, 1), dtype=np.complex128),
                   "tminus": -np.ones((1, 1), dtype=np.complex128)},
        rows={"Y": rows_y, "tplus": rows_tp, "tminus": -rows_tp},
        rhs=rhs,
        sense="max",
        meta={"kind": "two_extendible", "dims": dims},
    )


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the two-extendibility test. feasible is None when the
    solver did not converge (indeterminate)."""

    feasible: Optional[bool]
    margin: float
    extension: Optional[np.ndarray]
    residuals: dict
    status: str


def two_extendible_feasibility(rho: BipartiteState, tol: float = 1e-8,
                               margin_tol: float = 1e-7) -> FeasibilityReport:
    """Decide whether rho admits an extension with equal AB and AB'
    marginals. Returns the extension certificate when feasible."""
    from .solver import solve

    problem = build_two_extendible(rho)
    sol = solve(problem, tol=tol)
    if sol.status != "optimal":
        return FeasibilityReport(feasible=None, margin=float("nan"),
                                 extension=None, residuals=sol.residuals,
                                 status=sol.status)
    t_star = sol.primal_objective
    n = problem.block("Y").order
    feasible = t_star >= -margin_tol
    extension = None
    if feasible:
        extension = linalg.hermitianize(
            sol.blocks["Y"] + (max(t_star, 0.0) / n) * np.eye(n))
        extension /= np.real(np.trace(extension))
    return FeasibilityReport(feasible=feasible, margin=t_star,
                             extension=extension, residuals=sol.residuals,
                             status=sol.status)
