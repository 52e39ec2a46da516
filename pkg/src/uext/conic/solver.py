"""Dense primal-dual interior-point solver for the standard-form programs.

Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step. The Schur complement over the equality multipliers
is formed densely and factored by Cholesky; block orders up to ~160 and a few
hundred rows are the intended regime. Everything is plain numpy/LAPACK, so a
solve is deterministic for identical input.

Complex Hermitian data is handled natively (the scaled-space recipe only
needs eigh and triangular solves); real symmetric data follows the same code
path in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from ..linalg import hermitianize
from .problem import ConicProblem

_STALL_STEP = 1e-9


@dataclass
class ConicSolution:
    """Result of a solve, reported in the problem's own sense.

    blocks/slack are the tau-normalized primal point and dual slack; y the
    equality multipliers (full original row count, zeros on presolved-out
    rows). gap is the normalized primal-dual objective gap.
    """

    status: str
    blocks: Dict[str, np.ndarray]
    slack: Dict[str, np.ndarray]
    y: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float
    iterations: int
    residuals: Dict[str, float]
    certificate: Optional[dict] = None
    meta: dict = field(default_factory=dict)


def _gram(flat: np.ndarray) -> np.ndarray:
    """Re(F F^H) via a rank-k Hermitian update; falls back to plain matmul.

    The BLAS call gets the F-contiguous transpose view with trans set to
    conjugate it back, so no copy is made; the conjugation only flips the
    imaginary part, which is discarded anyway."""
    f = np.ascontiguousarray(flat)
    m = f.shape[0]
    try:
        from scipy.linalg import blas
        if np.iscomplexobj(f):
            half = blas.zherk(1.0, f.T, beta=0.0,
                              c=np.zeros((m, m), dtype=f.dtype),
                              trans=2, lower=0, overwrite_c=1).real
        else:
            half = blas.dsyrk(1.0, f.T, beta=0.0, c=np.zeros((m, m)),
                              trans=1, lower=0, overwrite_c=1)
        return half + half.T - np.diag(np.diag(half))
    except Exception:
        return (f @ f.conj().T).real


def _presolve(rows: List[np.ndarray], rhs: np.ndarray,
              threshold: float = 1e-10) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Detect linearly dependent equality rows by pivoted Cholesky of the row
    Gram matrix. Returns (kept, dropped, consistent); consistent=False means
    a dropped row contradicts the kept ones (the system is infeasible)."""
    m = rhs.shape[0]
    flat = np.hstack([np.concatenate(
        [r.reshape(m, -1).real, r.reshape(m, -1).imag], axis=1)
        for r in rows])
    gram = flat @ flat.T
    scale = max(1.0, float(np.max(np.diag(gram))))
    try:
        from scipy.linalg.lapack import dpstrf
        _, piv, rank, _ = dpstrf(gram, tol=threshold * scale, lower=1)
        piv = np.asarray(piv[:m], dtype=int) - 1
    except Exception:
        from scipy.linalg import qr
        _, r_fac, piv = qr(flat.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r_fac))
        rank = int(np.sum(diag > math.sqrt(threshold * scale)))
        piv = np.asarray(piv, dtype=int)
    kept = np.sort(piv[:rank])
    dropped = np.sort(piv[rank:])
    consistent = True
    if dropped.size:
        coef, *_ = np.linalg.lstsq(flat[kept].T, flat[dropped].T, rcond=None)
        predicted = coef.T @ rhs[kept]
        if np.max(np.abs(predicted - rhs[dropped])) > 1e-8 * (1.0 + np.max(np.abs(rhs))):
            consistent = False
    return kept, dropped, consistent


def _nt_scale(x: np.ndarray, s: np.ndarray):
    """NT scaling point: R with R^H S R = R^-1 X R^-H = diag(lam)."""
    n = x.shape[0]
    try:
        low = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(hermitianize(x))
        vals = np.clip(vals, 1e-14 * max(1.0, float(vals[-1])), None)
        low = vecs * np.sqrt(vals)[None, :]
    t = hermitianize(low.conj().T @ s @ low)
    w, v = np.linalg.eigh(t)
    w = np.clip(w, 1e-300, None)
    lam = np.sqrt(w)
    r = (low @ v) * (lam ** -0.5)[None, :]
    return r, lam


def _min_step(delta: np.ndarray, lam: np.ndarray) -> float:
    """Largest a with diag(lam) + a*delta PSD, for Hermitian delta in the
    scaled space."""
    scaled = delta / np.sqrt(np.outer(lam, lam))
    low = float(np.min(np.linalg.eigvalsh(hermitianize(scaled))))
    if low >= -1e-16:
        return math.inf
    return 1.0 / (-low)


def solve(problem: ConicProblem, tol: float = 1e-8, max_iters: int = 200,
          verbose: bool = False) -> ConicSolution:
    """Solve a ConicProblem to the requested normalized tolerance.

    Status is one of optimal / infeasible / unbounded / max_iter.
    Infeasibility and unboundedness are certified through the homogeneous
    embedding (b.y > 0 with vanishing dual residual, resp. <C,X> < 0 with
    vanishing A(X)), never by timeout.
    """
    problem.validate()
    names = [blk.name for blk in problem.blocks]
    orders = [blk.order for blk in problem.blocks]
    nblk = len(names)
    sign = 1.0 if problem.sense == "min" else -1.0

    dtype = np.complex128 if any(np.iscomplexobj(problem.rows[nm]) or
                                 np.iscomplexobj(problem.objective.get(nm, np.zeros(1)))
                                 for nm in names) else np.float64
    rows_full = [np.ascontiguousarray(problem.rows[nm], dtype=dtype) for nm in names]
    cmats = [sign * np.ascontiguousarray(
        problem.objective.get(nm, np.zeros((o, o))), dtype=dtype)
        for nm, o in zip(names, orders)]
    rhs_full = np.asarray(problem.rhs, dtype=float)
    if rhs_full.shape[0] == 0:
        raise ValueError("problem has no equality rows")

    kept, dropped, consistent = _presolve(rows_full, rhs_full)
    base_meta = dict(problem.meta)
    base_meta["dropped_rows"] = [int(j) for j in dropped]
    if not consistent:
        return ConicSolution(
            status="infeasible", blocks={}, slack={}, y=np.zeros(rhs_full.shape[0]),
            primal_objective=math.nan, dual_objective=math.nan, gap=math.nan,
            iterations=0, residuals={"presolve": math.inf},
            certificate={"type": "presolve_inconsistent_rows"}, meta=base_meta)
    rows = [r[kept] for r in rows_full]
    b = rhs_full[kept]
    m = b.shape[0]

    def a_op(xl):
        out = np.zeros(m)
        for k in range(nblk):
            out += np.einsum("mij,ji->m", rows[k], xl[k]).real
        return out

    def a_star(vec):
        return [hermitianize(np.tensordot(vec, rows[k], axes=(0, 0)))
                for k in range(nblk)]

    xs = [np.eye(o, dtype=dtype) for o in orders]
    ss = [np.eye(o, dtype=dtype) for o in orders]
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0
    nu = float(sum(orders))
    bnorm = float(np.linalg.norm(b))
    cnorm = math.sqrt(sum(float(np.real(np.vdot(c, c))) for c in cmats))
    eye_list = [np.eye(o, dtype=dtype) for o in orders]

    status = "max_iter"
    certificate = None
    iterations = 0
    residuals: Dict[str, float] = {}
    tiny_steps = 0

    for it in range(1, max_iters + 1):
        iterations = it
        ax = a_op(xs)
        asy = a_star(y)
        cx = sum(float(np.real(np.vdot(cmats[k], xs[k]))) for k in range(nblk))
        by = float(b @ y)
        r_p = ax - tau * b
        r_d = [tau * cmats[k] - asy[k] - ss[k] for k in range(nblk)]
        r_g = by - cx - kappa

        pobj = cx / tau
        dobj = by / tau
        pres = float(np.linalg.norm(ax / tau - b)) / (1.0 + bnorm)
        dres = math.sqrt(sum(
            float(np.real(np.vdot(cmats[k] - (asy[k] + ss[k]) / tau,
                                  cmats[k] - (asy[k] + ss[k]) / tau)))
            for k in range(nblk))) / (1.0 + cnorm)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        residuals = {"primal": pres, "dual": dres, "gap_rel": relgap,
                     "tau": tau, "kappa": kappa}
        if verbose:
            print(f"iter {it:3d} pobj {pobj:+.9e} dobj {dobj:+.9e} "
                  f"pres {pres:.2e} dres {dres:.2e} gap {relgap:.2e}")
        if pres <= tol and dres <= tol and relgap <= tol:
            status = "optimal"
            break

        if by > 0:
            pinf = math.sqrt(sum(float(np.real(np.vdot(asy[k] + ss[k],
                                                       asy[k] + ss[k])))
                                 for k in range(nblk))) / by
            if pinf <= tol:
                status = "infeasible"
                certificate = {"type": "primal_infeasible",
                               "y": y / by,
                               "slack": {names[k]: ss[k] / by for k in range(nblk)}}
                break
        if cx < 0:
            dinf = float(np.linalg.norm(ax)) / (-cx)
            if dinf <= tol:
                status = "unbounded"
                certificate = {"type": "dual_infeasible",
                               "blocks": {names[k]: xs[k] / (-cx) for k in range(nblk)}}
                break

        scales = [_nt_scale(xs[k], ss[k]) for k in range(nblk)]
        rmats = [s[0] for s in scales]
        lams = [s[1] for s in scales]
        mu = (sum(float(np.sum(lam ** 2)) for lam in lams) + tau * kappa) / (nu + 1.0)
        if not math.isfinite(mu) or mu < 1e-18:
            break

        at = [np.einsum("ab,mbc,cd->mad", rmats[k].conj().T, rows[k], rmats[k],
                        optimize=True) for k in range(nblk)]
        schur = np.zeros((m, m))
        for k in range(nblk):
            schur += _gram(at[k].reshape(m, -1))
        jitter = 0.0
        factor = None
        for _ in range(4):
            try:
                factor = cho_factor(schur + jitter * np.eye(m), lower=True)
                break
            except np.linalg.LinAlgError:
                jitter = max(1e-13 * float(np.max(np.diag(schur))), jitter * 100.0)
        if factor is None:
            break

        def schur_solve(rhs_vec):
            # two rounds of iterative refinement push the endgame residual
            # floor down when the scaled system is nearly singular
            u = cho_solve(factor, rhs_vec)
            for _ in range(2):
                u = u + cho_solve(factor, rhs_vec - schur @ u)
            return u

        ct = [hermitianize(rmats[k].conj().T @ cmats[k] @ rmats[k])
              for k in range(nblk)]
        rdt = [hermitianize(rmats[k].conj().T @ r_d[k] @ rmats[k])
               for k in range(nblk)]
        h = b + sum(np.einsum("mij,ji->m", at[k], ct[k]).real
                    for k in range(nblk))
        cwc = sum(float(np.real(np.vdot(ct[k], ct[k]))) for k in range(nblk))
        v_h = schur_solve(h)
        w2b = 2.0 * b - h
        denom_tail = float(w2b @ v_h) + cwc + kappa / tau

        def direction(eta, dmats, rtk):
            q1 = -eta * r_p
            q2 = -eta * r_g + rtk / tau
            for k in range(nblk):
                q1 -= np.einsum("mij,ji->m", at[k], dmats[k]).real
                q1 += eta * np.einsum("mij,ji->m", at[k], rdt[k]).real
                q2 += float(np.real(np.vdot(ct[k], dmats[k])))
                q2 -= eta * float(np.real(np.vdot(ct[k], rdt[k])))
            u = schur_solve(q1)
            dtau = (q2 - float(w2b @ u)) / denom_tail
            dy = u + v_h * dtau
            das = a_star(dy)
            ds = [-das[k] + cmats[k] * dtau + eta * r_d[k] for k in range(nblk)]
            dst = [hermitianize(rmats[k].conj().T @ ds[k] @ rmats[k])
                   for k in range(nblk)]
            dxt = [dmats[k] - dst[k] for k in range(nblk)]
            dkappa = (rtk - kappa * dtau) / tau
            return dy, dtau, dkappa, ds, dst, dxt

        def max_step(dst, dxt, dtau, dkappa):
            alpha = math.inf
            for k in range(nblk):
                alpha = min(alpha, _min_step(dxt[k], lams[k]))
                alpha = min(alpha, _min_step(dst[k], lams[k]))
            if dtau < 0:
                alpha = min(alpha, tau / (-dtau))
            if dkappa < 0:
                alpha = min(alpha, kappa / (-dkappa))
            return alpha

        # predictor: pure Newton toward feasibility + zero complementarity
        d_aff = [-np.diag(lams[k]).astype(dtype) for k in range(nblk)]
        dy_a, dtau_a, dkappa_a, ds_a, dst_a, dxt_a = direction(1.0, d_aff, -tau * kappa)
        alpha_aff = min(1.0, max_step(dst_a, dxt_a, dtau_a, dkappa_a))
        ip_aff = (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkappa_a)
        for k in range(nblk):
            xa = np.diag(lams[k]).astype(dtype) + alpha_aff * dxt_a[k]
            sa = np.diag(lams[k]).astype(dtype) + alpha_aff * dst_a[k]
            ip_aff += float(np.real(np.einsum("ij,ji->", xa, sa)))
        mu_aff = max(ip_aff, 0.0) / (nu + 1.0)
        sigma = min(max((mu_aff / mu) ** 3, 1e-10), 1.0 - 1e-10)

        # corrector: recentered step with the Mehrotra second-order term
        d_comb = []
        for k in range(nblk):
            lam = lams[k]
            corr = 0.5 * (dxt_a[k] @ dst_a[k] + dst_a[k] @ dxt_a[k])
            target = sigma * mu * eye_list[k] - np.diag(lam * lam).astype(dtype) - corr
            d_comb.append(hermitianize(2.0 * target / np.add.outer(lam, lam)))
        rtk = sigma * mu - tau * kappa - dtau_a * dkappa_a
        dy_c, dtau_c, dkappa_c, ds_c, dst_c, dxt_c = direction(1.0 - sigma, d_comb, rtk)
        alpha = min(1.0, 0.99 * max_step(dst_c, dxt_c, dtau_c, dkappa_c))
        if not math.isfinite(alpha) or alpha <= 0:
            break

        for k in range(nblk):
            xs[k] = hermitianize(xs[k] + alpha * (rmats[k] @ dxt_c[k] @ rmats[k].conj().T))
            ss[k] = hermitianize(ss[k] + alpha * ds_c[k])
        y = y + alpha * dy_c
        tau += alpha * dtau_c
        kappa += alpha * dkappa_c
        if alpha < _STALL_STEP:
            tiny_steps += 1
            if tiny_steps >= 3:
                break
        else:
            tiny_steps = 0

    y_full = np.zeros(rhs_full.shape[0])
    if status in ("optimal", "max_iter"):
        y_full[kept] = sign * y / tau
        blocks = {names[k]: hermitianize(xs[k] / tau) for k in range(nblk)}
        slack = {names[k]: hermitianize(ss[k] / tau) for k in range(nblk)}
        pobj_rep = sign * cx / tau
        dobj_rep = sign * by / tau
    else:
        blocks, slack = {}, {}
        pobj_rep = dobj_rep = math.nan
    gap = residuals.get("gap_rel", math.nan)
    return ConicSolution(
        status=status, blocks=blocks, slack=slack, y=y_full,
        primal_objective=pobj_rep, dual_objective=dobj_rep, gap=gap,
        iterations=iterations, residuals=residuals, certificate=certificate,
        meta=base_meta)
