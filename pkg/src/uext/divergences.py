"""Quantum Renyi divergences and entropies, all in bits.

Support conventions follow the usual extended definitions: whenever a
divergence is undefined because the first argument leaks outside the support
of the second, the value is +inf (an ordinary float, never an exception).
alpha = 1 requests are routed to the corresponding limit (relative entropy for
the Petz and sandwiched families, Belavkin-Staszewski for the geometric one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import (SUPPORT_CUTOFF, hermitianize, kron, matrix_function,
                     root_fidelity, support_contained, support_projector)
from .states import BipartiteState

LN2 = math.log(2.0)


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence evaluation: value in bits, order, and family tag."""

    value: float
    alpha: float
    family: str

    def __float__(self) -> float:
        return self.value

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _spectrum(rho: np.ndarray) -> np.ndarray:
    return np.clip(np.linalg.eigvalsh(hermitianize(rho)), 0.0, None)


def _log2_power_sum(vals: np.ndarray, alpha: float) -> float:
    """log2 of sum(vals**alpha) over the support, stable for large alpha."""
    vals = vals[vals > SUPPORT_CUTOFF * max(1e-300, float(np.max(vals)))]
    if vals.size == 0:
        return -math.inf
    logs = alpha * np.log2(vals)
    top = float(np.max(logs))
    return top + math.log2(float(np.sum(np.exp2(logs - top))))


def _check_alpha(alpha: float, family: str) -> float:
    alpha = float(alpha)
    if not (alpha > 0.0 or alpha == math.inf):
        raise ValueError(f"{family} order must be positive, got {alpha}")
    return alpha


def relative_entropy(omega: np.ndarray, tau: np.ndarray) -> DivergenceValue:
    """Umegaki relative entropy tr[omega (log2 omega - log2 tau)]."""
    if not support_contained(omega, tau):
        return DivergenceValue(math.inf, 1.0, "relative")
    vals = _spectrum(omega)
    vals = vals[vals > SUPPORT_CUTOFF * max(1e-300, float(np.max(vals)))]
    s_omega = float(np.sum(vals * np.log2(vals)))
    log_tau = matrix_function(tau, np.log2, support_only=True)
    cross = float(np.real(np.trace(omega @ log_tau)))
    return DivergenceValue(s_omega - cross, 1.0, "relative")


def bs_relative_entropy(omega: np.ndarray, tau: np.ndarray) -> DivergenceValue:
    """Belavkin-Staszewski relative entropy tr[omega log2(w^1/2 tau^-1 w^1/2)]."""
    if not support_contained(omega, tau):
        return DivergenceValue(math.inf, 1.0, "bs")
    r = linalg.sqrtm_psd(omega)
    tau_inv = matrix_function(tau, lambda x: 1.0 / x, support_only=True)
    m = hermitianize(r @ tau_inv @ r)
    log_m = matrix_function(m, np.log2, support_only=True)
    return DivergenceValue(float(np.real(np.trace(omega @ log_m))), 1.0, "bs")


def max_relative_entropy(omega: np.ndarray, tau: np.ndarray) -> DivergenceValue:
    """D_max: log2 of the largest eigenvalue of tau^-1/2 omega tau^-1/2."""
    if not support_contained(omega, tau):
        return DivergenceValue(math.inf, math.inf, "max")
    isq = matrix_function(tau, lambda x: x ** -0.5, support_only=True)
    m = hermitianize(isq @ omega @ isq)
    top = float(np.max(np.linalg.eigvalsh(m)))
    if top <= 0.0:
        return DivergenceValue(-math.inf, math.inf, "max")
    return DivergenceValue(math.log2(top), math.inf, "max")


def min_relative_entropy(omega: np.ndarray, tau: np.ndarray) -> DivergenceValue:
    """D_min: -log2 tr[Pi_omega tau] with Pi the support projector of omega."""
    pi = support_projector(omega)
    overlap = float(np.real(np.trace(pi @ tau)))
    if overlap <= 1e-300:
        return DivergenceValue(math.inf, 0.0, "min")
    return DivergenceValue(-math.log2(min(overlap, 1.0)), 0.0, "min")


def petz_renyi(omega: np.ndarray, tau: np.ndarray, alpha: float) -> DivergenceValue:
    """Petz-Renyi divergence (1/(alpha-1)) log2 tr[omega^a tau^(1-a)].

    Data processing holds for alpha in [0, 2]; alpha = 1 routes to the
    relative entropy.
    """
    alpha = _check_alpha(alpha, "petz")
    if alpha == 1.0:
        return DivergenceValue(relative_entropy(omega, tau).value, 1.0, "petz")
    if alpha > 1.0 and not support_contained(omega, tau):
        return DivergenceValue(math.inf, alpha, "petz")
    pow_omega = matrix_function(omega, lambda x: x ** alpha, support_only=True)
    pow_tau = matrix_function(tau, lambda x: x ** (1.0 - alpha), support_only=True)
    q = float(np.real(np.trace(pow_omega @ pow_tau)))
    if q <= 1e-300:
        return DivergenceValue(math.inf if alpha < 1.0 else -math.inf, alpha, "petz")
    return DivergenceValue(math.log2(q) / (alpha - 1.0), alpha, "petz")


def sandwiched_renyi(omega: np.ndarray, tau: np.ndarray, alpha: float) -> DivergenceValue:
    """Sandwiched Renyi divergence; data processing for alpha in [1/2, inf].

    alpha = 1 routes to the relative entropy and alpha = inf to D_max; at
    alpha = 1/2 the value is -2 log2 of the root fidelity.
    """
    alpha = _check_alpha(alpha, "sandwiched")
    if alpha == 1.0:
        return DivergenceValue(relative_entropy(omega, tau).value, 1.0, "sandwiched")
    if alpha == math.inf:
        return DivergenceValue(max_relative_entropy(omega, tau).value, math.inf, "sandwiched")
    if alpha > 1.0 and not support_contained(omega, tau):
        return DivergenceValue(math.inf, alpha, "sandwiched")
    c = (1.0 - alpha) / (2.0 * alpha)
    t = matrix_function(tau, lambda x: x ** c, support_only=True)
    m = hermitianize(t @ omega @ t)
    log_q = _log2_power_sum(_spectrum(m), alpha)
    if log_q == -math.inf:
        return DivergenceValue(math.inf if alpha < 1.0 else -math.inf, alpha, "sandwiched")
    return DivergenceValue(log_q / (alpha - 1.0), alpha, "sandwiched")


def geometric_renyi(omega: np.ndarray, tau: np.ndarray, alpha: float) -> DivergenceValue:
    """Geometric (maximal) Renyi divergence; data processing for alpha in (0, 2].

    Requires supp(omega) inside supp(tau) (inverses taken on the support);
    violations give +inf. alpha = 1 routes to the Belavkin-Staszewski entropy.
    """
    alpha = _check_alpha(alpha, "geometric")
    if alpha == 1.0:
        return DivergenceValue(bs_relative_entropy(omega, tau).value, 1.0, "geometric")
    if not support_contained(omega, tau):
        return DivergenceValue(math.inf, alpha, "geometric")
    isq = matrix_function(tau, lambda x: x ** -0.5, support_only=True)
    m = hermitianize(isq @ omega @ isq)
    m_pow = matrix_function(m, lambda x: x ** alpha, support_only=True)
    q = float(np.real(np.trace(tau @ m_pow)))
    if q <= 1e-300:
        return DivergenceValue(math.inf if alpha < 1.0 else -math.inf, alpha, "geometric")
    return DivergenceValue(math.log2(q) / (alpha - 1.0), alpha, "geometric")


def renyi_entropy(rho: np.ndarray, alpha: float) -> float:
    """Renyi entropy of order alpha in bits; 0, 1 and inf handled exactly."""
    return renyi_entropy_spectrum(_spectrum(np.asarray(rho)), alpha)


def renyi_entropy_spectrum(spectrum: Sequence[float], alpha: float) -> float:
    p = np.clip(np.asarray(spectrum, dtype=float), 0.0, None)
    top = max(1e-300, float(np.max(p)))
    p = p[p > SUPPORT_CUTOFF * top]
    p = p / p.sum()
    alpha = float(alpha)
    if alpha < 0.0:
        raise ValueError(f"entropy order must be nonnegative, got {alpha}")
    if alpha == 0.0:
        return math.log2(p.size)
    if alpha == 1.0:
        return float(-np.sum(p * np.log2(p)))
    if alpha == math.inf:
        return -math.log2(float(np.max(p)))
    return _log2_power_sum(p, alpha) / (1.0 - alpha)


def _pure_vector(psi: BipartiteState) -> np.ndarray:
    vals, vecs = linalg.eigh(psi.rho)
    if vals[0] < 1.0 - 1e-8:
        raise ValueError(f"state is not pure (largest eigenvalue {vals[0]})")
    return vecs[:, 0]


def _schmidt_spectrum(psi: BipartiteState) -> np.ndarray:
    vec = _pure_vector(psi)
    mat = vec.reshape(psi.d_a, psi.d_b)
    s = np.linalg.svd(mat, compute_uv=False)
    return np.clip(s, 0.0, None) ** 2


def petz_mi_closed_form(psi: BipartiteState, alpha: float) -> float:
    """Petz mutual information of a pure state: 2 H_gamma of the marginal,
    gamma = (2 - alpha)/alpha."""
    alpha = _check_alpha(alpha, "petz")
    gamma = (2.0 - alpha) / alpha
    return 2.0 * renyi_entropy_spectrum(_schmidt_spectrum(psi), gamma)


def _theta_to_state(theta: np.ndarray, d: int) -> np.ndarray:
    """Cholesky-style parameterization: theta -> L L^dag / tr, full rank a.e."""
    low = np.zeros((d, d), dtype=np.complex128)
    rows, cols = np.tril_indices(d)
    n = rows.size
    low[rows, cols] = theta[:n]
    off = rows != cols
    low[rows[off], cols[off]] += 1j * theta[n:]
    m = low @ low.conj().T
    tr = float(np.real(np.trace(m)))
    if tr <= 1e-300:
        raise FloatingPointError("degenerate parameter point")
    return m / tr


def brute_mi(psi: BipartiteState, family: str, alpha: float, seed: int = 0,
             n_starts: int = 8, max_iters: int = 400) -> float:
    """Mutual-information-type divergence of a pure state by direct search.

    Minimizes div(psi || psi_A (x) sigma_B) over states sigma_B with sigma_B
    parameterized by Cholesky factors, using multi-start gradient descent with
    Armijo backtracking (gradients by central differences). Deliberately
    independent of the closed forms it is used to cross-check. Returns the
    best value found; convergence is best-effort.
    """
    funcs = {"petz": petz_renyi, "sandwiched": sandwiched_renyi,
             "geometric": geometric_renyi}
    if family not in funcs:
        raise ValueError(f"unknown divergence family {family!r}")
    div = funcs[family]
    alpha = _check_alpha(alpha, family)
    d_b = psi.d_b
    rho = psi.rho
    marg_a = psi.marginal_a()
    n_low = d_b * (d_b + 1) // 2
    n_par = n_low + d_b * (d_b - 1) // 2

    def objective(theta: np.ndarray) -> float:
        try:
            sigma = _theta_to_state(theta, d_b)
        except FloatingPointError:
            return math.inf
        return div(rho, kron(marg_a, sigma), alpha).value

    def gradient(theta: np.ndarray, f0: float) -> np.ndarray:
        g = np.zeros(n_par)
        h = 1e-6
        for i in range(n_par):
            tp = theta.copy()
            tp[i] += h
            fp = objective(tp)
            tp[i] -= 2 * h
            fm = objective(tp)
            if math.isfinite(fp) and math.isfinite(fm):
                g[i] = (fp - fm) / (2 * h)
            elif math.isfinite(fp):
                g[i] = (fp - f0) / h
            elif math.isfinite(fm):
                g[i] = (f0 - fm) / h
        return g

    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(n_starts):
        theta = np.zeros(n_par)
        rows, cols = np.tril_indices(d_b)
        theta[:n_low][rows == cols] = 1.0 / math.sqrt(d_b)
        theta += 0.3 * rng.standard_normal(n_par)
        f0 = objective(theta)
        if not math.isfinite(f0):
            continue
        for _ in range(max_iters):
            g = gradient(theta, f0)
            gnorm = float(np.max(np.abs(g)))
            if gnorm < 1e-8:
                break
            t = 1.0 / (1.0 + float(np.linalg.norm(g)))
            accepted = False
            while t > 1e-14:
                f1 = objective(theta - t * g)
                if f1 <= f0 - 1e-4 * t * float(g @ g):
                    theta = theta - t * g
                    accepted, f0 = True, f1
                    break
                t *= 0.5
            if not accepted:
                break
        best = min(best, f0)
    return best
