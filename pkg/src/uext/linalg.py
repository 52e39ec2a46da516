"""Dense Hermitian linear algebra helpers.

Everything here works on plain numpy arrays (complex128 for generic operators,
float64 accepted anywhere). Tensor factors use the row-major, slow-index-first
convention throughout: the composite index of (i1, ..., ik) over dims
(d1, ..., dk) is i1*d2*...*dk + ... + ik, which is exactly what np.kron and
C-order reshapes produce. Hermitian eigendecomposition is the single spectral
primitive used for matrix functions.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

# Relative eigenvalue cutoff that defines the numerical support of a PSD matrix.
SUPPORT_CUTOFF = 1e-9
# lambda_min >= -PSD_TOL * max(1, lambda_max) counts as positive semidefinite.
PSD_TOL = 1e-9


class ComplexMatrix:
    """Alias marker: a 2-D complex128 ndarray. Kept as a name, not a wrapper."""


class HermitianOperator:
    """Alias marker: a square ndarray equal to its conjugate transpose."""


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in descending order with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def hermitianize(m: np.ndarray) -> np.ndarray:
    """Average m with its conjugate transpose."""
    return 0.5 * (m + m.conj().T)


def assert_hermitian(m: np.ndarray, tol: float = 1e-9, name: str = "matrix") -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T))
    scale = max(1.0, float(np.max(np.abs(m))))
    if dev > tol * scale:
        raise ValueError(f"{name} is not Hermitian (deviation {dev:.3e})")


def eigh(h: np.ndarray) -> SpectralDecomposition:
    """Hermitian eigendecomposition with eigenvalues sorted descending."""
    vals, vecs = np.linalg.eigh(h)
    return SpectralDecomposition(vals[::-1].copy(), vecs[:, ::-1].copy())


def is_psd(m: np.ndarray, tol: float = PSD_TOL) -> bool:
    vals = np.linalg.eigvalsh(hermitianize(m))
    return bool(vals[0] >= -tol * max(1.0, float(vals[-1])))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the first factor on the slow index."""
    return np.kron(a, b)


def partial_trace(m: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    """Trace out the subsystems listed in `traced` (0-based positions in dims).

    m acts on the full tensor product of `dims`; the result acts on the kept
    subsystems in their original order.
    """
    dims = list(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"operator shape {m.shape} does not match dims {dims}")
    traced = sorted(set(int(t) for t in traced))
    if any(t < 0 or t >= len(dims) for t in traced):
        raise ValueError(f"traced positions {traced} out of range for {len(dims)} systems")
    out = m
    for t in reversed(traced):
        pre = int(np.prod(dims[:t]))
        d = dims[t]
        post = int(np.prod(dims[t + 1:]))
        out = out.reshape(pre, d, post, pre, d, post)
        out = np.trace(out, axis1=1, axis2=4).reshape(pre * post, pre * post)
        dims = dims[:t] + dims[t + 1:]
    return out


def permute_systems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so new position i holds old subsystem perm[i]."""
    dims = list(dims)
    k = len(dims)
    perm = list(perm)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"perm {perm} is not a permutation of {k} systems")
    total = int(np.prod(dims))
    t = m.reshape(dims + dims)
    t = t.transpose(perm + [k + p for p in perm])
    return t.reshape(total, total)


def embed_operator(op: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Extend an operator on the `targets` subsystems by identity on the rest.

    `op` acts on the tensor product of dims[targets] in the order given by
    `targets`; accepts a stacked (..., n, n) array and embeds each slice.
    """
    dims = list(dims)
    targets = list(targets)
    rest = [i for i in range(len(dims)) if i not in targets]
    d_t = int(np.prod([dims[i] for i in targets])) if targets else 1
    d_r = int(np.prod([dims[i] for i in rest])) if rest else 1
    if op.shape[-2:] != (d_t, d_t):
        raise ValueError(f"operator shape {op.shape} does not match target dims")
    batch = op.shape[:-2]
    full = np.einsum("...ab,cd->...acbd", op.reshape(batch + (d_t, d_t)), np.eye(d_r, dtype=op.dtype))
    full = full.reshape(batch + (d_t * d_r, d_t * d_r))
    # Current factor order is targets + rest; build the inverse permutation.
    order = targets + rest
    inv = [order.index(i) for i in range(len(dims))]
    if inv == list(range(len(dims))):
        return full
    cur_dims = [dims[i] for i in order]
    if batch:
        flat = full.reshape((-1,) + full.shape[-2:])
        out = np.stack([permute_systems(s, cur_dims, inv) for s in flat])
        return out.reshape(batch + full.shape[-2:])
    return permute_systems(full, cur_dims, inv)


def matrix_function(h: np.ndarray, f: Callable[[np.ndarray], np.ndarray],
                    support_only: bool = False) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    With support_only=True, eigenvalues below SUPPORT_CUTOFF (relative to the
    largest) are treated as exact zeros and f contributes nothing on the
    kernel; that is how inverse powers and logs are restricted to the support.
    """
    vals, vecs = np.linalg.eigh(h)
    if support_only:
        cut = SUPPORT_CUTOFF * max(1e-300, float(np.max(np.abs(vals))))
        keep = vals > cut
        fv = np.zeros_like(vals)
        if np.any(keep):
            fv[keep] = f(vals[keep])
    else:
        with np.errstate(all="ignore"):
            fv = f(vals)
        if not np.all(np.isfinite(fv)):
            raise ValueError(
                "matrix function is singular on the spectrum; pass "
                "support_only=True to restrict it to the support")
    return (vecs * fv) @ vecs.conj().T


def sqrtm_psd(h: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix, negative rounding clipped to zero."""
    return matrix_function(h, lambda x: np.sqrt(np.clip(x, 0.0, None)))


def support_projector(h: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Projector onto the span of eigenvectors above the relative cutoff."""
    vals, vecs = np.linalg.eigh(h)
    cut = cutoff * max(1e-300, float(np.max(np.abs(vals))))
    keep = vecs[:, vals > cut]
    return keep @ keep.conj().T


def support_contained(a: np.ndarray, b: np.ndarray, tol: float = 1e-7) -> bool:
    """Whether supp(a) is inside supp(b), both PSD, up to mass `tol`."""
    pb = support_projector(b)
    leak = np.eye(b.shape[0]) - pb
    return float(np.real(np.trace(leak @ a @ leak))) <= tol * max(1.0, float(np.real(np.trace(a))))


def root_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Trace norm of sqrt(rho) sqrt(sigma), via tr sqrt(sqrt(sigma) rho sqrt(sigma))."""
    if not is_psd(rho) or not is_psd(sigma):
        raise ValueError("root_fidelity needs PSD arguments")
    rs = sqrtm_psd(sigma)
    m = rs @ rho @ rs
    vals = np.linalg.eigvalsh(hermitianize(m))
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))))


def _divided_differences(vals: np.ndarray, f: Callable[[np.ndarray], np.ndarray],
                         fprime: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Matrix of (f(x_i)-f(x_j))/(x_i-x_j) with f'(x_i) on the diagonal."""
    fv = f(vals)
    num = fv[:, None] - fv[None, :]
    den = vals[:, None] - vals[None, :]
    # Guard coincident eigenvalues; replaced by the derivative below.
    close = np.abs(den) <= 1e-12 * np.maximum(1.0, np.abs(vals)[:, None])
    den = np.where(close, 1.0, den)
    dd = num / den
    deriv = fprime(vals)
    davg = 0.5 * (deriv[:, None] + deriv[None, :])
    return np.where(close, davg, dd)


def matrix_function_trace_gradient(h: np.ndarray, weight: np.ndarray,
                                   f: Callable[[np.ndarray], np.ndarray],
                                   fprime: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Gradient G with tr[G D] = d/dt tr[weight f(h + t D)] at t=0.

    Divided differences of f on the spectrum of h, sandwiched in its eigenbasis.
    """
    vals, vecs = np.linalg.eigh(h)
    k = vecs.conj().T @ weight @ vecs
    g = vecs @ (k * _divided_differences(vals, f, fprime)) @ vecs.conj().T
    return hermitianize(g)


def log_frechet_gradient(sigma: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Gradient of tr[rho ln(sigma)] with respect to sigma (natural log).

    Requires supp(rho) inside supp(sigma); eigenvalues of sigma below the
    support cutoff are floored there so the divided differences stay finite.
    """
    if not support_contained(rho, sigma):
        raise ValueError("support of rho is not contained in support of sigma")
    vals, vecs = np.linalg.eigh(sigma)
    floor = SUPPORT_CUTOFF * max(1e-300, float(np.max(np.abs(vals))))
    vals = np.clip(vals, floor, None)
    k = vecs.conj().T @ rho @ vecs
    dd = _divided_differences(vals, np.log, lambda x: 1.0 / x)
    return hermitianize(vecs @ (k * dd) @ vecs.conj().T)
