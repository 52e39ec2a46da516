"""Standard-form carrier for the semidefinite programs over extension sets.

A ConicProblem is: optimize sum_b tr[C_b X_b] over PSD blocks X_b subject to
linear equalities sum_b tr[A_jb X_b] = rhs_j. Constraint coefficients are
stored per block as a stack of Hermitian matrices, one slice per row, so the
j-th equality reads sum_b tr[rows[b][j] @ X_b] = rhs[j]. Operator equations
(partial-trace pins and the like) are expanded against an orthonormal
Hermitian basis of the equation space, which keeps every coefficient slice
Hermitian and every right-hand side real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Tuple

import numpy as np

from .. import linalg
from ..states import BipartiteState


def hermitian_basis(order: int) -> np.ndarray:
    """Orthonormal basis of the real space of order x order Hermitian
    matrices: diagonal units first, then (E_kl + E_lk)/sqrt2 and
    i(E_kl - E_lk)/sqrt2 for each k < l. Shape (order**2, order, order)."""
    out = np.zeros((order * order, order, order), dtype=np.complex128)
    idx = 0
    for k in range(order):
        out[idx, k, k] = 1.0
        idx += 1
    inv = 1.0 / np.sqrt(2.0)
    for k in range(order):
        for l in range(k + 1, order):
            out[idx, k, l] = inv
            out[idx, l, k] = inv
            idx += 1
            out[idx, k, l] = 1j * inv
            out[idx, l, k] = -1j * inv
            idx += 1
    return out


def expand_against_basis(basis: np.ndarray, operator: np.ndarray) -> np.ndarray:
    """Real coefficients tr[B_j R] of a Hermitian operator R."""
    return np.real(np.einsum("jab,ba->j", basis, operator))


@dataclass(frozen=True)
class Block:
    name: str
    order: int


@dataclass
class ConicProblem:
    """Equality-form conic program over a product of PSD blocks."""

    blocks: Tuple[Block, ...]
    objective: Dict[str, np.ndarray]
    rows: Dict[str, np.ndarray]
    rhs: np.ndarray
    sense: str = "min"
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return int(self.rhs.shape[0])

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def validate(self) -> None:
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be min or max, got {self.sense!r}")
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise ValueError("duplicate block names")
        m = self.m
        for b in self.blocks:
            stack = self.rows[b.name]
            if stack.shape != (m, b.order, b.order):
                raise ValueError(f"row stack for {b.name} has shape "
                                 f"{stack.shape}, expected {(m, b.order, b.order)}")
            c = self.objective.get(b.name)
            if c is not None and c.shape != (b.order, b.order):
                raise ValueError(f"objective for {b.name} has wrong shape")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("non-finite right-hand side")


def support_isometry(operator: np.ndarray) -> np.ndarray:
    """Isometry onto the support of a PSD operator (columns = eigenvectors
    with eigenvalue above the relative support cutoff). Returns the identity
    when full rank, so well-conditioned problems keep their natural basis."""
    vals, vecs = linalg.eigh(operator)
    top = max(float(vals[0]), 1e-300)
    rank = int(np.sum(vals > linalg.SUPPORT_CUTOFF * top))
    rank = max(rank, 1)
    if rank == operator.shape[0]:
        return np.eye(operator.shape[0], dtype=np.complex128)
    return np.ascontiguousarray(vecs[:, :rank])


@dataclass(frozen=True)
class ExtensionProgram:
    """The feasible set of extensions of rho: sigma on ABB' PSD with
    tr_B'[sigma] = rho.

    Every feasible sigma is supported on supp(rho) (x) B' (a PSD operator
    with vanishing diagonal on a vector annihilates it), so the set is
    carried in the compressed coordinates sigma_red on supp(rho) (x) B'.
    That facial reduction is exact and makes the compressed set strictly
    feasible whenever rho is a state, which keeps the interior-point solves
    well-posed even for pure and low-rank inputs.
    """

    rho: BipartiteState

    @property
    def extension_dims(self) -> Tuple[int, int, int]:
        return (self.rho.d_a, self.rho.d_b, self.rho.d_b)

    @property
    def extension_order(self) -> int:
        d_a, d_b, d_bp = self.extension_dims
        return d_a * d_b * d_bp

    @cached_property
    def support(self) -> np.ndarray:
        """Isometry from the support of rho into the AB space."""
        return support_isometry(self.rho.rho)

    @property
    def rank(self) -> int:
        return self.support.shape[1]

    @property
    def reduced_dims(self) -> Tuple[int, int]:
        return (self.rank, self.rho.d_b)

    @property
    def reduced_order(self) -> int:
        return self.rank * self.rho.d_b

    @cached_property
    def isometry(self) -> np.ndarray:
        """supp(rho) (x) B' -> ABB', i.e. support (x) identity on B'."""
        return np.kron(self.support, np.eye(self.rho.d_b))

    @cached_property
    def rho_reduced(self) -> np.ndarray:
        return linalg.hermitianize(self.support.conj().T @ self.rho.rho
                                   @ self.support)

    @cached_property
    def marginal_basis(self) -> np.ndarray:
        return hermitian_basis(self.rank)

    @cached_property
    def marginal_rows(self) -> np.ndarray:
        """Rows pinning tr_B'[sigma_red] = rho compressed to its support:
        support-space basis elements tensored with the identity on B'."""
        eye = np.eye(self.rho.d_b)
        return np.stack([np.kron(mat, eye) for mat in self.marginal_basis])

    @cached_property
    def marginal_rhs(self) -> np.ndarray:
        return expand_against_basis(self.marginal_basis, self.rho_reduced)

    def compress(self, operator: np.ndarray) -> np.ndarray:
        """Compress a Hermitian operator on ABB' to the reduced coordinates
        (adjoint of uncompress)."""
        v = self.isometry
        return linalg.hermitianize(v.conj().T @ operator @ v)

    def uncompress(self, sigma_red: np.ndarray) -> np.ndarray:
        v = self.isometry
        return linalg.hermitianize(v @ sigma_red @ v.conj().T)

    def feasibility_residual(self, sigma: np.ndarray) -> float:
        """Entrywise marginal error of a full-space extension candidate."""
        marg = linalg.partial_trace(sigma, list(self.extension_dims), (2,))
        return float(np.max(np.abs(marg - self.rho.rho)))

    def lmo_problem(self, gradient: np.ndarray) -> ConicProblem:
        """Linear minimization over the extension set: min tr[G sigma] with
        G Hermitian on ABB'. Used as the inner step of the first-order
        measures. The returned problem is in reduced coordinates; its
        optimal sigma block is mapped back by uncompress."""
        n = self.extension_order
        if gradient.shape != (n, n):
            raise ValueError("gradient has wrong shape for the extension set")
        return ConicProblem(
            blocks=(Block("sigma", self.reduced_order),),
            objective={"sigma": self.compress(gradient)},
            rows={"sigma": self.marginal_rows},
            rhs=self.marginal_rhs,
            sense="min",
            meta={"kind": "extension_lmo", "extension_block": "sigma",
                  "dims": self.extension_dims, "reduced": self.rank < self.rho.dim},
        )
