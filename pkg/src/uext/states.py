"""Bipartite state constructors, private states, and channel plumbing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import PSD_TOL, hermitianize, kron, partial_trace, permute_systems


@dataclass(frozen=True)
class BipartiteState:
    """A density matrix on A (x) B with the split recorded.

    Validation is strict: non-Hermitian, non-unit-trace, or non-PSD input is a
    hard error, never a warning.
    """

    rho: np.ndarray
    d_a: int
    d_b: int
    label: str = ""

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.complex128)
        object.__setattr__(self, "rho", rho)
        d = self.d_a * self.d_b
        if rho.shape != (d, d):
            raise ValueError(f"state shape {rho.shape} does not match dims {self.d_a}x{self.d_b}")
        linalg.assert_hermitian(rho, tol=1e-9, name="state")
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"state trace {tr} is not 1")
        vals = np.linalg.eigvalsh(hermitianize(rho))
        if vals[0] < -PSD_TOL * max(1.0, float(vals[-1])):
            raise ValueError(f"state is not PSD (min eigenvalue {vals[0]:.3e})")

    @property
    def dim(self) -> int:
        return self.d_a * self.d_b

    def marginal_a(self) -> np.ndarray:
        return partial_trace(self.rho, (self.d_a, self.d_b), traced=(1,))

    def marginal_b(self) -> np.ndarray:
        return partial_trace(self.rho, (self.d_a, self.d_b), traced=(0,))

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map given by Kraus operators (possibly non-TP)."""

    kraus: tuple
    label: str = ""

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus)
        if not ks:
            raise ValueError("channel needs at least one Kraus operator")
        d_in = ks[0].shape[1]
        d_out = ks[0].shape[0]
        for k in ks:
            if k.shape != (d_out, d_in):
                raise ValueError("Kraus operators must share a common shape")
        object.__setattr__(self, "kraus", ks)

    @property
    def in_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus[0].shape[0]

    def kraus_sum(self) -> np.ndarray:
        """Sum of K^dag K; equals the identity for trace-preserving maps."""
        return sum(k.conj().T @ k for k in self.kraus)

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.kraus_sum() - np.eye(self.in_dim))) <= tol)


@dataclass(frozen=True)
class PrivateState:
    """A twisted maximally entangled state on key + shield systems.

    `state` carries the (A A') : (B B') bipartition, i.e. key and shield on
    each side grouped together.
    """

    state: BipartiteState
    key_dim: int
    shield_dims: tuple
    twist: tuple = field(repr=False, default=())


def max_entangled(d: int) -> BipartiteState:
    """The maximally entangled state of Schmidt rank d."""
    if d < 2:
        raise ValueError(f"need local dimension >= 2, got {d}")
    phi = np.zeros(d * d, dtype=np.complex128)
    phi[:: d + 1] = 1.0 / np.sqrt(d)
    return BipartiteState(np.outer(phi, phi.conj()), d, d, label=f"maxent(d={d})")


def isotropic(d: int, r: float) -> BipartiteState:
    """Mix the maximally entangled state with the orthogonal flat state.

    r is the weight on the maximally entangled projector, r in [0, 1].
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"isotropic parameter r={r} outside [0, 1]")
    phi = max_entangled(d).rho
    rest = (np.eye(d * d) - phi) / (d * d - 1)
    return BipartiteState(r * phi + (1 - r) * rest, d, d, label=f"isotropic(d={d},r={r})")


def erased(eps: float) -> BipartiteState:
    """A maximally entangled qubit pair erased with probability eps.

    A side is a qutrit (qubit + erasure flag |2>), B side a qubit; with
    probability eps the A system is replaced by the flag and B is left
    maximally mixed.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    d_a, d_b = 3, 2
    rho = np.zeros((d_a * d_b, d_a * d_b), dtype=np.complex128)
    phi = max_entangled(2).rho  # on (qubit A) x (B)
    # Embed the qubit part of A into the first two levels of the qutrit.
    idx = [a * d_b + b for a in (0, 1) for b in (0, 1)]
    rho[np.ix_(idx, idx)] += (1 - eps) * phi
    flag = np.zeros((d_a, d_a))
    flag[2, 2] = 1.0
    rho += eps * kron(flag, np.eye(d_b) / d_b)
    return BipartiteState(rho, d_a, d_b, label=f"erased(eps={eps})")


def haar_random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pure_from_schmidt(schmidt: Sequence[float], seed: int | None = None) -> BipartiteState:
    """Pure state with the given Schmidt coefficients (squared amplitudes).

    With a seed, the local bases are Haar-random; otherwise computational.
    """
    coeffs = np.asarray(schmidt, dtype=float)
    if np.any(coeffs < -1e-12):
        raise ValueError("Schmidt coefficients must be nonnegative")
    coeffs = np.clip(coeffs, 0.0, None)
    if abs(coeffs.sum() - 1.0) > 1e-9:
        raise ValueError(f"Schmidt coefficients sum to {coeffs.sum()}, not 1")
    d = len(coeffs)
    vec = np.zeros(d * d, dtype=np.complex128)
    vec[:: d + 1] = np.sqrt(coeffs)
    if seed is not None:
        rng = np.random.default_rng(seed)
        u = haar_random_unitary(d, rng)
        v = haar_random_unitary(d, rng)
        vec = kron(u, v) @ vec
    return BipartiteState(np.outer(vec, vec.conj()), d, d, label="pure")


def random_state(d: int, rank: int | None = None, seed: int | None = None,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Ginibre-induced random density matrix of the given rank."""
    if rng is None:
        rng = np.random.default_rng(seed)
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank {rank} outside 1..{d}")
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))


def random_bipartite_state(d_a: int, d_b: int, rank: int | None = None,
                           seed: int | None = None) -> BipartiteState:
    return BipartiteState(random_state(d_a * d_b, rank=rank, seed=seed),
                          d_a, d_b, label=f"random(seed={seed})")


def purification(rho: np.ndarray, d_env: int | None = None) -> np.ndarray:
    """A purifying vector on system (x) environment, environment second."""
    rho = np.asarray(rho, dtype=np.complex128)
    vals, vecs = linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    rank = max(1, int(np.sum(vals > linalg.SUPPORT_CUTOFF * max(vals[0], 1e-300))))
    d_env = rank if d_env is None else int(d_env)
    if d_env < rank:
        raise ValueError(f"environment dim {d_env} below rank {rank}")
    d = rho.shape[0]
    vec = np.zeros(d * d_env, dtype=np.complex128)
    for i in range(rank):
        env = np.zeros(d_env)
        env[i] = 1.0
        vec += np.sqrt(vals[i]) * kron(vecs[:, i].reshape(-1, 1), env.reshape(-1, 1)).ravel()
    return vec


def private_state(key_dim: int, shield_dims: tuple = (2, 2),
                  twist: Sequence[np.ndarray] | None = None,
                  seed: int | None = None,
                  shield_state: np.ndarray | None = None) -> PrivateState:
    """Twist a maximally entangled key with controlled unitaries on a shield.

    The twist applies U^(ij) on the shield conditioned on key basis |i>_A |j>_B;
    omitted twists are Haar-random (seeded). The returned state is permuted to
    the (A A') : (B B') cut.
    """
    k = int(key_dim)
    d_sa, d_sb = shield_dims
    d_s = d_sa * d_sb
    rng = np.random.default_rng(seed)
    if twist is None:
        twist = [haar_random_unitary(d_s, rng) for _ in range(k * k)]
    twist = [np.asarray(u, dtype=np.complex128) for u in twist]
    if len(twist) != k * k or any(u.shape != (d_s, d_s) for u in twist):
        raise ValueError("need one shield unitary per key pair (i, j)")
    if shield_state is None:
        shield_state = np.eye(d_s) / d_s
    # Build on A (x) B (x) A' (x) B', keys first.
    phi = max_entangled(k).rho
    full = kron(phi, shield_state)
    u_full = np.zeros((k * k * d_s, k * k * d_s), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            sel = np.zeros((k * k, k * k))
            sel[i * k + j, i * k + j] = 1.0
            u_full += kron(sel, twist[i * k + j])
    gamma = u_full @ full @ u_full.conj().T
    # Regroup to (A, A') : (B, B').
    gamma = permute_systems(gamma, (k, k, d_sa, d_sb), (0, 2, 1, 3))
    state = BipartiteState(hermitianize(gamma), k * d_sa, k * d_sb,
                           label=f"private(K={k},seed={seed})")
    return PrivateState(state, k, (d_sa, d_sb), tuple(twist))


def one_locc_instrument(f_maps: Sequence[Sequence[Sequence[np.ndarray]]],
                        g_channels: Sequence[Sequence[Sequence[np.ndarray]]]) -> list:
    """Assemble a one-way LOCC instrument from local pieces.

    f_maps[y][x] is the Kraus list of the CP map F^(x,y) on A and
    g_channels[y][x] the Kraus list of the channel G^(x,y) on B. Each outcome
    map is sum_x F^(x,y) (x) G^(x,y); the F's must sum to a channel over all
    (x, y) and every G^(x,y) must itself be a channel.
    """
    if len(f_maps) != len(g_channels):
        raise ValueError("f_maps and g_channels need matching outcome counts")
    total = None
    out = []
    for y, (fy, gy) in enumerate(zip(f_maps, g_channels)):
        if len(fy) != len(gy):
            raise ValueError(f"outcome {y}: mismatched x-index counts")
        kraus = []
        for fx, gx in zip(fy, gy):
            g_chan = KrausChannel(tuple(gx))
            if not g_chan.is_trace_preserving(tol=1e-8):
                raise ValueError("every G^(x,y) must be trace preserving")
            s = sum(np.asarray(k).conj().T @ np.asarray(k) for k in fx)
            total = s if total is None else total + s
            for kf in fx:
                for kg in gx:
                    kraus.append(kron(np.asarray(kf), np.asarray(kg)))
        out.append(KrausChannel(tuple(kraus), label=f"y={y}"))
    if total is None or np.max(np.abs(total - np.eye(total.shape[0]))) > 1e-8:
        raise ValueError("the F^(x,y) must sum to a trace-preserving map on A")
    return out


def apply_channel(channel: KrausChannel, state: BipartiteState, side: str = "a",
                  renormalize: bool = False) -> tuple:
    """Apply a CP map to one side (or both) of a bipartite state.

    Returns (BipartiteState, probability). For trace-preserving maps the
    probability is 1; for instrument outcomes it is the outcome probability
    and the state is renormalized when `renormalize` is set.
    """
    if side not in ("a", "b", "both"):
        raise ValueError(f"side must be 'a', 'b', or 'both', not {side!r}")
    rho = state.rho
    d_a, d_b = state.d_a, state.d_b
    out = np.zeros_like(rho, shape=None)
    ks = []
    if side == "a":
        if channel.in_dim != d_a:
            raise ValueError("channel input dim does not match side A")
        ks = [kron(k, np.eye(d_b)) for k in channel.kraus]
        new_da, new_db = channel.out_dim, d_b
    elif side == "b":
        if channel.in_dim != d_b:
            raise ValueError("channel input dim does not match side B")
        ks = [kron(np.eye(d_a), k) for k in channel.kraus]
        new_da, new_db = d_a, channel.out_dim
    else:
        if channel.in_dim != d_a * d_b:
            raise ValueError("channel input dim does not match the joint system")
        ks = list(channel.kraus)
        if channel.out_dim != channel.in_dim:
            raise ValueError("joint channels must preserve the local dims here")
        new_da, new_db = d_a, d_b
    out = sum(k @ rho @ k.conj().T for k in ks)
    p = float(np.real(np.trace(out)))
    if renormalize:
        if p <= 1e-14:
            raise ValueError("outcome has vanishing probability")
        out = out / p
    elif abs(p - 1.0) > 1e-8:
        raise ValueError("map is not trace preserving; pass renormalize=True")
    return BipartiteState(hermitianize(out), new_da, new_db), p
