"""Operational bounds built on the unextendible-entanglement measures.

Covers probabilistic-distillation overhead lower bounds (copies consumed per
success), exact-distillation rate upper bounds (bits per copy), private-state
sanity checks, the erased and isotropic case studies with their relative
entropies of entanglement, the sweep driver behind the overhead tables, and
a Monte-Carlo check of the erased-state post-selection protocol.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import divergences, linalg, states
from .measures import (FWOptions, _golden_section, e_max_u, e_min_u,
                       e_rel_u, unext_fidelity)
from .states import BipartiteState, PrivateState

__all__ = [
    "BoundReport", "det_rate_to_ebit", "ent_overhead_lower_bound",
    "erased_protocol_monte_carlo", "exact_ent_upper_bound",
    "exact_key_upper_bound", "key_overhead_lower_bound",
    "private_state_bound_check", "ree_erased", "ree_isotropic_qubit", "sweep",
]

# measures below this many bits are treated as zero; the induced overhead
# bound is reported as infinity
ZERO_MEASURE = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """A single operational bound.

    task: key-overhead | ent-overhead | exact-key | exact-ent | det-rate.
    value: copies-per-success for the overhead tasks, bits-per-copy for the
      exact tasks; math.inf marks a vanishing-measure denominator.
    measure: name of the measure the bound is computed from.
    measure_value: its value in bits.
    state: descriptor of the input state.
    """

    task: str
    value: float
    measure: str
    measure_value: float
    state: str
    details: dict = field(default_factory=dict)


def _state_label(rho: BipartiteState) -> str:
    return rho.label or f"state({rho.d_a}x{rho.d_b})"


def _overhead(task: str, rho: BipartiteState, count: int,
              opts: Optional[FWOptions]) -> BoundReport:
    if count < 1:
        raise ValueError("target count must be a positive integer")
    res = e_rel_u(rho, opts)
    if res.value <= ZERO_MEASURE:
        value = math.inf
    else:
        value = count / res.value
    return BoundReport(task=task, value=value, measure="e_rel_u",
                       measure_value=res.value, state=_state_label(rho),
                       details={"count": count,
                                "status": res.diagnostics.get("status"),
                                "gap_bits": res.diagnostics.get("gap_bits"),
                                "iterations": res.diagnostics.get("iterations")})


def key_overhead_lower_bound(rho: BipartiteState, k: int = 1,
                             opts: Optional[FWOptions] = None) -> BoundReport:
    """Expected copies of rho consumed per batch of k private bits, from
    below: k / E^u(rho); infinite when the measure vanishes."""
    return _overhead("key-overhead", rho, k, opts)


def ent_overhead_lower_bound(rho: BipartiteState, m: int = 1,
                             opts: Optional[FWOptions] = None) -> BoundReport:
    """Expected copies of rho consumed per batch of m ebits, from below:
    m / E^u(rho)."""
    return _overhead("ent-overhead", rho, m, opts)


def exact_key_upper_bound(rho: BipartiteState, tol: float = 1e-8) -> BoundReport:
    """Asymptotic exact distillable key under two-extendible operations,
    from above: E_min^u(rho) bits per copy."""
    res = e_min_u(rho, tol=tol)
    return BoundReport(task="exact-key", value=res.value, measure="e_min_u",
                       measure_value=res.value, state=_state_label(rho),
                       details={"gap": res.diagnostics.get("gap")})


def exact_ent_upper_bound(rho: BipartiteState, tol: float = 1e-8) -> BoundReport:
    """Asymptotic exact distillable entanglement under two-extendible
    operations, from above: E_min^u(rho) bits per copy."""
    res = e_min_u(rho, tol=tol)
    return BoundReport(task="exact-ent", value=res.value, measure="e_min_u",
                       measure_value=res.value, state=_state_label(rho),
                       details={"gap": res.diagnostics.get("gap")})


def det_rate_to_ebit(psi: BipartiteState) -> float:
    """Deterministic transformation rate from a pure state to ebits:
    -log2 of the largest squared Schmidt coefficient."""
    if psi.purity() < 1.0 - 1e-9:
        raise ValueError("det_rate_to_ebit expects a pure state")
    top = float(np.max(np.linalg.eigvalsh(linalg.hermitianize(psi.marginal_a()))))
    return -math.log2(min(max(top, 1e-300), 1.0))


def private_state_bound_check(gamma: PrivateState, tol: float = 1e-8) -> dict:
    """Evaluate E_min^u, E_max^u and -log2 F^u of a private state across the
    (AA'):(BB') cut and compare each against log2 of the key dimension.
    passes is True when every measure clears log2 K - 1e-6."""
    rho = gamma.state
    target = math.log2(gamma.key_dim)
    emin = e_min_u(rho, tol=tol).value
    emax = e_max_u(rho, tol=tol).value
    ehalf = unext_fidelity(rho, tol=tol).diagnostics["e_half_bits"]
    values = {"e_min_u": emin, "e_max_u": emax, "e_half_u": ehalf}
    margin = min(v - target for v in values.values())
    return {
        "key_bits": target,
        "values": values,
        "margin": margin,
        "passes": bool(margin >= -1e-6),
        "state": rho.label or f"private(K={gamma.key_dim})",
    }


def _erased_witness(eps: float) -> np.ndarray:
    """The separable state achieving the erased-state relative entropy of
    entanglement: classically correlated qubit pairs with weight 1-eps plus
    the flagged maximally mixed branch with weight eps."""
    sigma = np.zeros((6, 6), dtype=np.complex128)
    sigma[0, 0] = (1.0 - eps) / 2.0   # |00><00|
    sigma[3, 3] = (1.0 - eps) / 2.0   # |11><11|
    sigma[4, 4] = eps / 2.0           # |2><2| (x) I/2
    sigma[5, 5] = eps / 2.0
    return sigma


def ree_erased(eps: float, verify: bool = True) -> float:
    """Relative entropy of entanglement of the erased state: 1 - eps.

    With verify=True the closed form is checked against the divergence to
    the explicit separable witness within 1e-10; a mismatch is a hard error
    (it would mean the state constructors and the closed form disagree)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    value = 1.0 - eps
    if verify:
        rho = states.erased(eps).rho
        dist = float(divergences.relative_entropy(rho, _erased_witness(eps)))
        if abs(dist - value) > 1e-10:
            raise ArithmeticError(
                f"erased witness divergence {dist} != {value}")
    return value


def _isotropic_ppt_margin(d: int, s: float) -> float:
    """Smallest eigenvalue of the partial transpose of the isotropic state;
    nonnegative exactly on the separable range (PPT is exact for 2 (x) 2)."""
    rho = states.isotropic(d, s).rho
    pt = rho.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)
    return float(np.min(np.linalg.eigvalsh(linalg.hermitianize(pt))))


def _isotropic_separable_max(d: int = 2, tol: float = 1e-12) -> float:
    """Largest isotropic fidelity parameter that stays PPT, by bisection."""
    lo, hi = 1.0 / (d * d), 1.0
    if _isotropic_ppt_margin(d, hi) >= 0.0:
        return hi
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _isotropic_ppt_margin(d, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def ree_isotropic_qubit(r: float) -> float:
    """Relative entropy of entanglement of the 2 (x) 2 isotropic state.

    The twirl channel fixes rho_r and maps any separable state to a
    separable isotropic state, and relative entropy is monotone under it,
    so the minimization reduces to the isotropic separable segment. That
    segment is found by the PPT criterion (exact for two qubits) and the
    1-D convex problem is solved by golden-section."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"isotropic parameter r={r} outside [0, 1]")
    s_max = _isotropic_separable_max(2)
    if r <= s_max + 1e-12:
        return 0.0
    rho = states.isotropic(2, r).rho
    lo = 1e-9

    def objective(x: float) -> float:
        s = lo + x * (s_max - lo)
        return float(divergences.relative_entropy(
            rho, states.isotropic(2, s).rho))

    _, value = _golden_section(objective, tol=1e-12)
    return max(value, 0.0)


_SWEEP_MEASURES = ("e_rel", "e_max", "e_min", "f_u")


def _sweep_state(family: str, param: float) -> BipartiteState:
    if family == "isotropic":
        return states.isotropic(2, param)
    if family == "erased":
        return states.erased(param)
    raise ValueError(f"unknown sweep family {family!r}")


def _sweep_ree(family: str, param: float) -> float:
    if family == "isotropic":
        return ree_isotropic_qubit(param)
    return ree_erased(param, verify=False)


def _sweep_row(family: str, param: float, measures: Sequence[str],
               opts: Optional[FWOptions]) -> dict:
    rho = _sweep_state(family, param)
    row = {"param": float(param), "e_rel": None, "e_max": None,
           "e_min": None, "f_u": None, "overhead_rel": None,
           "overhead_ree": None}
    if "e_rel" in measures:
        value = e_rel_u(rho, opts).value
        row["e_rel"] = value
        row["overhead_rel"] = math.inf if value <= ZERO_MEASURE else 1.0 / value
    if "e_max" in measures:
        row["e_max"] = e_max_u(rho).value
    if "e_min" in measures:
        row["e_min"] = e_min_u(rho).value
    if "f_u" in measures:
        row["f_u"] = unext_fidelity(rho).value
    ree = _sweep_ree(family, param)
    row["overhead_ree"] = math.inf if ree <= ZERO_MEASURE else 1.0 / ree
    return row


def sweep(family: str, grid: Sequence[float],
          measures: Sequence[str] = _SWEEP_MEASURES,
          opts: Optional[FWOptions] = None,
          jobs: int = 1) -> list:
    """Evaluate the requested measures over a parameter grid.

    family: "isotropic" (2 (x) 2, parameter r) or "erased" (parameter eps).
    Returns one dict per grid point with keys param, e_rel, e_max, e_min,
    f_u, overhead_rel (1/e_rel) and overhead_ree (1/REE closed form);
    unrequested measures stay None. Grid points are independent, so jobs>1
    evaluates them in a thread pool."""
    unknown = set(measures) - set(_SWEEP_MEASURES)
    if unknown:
        raise ValueError(f"unknown measures {sorted(unknown)}")
    params = [float(p) for p in grid]
    if not params:
        return []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda p: _sweep_row(family, p, measures, opts), params))
    else:
        rows = [_sweep_row(family, p, measures, opts) for p in params]
    return rows


def erased_protocol_monte_carlo(eps: float, trials: int = 100_000,
                                seed: Optional[int] = None) -> float:
    """Empirical copies-per-ebit of the erased-state protocol.

    Each attempt consumes fresh copies until the flag measurement reports
    no erasure (probability 1-eps), so the copies consumed per success are
    geometric; the estimate is their sample mean. eps=1 never succeeds and
    reports infinity."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    if trials < 1:
        raise ValueError("trials must be a positive integer")
    p = 1.0 - eps
    if p <= 0.0:
        return math.inf
    rng = np.random.default_rng(seed)
    draws = rng.geometric(p, size=trials)
    return float(np.mean(draws))
