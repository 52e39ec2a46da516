"""Unextendible-entanglement measures, bounds, and the conic machinery
behind them.

The public surface re-exports the state constructors, the five measures,
and the bound/sweep helpers; the conic submodule stays importable for
anyone who needs the raw programs.
"""

__version__ = "0.1.0"

from .states import (
    BipartiteState,
    KrausChannel,
    PrivateState,
    apply_channel,
    erased,
    isotropic,
    max_entangled,
    private_state,
    pure_from_schmidt,
    random_bipartite_state,
    random_state,
)
from .measures import (
    FWOptions,
    MeasureResult,
    e_max_u,
    e_min_u,
    e_rel_u,
    is_two_extendible,
    petz_alpha_u,
    pure_state_measures,
    unext_fidelity,
)
from .applications import (
    BoundReport,
    det_rate_to_ebit,
    ent_overhead_lower_bound,
    erased_protocol_monte_carlo,
    exact_ent_upper_bound,
    exact_key_upper_bound,
    key_overhead_lower_bound,
    private_state_bound_check,
    ree_erased,
    ree_isotropic_qubit,
    sweep,
)

__all__ = [
    "__version__",
    "BipartiteState",
    "KrausChannel",
    "PrivateState",
    "apply_channel",
    "erased",
    "isotropic",
    "max_entangled",
    "private_state",
    "pure_from_schmidt",
    "random_bipartite_state",
    "random_state",
    "FWOptions",
    "MeasureResult",
    "e_max_u",
    "e_min_u",
    "e_rel_u",
    "is_two_extendible",
    "petz_alpha_u",
    "pure_state_measures",
    "unext_fidelity",
    "BoundReport",
    "det_rate_to_ebit",
    "ent_overhead_lower_bound",
    "erased_protocol_monte_carlo",
    "exact_ent_upper_bound",
    "exact_key_upper_bound",
    "key_overhead_lower_bound",
    "private_state_bound_check",
    "ree_erased",
    "ree_isotropic_qubit",
    "sweep",
]
