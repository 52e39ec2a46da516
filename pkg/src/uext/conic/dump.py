"""Plain-text serialization of ConicProblem for cross-solver debugging.

Format (documented in the README): a header line, the sense, one `block`
line per PSD block, then `rhs`, `objective` and `row` sections listing
nonzero entries as sparse triplets `i j re im` with 17 significant digits.
Entry order is deterministic, so equal problems dump to equal text.
"""

from __future__ import annotations

import numpy as np

from .problem import ConicProblem

_EPS = 1e-14


def _entries(mat: np.ndarray) -> str:
    lines = []
    arr = np.asarray(mat, dtype=np.complex128)
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            v = arr[i, j]
            if abs(v) > _EPS:
                lines.append(f"{i} {j} {v.real:.17g} {v.imag:.17g}")
    return "\n".join(lines)


def dump_problem(problem: ConicProblem) -> str:
    out = ["conic-problem v1", f"sense {problem.sense}"]
    for blk in problem.blocks:
        out.append(f"block {blk.name} order {blk.order}")
    out.append(f"rhs m {problem.m}")
    for j, v in enumerate(problem.rhs):
        if abs(v) > _EPS:
            out.append(f"{j} {v:.17g}")
    for blk in problem.blocks:
        cmat = problem.objective.get(blk.name)
        if cmat is not None and np.max(np.abs(cmat)) > _EPS:
            out.append(f"objective block {blk.name}")
            body = _entries(cmat)
            if body:
                out.append(body)
    for j in range(problem.m):
        for blk in problem.blocks:
            coeff = problem.rows[blk.name][j]
            if np.max(np.abs(coeff)) > _EPS:
                out.append(f"row {j} block {blk.name}")
                body = _entries(coeff)
                if body:
                    out.append(body)
    return "\n".join(out) + "\n"
