"""Command-line front end: single measures, feasibility checks, bounds, sweeps.

Output contract: one JSON object on stdout for measure/check/bounds (schema
version 1, numerics at 9 significant digits, "inf" as a literal string) and
CSV for sweeps. Exit codes: 0 on success, 2 when an iterative solve did not
converge, 1 on input errors. States are exchanged as JSON files holding the
dimensions and the dense matrix as [re, im] pairs; saving and loading such a
file preserves the matrix bit-for-bit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__, applications, measures, states
from .states import BipartiteState

# extension-space block order d_A * d_B^2 above which solves are refused
MAX_EXTENSION_ORDER = 4096

_MEASURE_KINDS = ("emax", "emin", "fidelity", "rel", "petz")
_BOUND_TASKS = ("key-overhead", "ent-overhead", "exact-key", "exact-ent")
_FAMILIES = ("maxent", "isotropic", "erased", "pure-schmidt", "private")


class InputError(Exception):
    """Bad user input: unreadable state file, invalid parameter range."""


def load_state(path: str) -> BipartiteState:
    """Read a StateFile. Validation (Hermitian, PSD, unit trace) is the
    BipartiteState constructor's; failures surface as InputError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read state file {path}: {exc}") from exc
    try:
        d_a = int(payload["dims"]["A"])
        d_b = int(payload["dims"]["B"])
        rows = payload["matrix"]
        mat = np.array([[complex(cell[0], cell[1]) for cell in row]
                        for row in rows], dtype=np.complex128)
        label = str(payload.get("label", ""))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise InputError(f"malformed state file {path}: {exc}") from exc
    try:
        return BipartiteState(mat, d_a, d_b, label=label)
    except ValueError as exc:
        raise InputError(f"invalid state in {path}: {exc}") from exc


def save_state(path: str, rho: BipartiteState) -> None:
    payload = {
        "dims": {"A": rho.d_a, "B": rho.d_b},
        "matrix": [[[float(np.real(x)), float(np.imag(x))] for x in row]
                   for row in rho.rho],
    }
    if rho.label:
        payload["label"] = rho.label
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def _fmt(value):
    """9 significant digits; infinities as the literal strings the schema
    promises; None passes through (empty CSV cell / JSON null)."""
    if value is None:
        return None
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        return 0.0
    return float(f"{value:.9g}")


def _solver_tol(default: float = 1e-8) -> float:
    raw = os.environ.get("UEXT_SOLVER_TOL")
    if raw is None:
        return default
    try:
        tol = float(raw)
    except ValueError as exc:
        raise InputError(f"UEXT_SOLVER_TOL={raw!r} is not a number") from exc
    if not 0.0 < tol < 1.0:
        raise InputError("UEXT_SOLVER_TOL must be in (0, 1)")
    return tol


def _parse_floats(raw: str) -> list:
    out = []
    for piece in raw.split(","):
        piece = piece.strip()
        if piece:
            out.append(float(piece))
    return out


def state_from_args(args) -> BipartiteState:
    """Build the input state from --state or a family shorthand."""
    if getattr(args, "state", None):
        rho = load_state(args.state)
    elif getattr(args, "family", None):
        rho = _family_state(args)
    else:
        raise InputError("provide --state FILE or --family NAME")
    order = rho.d_a * rho.d_b * rho.d_b
    if order > MAX_EXTENSION_ORDER:
        raise InputError(
            f"extension space order {order} exceeds the guard "
            f"{MAX_EXTENSION_ORDER} (d_A*d_B^2)")
    return rho


def _family_state(args) -> BipartiteState:
    family = args.family
    if family == "maxent":
        return states.max_entangled(args.d)
    if family == "isotropic":
        if args.r is None:
            raise InputError("isotropic family needs --r")
        try:
            return states.isotropic(args.d, args.r)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if family == "erased":
        if args.eps is None:
            raise InputError("erased family needs --eps")
        try:
            return states.erased(args.eps)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if family == "pure-schmidt":
        if not args.schmidt:
            raise InputError("pure-schmidt family needs --schmidt p1,p2,...")
        try:
            spectrum = np.array(_parse_floats(args.schmidt))
            return states.pure_from_schmidt(spectrum, seed=args.seed)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if family == "private":
        shield = tuple(int(x) for x in _parse_floats(args.shield))
        if len(shield) != 2:
            raise InputError("--shield needs two dimensions, e.g. 2,2")
        try:
            return states.private_state(args.key_dim, shield,
                                        seed=args.seed).state
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    raise InputError(f"unknown family {family!r}")


def _emit(record: dict) -> None:
    print(json.dumps(record, indent=2, sort_keys=True))


def _record(command: str, args_echo: dict, t0: float, **fields) -> dict:
    record = {
        "schema": 1,
        "version": __version__,
        "command": command,
        "args": args_echo,
        "runtime_ms": int(round((time.time() - t0) * 1000)),
    }
    record.update(fields)
    return record


def _args_echo(args, keys) -> dict:
    echo = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            echo[key] = value
    return echo


_ECHO_KEYS = ("kind", "alpha", "task", "k", "m", "state", "family", "d", "r",
              "eps", "schmidt", "seed", "key_dim", "shield")


def cmd_measure(args) -> int:
    t0 = time.time()
    rho = state_from_args(args)
    tol = _solver_tol()
    kind = args.kind
    diagnostics: dict
    converged = True
    extras = {}
    if kind in ("emax", "emin", "fidelity"):
        fn = {"emax": measures.e_max_u, "emin": measures.e_min_u,
              "fidelity": measures.unext_fidelity}[kind]
        try:
            res = fn(rho, tol=tol)
        except RuntimeError as exc:
            _emit(_record("measure", _args_echo(args, _ECHO_KEYS), t0,
                          error=str(exc)))
            return 2
        diagnostics = {"iterations": res.diagnostics["iterations"],
                       "gap": _fmt(res.diagnostics["gap"]),
                       "route": res.diagnostics["route"]}
        if kind == "fidelity":
            extras["e_half_bits"] = _fmt(res.diagnostics["e_half_bits"])
    else:
        opts = measures.FWOptions(solver_tol=tol)
        if kind == "petz":
            if args.alpha is None:
                raise InputError("petz needs --alpha in (0, 2]")
            if not 0.0 < args.alpha <= 2.0:
                raise InputError("petz alpha outside (0, 2]")
        try:
            if kind == "petz":
                res = measures.petz_alpha_u(rho, args.alpha, opts)
            else:
                res = measures.e_rel_u(rho, opts)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        except RuntimeError as exc:
            _emit(_record("measure", _args_echo(args, _ECHO_KEYS), t0,
                          error=str(exc)))
            return 2
        converged = res.diagnostics["status"] == "converged"
        diagnostics = {"iterations": res.diagnostics["iterations"],
                       "gap": _fmt(res.diagnostics["gap_bits"]),
                       "status": res.diagnostics["status"]}
    record = _record("measure", _args_echo(args, _ECHO_KEYS), t0,
                     kind=kind, value=_fmt(res.value), state=rho.label or None,
                     diagnostics=diagnostics, **extras)
    _emit(record)
    return 0 if converged else 2


def cmd_check(args) -> int:
    t0 = time.time()
    rho = state_from_args(args)
    report = measures.is_two_extendible(rho, tol=_solver_tol())
    fields = {
        "feasible": report.feasible,
        "margin": _fmt(report.margin),
        "status": report.status,
    }
    if report.feasible and args.certificate:
        d_a, d_b = rho.d_a, rho.d_b
        cert = BipartiteState(report.extension, d_a, d_b * d_b,
                              label=f"two-extension of {rho.label or 'state'}")
        save_state(args.certificate, cert)
        fields["certificate_file"] = args.certificate
    _emit(_record("check-extendible", _args_echo(args, _ECHO_KEYS), t0,
                  **fields))
    return 0 if report.feasible is not None else 2


def cmd_bounds(args) -> int:
    t0 = time.time()
    rho = state_from_args(args)
    tol = _solver_tol()
    task = args.task
    try:
        if task == "key-overhead":
            rep = applications.key_overhead_lower_bound(
                rho, args.k, measures.FWOptions(solver_tol=tol))
        elif task == "ent-overhead":
            rep = applications.ent_overhead_lower_bound(
                rho, args.m, measures.FWOptions(solver_tol=tol))
        elif task == "exact-key":
            rep = applications.exact_key_upper_bound(rho, tol=tol)
        else:
            rep = applications.exact_ent_upper_bound(rho, tol=tol)
    except RuntimeError as exc:
        _emit(_record("bounds", _args_echo(args, _ECHO_KEYS), t0,
                      error=str(exc)))
        return 2
    converged = rep.details.get("status", "converged") in ("converged", None)
    record = _record("bounds", _args_echo(args, _ECHO_KEYS), t0,
                     task=task, value=_fmt(rep.value), measure=rep.measure,
                     measure_value=_fmt(rep.measure_value),
                     state=rep.state or None)
    _emit(record)
    return 0 if converged else 2


_CSV_COLUMNS = ("param", "e_rel", "e_max", "e_min", "f_u", "overhead_rel",
                "overhead_ree")


def _parse_grid(raw: str) -> list:
    """Comma list ("0,0.1,0.2") or start:stop:count ("0:1:11")."""
    raw = raw.strip()
    if not raw:
        return []
    if ":" in raw:
        pieces = raw.split(":")
        if len(pieces) != 3:
            raise InputError("grid range must be start:stop:count")
        start, stop, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
        if count < 0:
            raise InputError("grid count must be nonnegative")
        return [float(x) for x in np.linspace(start, stop, count)]
    try:
        return _parse_floats(raw)
    except ValueError as exc:
        raise InputError(f"bad grid: {exc}") from exc


def cmd_sweep(args) -> int:
    if args.family not in ("isotropic", "erased"):
        raise InputError("sweep family must be isotropic or erased")
    grid = _parse_grid(args.grid)
    requested = tuple(m.strip() for m in args.measures.split(",") if m.strip())
    for m in requested:
        if m not in _CSV_COLUMNS[1:5]:
            raise InputError(f"unknown sweep measure {m!r}")
    opts = measures.FWOptions(solver_tol=_solver_tol())
    try:
        rows = applications.sweep(args.family, grid, requested, opts,
                                  jobs=args.jobs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else _fmt(row[c])
                         for c in _CSV_COLUMNS])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the exit-code contract
    reserves 2 for non-convergence, so usage errors remap to 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_state_args(sub) -> None:
    sub.add_argument("--state", help="StateFile JSON path")
    sub.add_argument("--family", choices=_FAMILIES,
                     help="built-in family instead of a file")
    sub.add_argument("--d", type=int, default=2,
                     help="local dimension for maxent/isotropic")
    sub.add_argument("--r", type=float, help="isotropic fidelity parameter")
    sub.add_argument("--eps", type=float, help="erasure probability")
    sub.add_argument("--schmidt", help="comma list of squared Schmidt weights")
    sub.add_argument("--seed", type=int, help="seed for randomized families")
    sub.add_argument("--key-dim", dest="key_dim", type=int, default=2,
                     help="private-state key dimension")
    sub.add_argument("--shield", default="2,2",
                     help="private-state shield dimensions, e.g. 2,2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uext",
                     description="Unextendible-entanglement measures, "
                                 "feasibility checks, bounds and sweeps.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="cmd", required=True)

    m = subs.add_parser("measure", parents=[], help="compute one measure")
    m.add_argument("--kind", choices=_MEASURE_KINDS, required=True)
    m.add_argument("--alpha", type=float, help="Petz order")
    _add_state_args(m)
    m.set_defaults(fn=cmd_measure)

    c = subs.add_parser("check-extendible", help="two-extendibility test")
    c.add_argument("--certificate", help="write the extension here")
    _add_state_args(c)
    c.set_defaults(fn=cmd_check)

    b = subs.add_parser("bounds", help="operational bound from a measure")
    b.add_argument("--task", choices=_BOUND_TASKS, required=True)
    b.add_argument("--k", type=int, default=1, help="private bits (key-overhead)")
    b.add_argument("--m", type=int, default=1, help="ebits (ent-overhead)")
    _add_state_args(b)
    b.set_defaults(fn=cmd_bounds)

    s = subs.add_parser("sweep", help="grid sweep to CSV")
    s.add_argument("--family", required=True)
    s.add_argument("--grid", required=True,
                   help='comma list "0,0.5,1" or range "0:1:11"')
    s.add_argument("--measures", default="e_rel,e_max,e_min,f_u")
    s.add_argument("--out", help="CSV output path (default stdout)")
    s.add_argument("--jobs", type=int, default=1,
                   help="parallel grid evaluations")
    s.set_defaults(fn=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
