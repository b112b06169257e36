"""``rznk`` command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number(text: str):
    """Parse ``p/q`` or integer strings exactly, decimals as floats."""
    try:
        if "/" in text or text.lstrip("-").isdigit():
            return Fraction(text)
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _n_arg(text: str):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("--n must be 'auto' or an integer") from exc


def _add_common(p, out_default="-"):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", default=out_default, help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rznk", description="Reznick-type SOS certificates and related checks.")
    parser.add_argument("--version", action="version", version=f"rznk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="build and verify a certificate for a polynomial")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=_n_arg, default="auto")
    p.add_argument("--m", type=_number)
    p.add_argument("--M", type=_number)
    p.add_argument("--design", help="design.json to use (complex only)")
    p.add_argument("--require-cached-design", action="store_true",
                   help="fail unless a design is given or present in RZNK_CACHE_DIR")
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--precision", type=int, default=17)
    _add_common(p)

    p = sub.add_parser("bounds", help="degree bounds for n")
    for name in ("--d", "--k"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--m", type=_number, required=True)
    p.add_argument("--M", type=_number, required=True)
    p.add_argument("--real", action="store_true")
    p.add_argument("--n-max", type=int, default=100_000)
    _add_common(p)

    p = sub.add_parser("design", help="build a Laguerre spherical design")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("verify-design", help="verify a design file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_common(p)

    p = sub.add_parser("coeffs", help="exact coefficient table")
    for name in ("--d", "--k", "--n"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--real", action="store_true")
    _add_common(p)

    p = sub.add_parser("definetti", help="de Finetti truncation report")
    for name in ("--d", "--k", "--n", "--r"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--real", action="store_true")
    _add_common(p)

    p = sub.add_parser("definetti-sweep", help="de Finetti table over a parameter grid")
    p.add_argument("--grid", required=True)
    _add_common(p)

    p = sub.add_parser("motzkin", help="bound curves for the shifted Motzkin family")
    p.add_argument("--eps-min", type=float, required=True)
    p.add_argument("--eps-max", type=float, required=True)
    p.add_argument("--eps-steps", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True, help="cap for the coefficient-threshold search")
    p.add_argument("--numeric-n-max", type=int, default=100_000, help="cap for the bracket search")
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    _add_common(p)

    p = sub.add_parser("wick", help="Gaussian moment (Wick) check")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=200_000)
    _add_common(p)

    p = sub.add_parser("hilbert", help="Hilbert identity check")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--real", action="store_true")
    p.add_argument("--samples", type=int, default=1_000_000)
    _add_common(p)
    return parser


# ---------------------------------------------------------------------------
# commands


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("out",)}


def _report(args, mode: str, tolerances: dict, result, payload=None) -> int:
    from .io import meta, write_json

    write_json(args.out, {"meta": meta(args.seed, mode, tolerances, payload or _params(args)), **result})
    return EXIT_OK


def cmd_certify(args) -> int:
    from .certify import (
        POSITIVITY_TOL, RESIDUAL_TOL, bound_n_numeric, bound_n_real_numeric, build_certificate,
        build_certificate_real,
    )
    from .designs import build_design, design_cache_path
    from .io import cert_to_dict, load_design, load_poly, meta, write_json
    from .symspace import HermOp, estimate_extrema

    raw = Path(args.input).read_bytes()
    obj = load_poly(args.input)
    m, M = args.m, args.M
    if (m is None) != (M is None):
        raise UsageError("give both --m and --M or neither")
    source = "user"
    if m is None:
        est = estimate_extrema(obj, samples=20_000, refine=True, seed=args.seed)
        m, M, source = est.m_est, est.M_est, "estimated"
        if m <= POSITIVITY_TOL:
            m = min(m, 0.0)
    if m <= 0:
        raise UsageError(f"polynomial is not strictly positive (m = {float(m):.6g} <= 0); "
                         "a certificate requires m > 0")
    if M < m:
        raise UsageError("need m <= M")
    is_complex = isinstance(obj, HermOp)
    finder = bound_n_numeric if is_complex else bound_n_real_numeric
    k = obj.k
    if args.n == "auto":
        n = finder(obj.d, k, m, M, args.n_max)
        if n is None:
            raise UsageError(f"no admissible n <= {args.n_max}; raise --n-max or pass --n")
    else:
        n = args.n
        if n < k:
            raise UsageError(f"--n must be >= k = {k}")
    if is_complex:
        if args.design:
            design = load_design(args.design)
        else:
            path = design_cache_path(obj.d, n + k)
            if args.require_cached_design and (path is None or not path.exists()):
                raise UsageError(f"design cache miss for d={obj.d}, degree={n + k}")
            design = build_design(obj.d, n + k)
        if design.degree < n + k:
            raise UsageError(f"design degree {design.degree} < n+k = {n + k}")
        cert = build_certificate(obj, n, design, m=m, M=M, seed=args.seed)
    else:
        cert = build_certificate_real(obj, n, m=m, M=M, seed=args.seed)
    cert.diagnostics["extrema_source"] = source
    tol = {"residual": RESIDUAL_TOL, "positivity": POSITIVITY_TOL}
    mode = "exact" if getattr(obj, "exact", False) else "float"
    write_json(args.out, {"meta": meta(args.seed, mode, tol, raw),
                          **cert_to_dict(cert, args.precision)})
    fail = cert.residual > RESIDUAL_TOL or (cert.regime == "proven" and cert.min_value < -POSITIVITY_TOL)
    fail = fail or (cert.diagnostics.get("matrix_identity") is False)
    if not cert.passed:
        print(f"certificate check failed (regime={cert.regime}, residual={cert.residual:.3e}, "
              f"min={cert.min_value:.3e})", file=sys.stderr)
    return EXIT_FAIL if fail else EXIT_OK


def cmd_bounds(args) -> int:
    from .certify import bound_n_complex, bound_n_real

    if args.m is None or args.m <= 0:
        raise UsageError("--m must be > 0")
    if args.M < args.m:
        raise UsageError("need m <= M")
    fn = bound_n_real if args.real else bound_n_complex
    rep = fn(args.d, args.k, args.m, args.M, n_max=args.n_max)
    return _report(args, "exact", {}, rep.as_dict())


def cmd_design(args) -> int:
    from .designs import build_design
    from .io import design_to_dict, meta, write_json

    des = build_design(args.d, args.degree)
    write_json(args.out, {"meta": meta(args.seed, "float", {}, _params(args)), **design_to_dict(des)})
    return EXIT_OK


def cmd_verify_design(args) -> int:
    from dataclasses import asdict

    from .designs import verify_design
    from .io import load_design

    raw = Path(args.inp).read_bytes()
    rep = verify_design(load_design(args.inp), tol=args.tol, seed=args.seed)
    _report(args, "float", {"frobenius": args.tol}, asdict(rep), raw)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_coeffs(args) -> int:
    from .chiribella import CoeffTable
    from .io import coeff_table_to_dict

    if args.n < args.k or args.k < 0 or args.d < 1:
        raise UsageError("need d >= 1 and 0 <= k <= n")
    table = CoeffTable.build(args.d, args.k, args.n)
    return _report(args, "exact", {}, {"field": "real" if args.real else "complex", **coeff_table_to_dict(table)})


def cmd_definetti(args) -> int:
    from .definetti import definetti_report
    from .io import definetti_to_dict

    if not 1 <= args.k < args.n or not 0 <= args.r <= args.k:
        raise UsageError("need 1 <= k < n and 0 <= r <= k")
    rep = definetti_report(args.d, args.k, args.n, args.r)
    out = definetti_to_dict(rep)
    out["field"] = "real" if args.real else "complex"
    return _report(args, "exact", {}, out)


def _grid_values(entry, name):
    if isinstance(entry, dict):
        return list(range(int(entry["min"]), int(entry["max"]) + 1))
    if isinstance(entry, list):
        return [int(v) for v in entry]
    if isinstance(entry, int):
        return [entry]
    raise UsageError(f"bad grid entry for {name!r}")


def cmd_definetti_sweep(args) -> int:
    from .definetti import definetti_report
    from .io import write_csv

    try:
        grid = json.loads(Path(args.grid).read_text())
        ds, ks, ns = (_grid_values(grid[key], key) for key in ("d", "k", "n"))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed grid file: {exc}") from exc
    r_entry = grid.get("r", "all")
    rows = []
    for d in ds:
        for k in ks:
            for n in ns:
                if not 1 <= k < n:
                    continue
                rs = range(k + 1) if r_entry == "all" else [r for r in _grid_values(r_entry, "r") if 0 <= r <= k]
                for r in rs:
                    rep = definetti_report(d, k, n, r)
                    rows.append([d, k, n, r, rep.delta, rep.eps_exact, rep.eps_bound, rep.feasible])
    write_csv(args.out, ["d", "k", "n", "r", "delta", "eps_exact", "eps_bound", "feasible"], rows)
    return EXIT_OK


def motzkin_rows(eps_min: float, eps_max: float, steps: int, n_max: int, numeric_n_max: int = 100_000,
                 spacing: str = "linear") -> list:
    from .certify import bound_n_real, motzkin_eps_thresholds, motzkin_min_n

    if not 0 < eps_min <= eps_max or steps < 1:
        raise UsageError("need 0 < eps-min <= eps-max and eps-steps >= 1")
    if n_max < 3:
        raise UsageError("--n-max must be >= 3")
    if steps == 1:
        grid = np.array([eps_min])
    elif spacing == "log":
        grid = np.geomspace(eps_min, eps_max, steps)
    else:
        grid = np.linspace(eps_min, eps_max, steps)
    th = motzkin_eps_thresholds(n_max)
    rows = []
    for eps in grid:
        m = Fraction(float(eps))
        M = m + Fraction(4, 27)
        b = bound_n_real(3, 3, m, M, n_max=numeric_n_max)
        rows.append([float(eps), float(m), float(M), b.n_general, b.n_improved, b.n_reznick, b.n_numeric,
                     motzkin_min_n(m, n_max, th)])
    return rows


MOTZKIN_HEADER = ["eps", "m", "M", "general", "improved", "reznick", "numeric", "coeff_threshold_n"]


def cmd_motzkin(args) -> int:
    from .io import write_csv

    rows = motzkin_rows(args.eps_min, args.eps_max, args.eps_steps, args.n_max, args.numeric_n_max, args.spacing)
    write_csv(args.out, MOTZKIN_HEADER, rows)
    return EXIT_OK


def cmd_wick(args) -> int:
    from dataclasses import asdict

    from .designs import wick_check

    try:
        rep = wick_check(args.d, args.n, mc_samples=args.samples, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _report(args, "float", {"sigma": rep.sigma}, asdict(rep))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_hilbert(args) -> int:
    from dataclasses import asdict

    from .designs import verify_hilbert_complex, verify_hilbert_real

    if args.d < 1 or args.n < 0:
        raise UsageError("need d >= 1 and n >= 0")
    if args.real:
        rep = verify_hilbert_real(args.d, args.n, mc_samples=args.samples, seed=args.seed)
        tol = {"exact": rep.tol, "sigma": 4.0}
    else:
        rep = verify_hilbert_complex(args.d, args.n, seed=args.seed)
        tol = {"relative": rep.tol}
    _report(args, "float", tol, asdict(rep))
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "certify": cmd_certify, "bounds": cmd_bounds, "design": cmd_design, "verify-design": cmd_verify_design,
    "coeffs": cmd_coeffs, "definetti": cmd_definetti, "definetti-sweep": cmd_definetti_sweep,
    "motzkin": cmd_motzkin, "wick": cmd_wick, "hilbert": cmd_hilbert,
}


def _thread_limit():
    value = os.environ.get("RZNK_THREADS")
    if not value:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(value)))


def main(argv=None) -> int:
    from .io import InputError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return COMMANDS[args.command](args)
    except (UsageError, InputError, OverflowError, FileNotFoundError) as exc:
        print(f"rznk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"rznk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
