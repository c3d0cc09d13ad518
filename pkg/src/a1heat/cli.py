"""Command-line front end.

Exit codes: 0 success, 2 a verification check failed, 1 misuse or a
configuration error.  Reports go to ``--out`` (stdout by default) as JSON,
or CSV for ``verify-bound``.
"""

import argparse
import math
import sys

from ._parallel import resolve_threads
from .envelope import envelope_E_phi0_form, log_envelope_E_rank1
from .errors import A1HeatError
from .kernels import DEFAULT_CONFIG, EvalPoint
from .regions import (RegionLabel, all_windows, classify, cover_level, cover_windows,
                      d2_partition_weights, derive_params)
from .report import report_write
from .specfun import as_k, phi_lambda, phi_lambda_method
from .supersolutions import STAGES, region_points, sign_sweep
from .verify import (PRESETS, GridSpec, McConfig, log_heat_kernel, mc_density_check,
                     oracle_crosscheck, preset_grid, ratio_sweep, strip_points)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
MAX_POINTS = 1_000_000

# points per axis of the region-parametrised sign grids
SIGN_AXIS = {"smoke": 6, "default": 20, "dense": 30}
# points per axis of the gluing-strip grids (glued functions are costlier)
GLUED_AXIS = {"smoke": 4, "default": 8, "dense": 12}

REGION_NAMES = [lab.value for lab in RegionLabel]


class UsageError(A1HeatError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _nonneg(text):
    v = float(text)
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text}")
    return v


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed list {text!r}") from None


def _sign(text):
    table = {"plus": "+", "+": "+", "minus": "-", "-": "-"}
    if text not in table:
        raise argparse.ArgumentTypeError("sign must be plus or minus")
    return table[text]


# ---------------------------------------------------------------------------
# subcommands; each returns (report, passed)
# ---------------------------------------------------------------------------

def _point(a):
    return EvalPoint(a.r, a.s, a.t)


def cmd_eval(a):
    logh, method = log_heat_kernel(as_k(a.k), _point(a), DEFAULT_CONFIG, a.method)
    return {"h": math.exp(logh), "log_h": logh, "method": method,
            "k": a.k, "r": a.r, "s": a.s, "t": a.t}, True


def cmd_phi(a):
    val = phi_lambda(as_k(a.k), a.lam, a.r, validate=a.validate)
    return {"phi": val, "method": phi_lambda_method(a.k, a.lam, a.r),
            "k": a.k, "lam": a.lam, "r": a.r}, True


def cmd_envelope(a):
    p = _point(a)
    le = log_envelope_E_rank1(as_k(a.k), p)
    out = {"E": math.exp(le), "log_E": le, "k": a.k, "r": a.r, "s": a.s, "t": a.t}
    if a.phi0_form:
        out["E_phi0_form"] = envelope_E_phi0_form(a.k, p)
    return out, True


def cmd_regions(a):
    if a.show_presets:
        return {"ratio_grids": PRESETS, "sign_axis_points": SIGN_AXIS,
                "glued_axis_points": GLUED_AXIS}, True
    if a.k is None:
        raise UsageError("regions needs --k (or --show-presets)")
    out = {"k": a.k, "params": derive_params(a.k)}
    if None not in (a.r, a.s, a.t):
        p = _point(a)
        q = p if p.r >= p.s else p.swapped()
        out["regions"] = sorted(str(x) for x in classify(q, out["params"]))
    return out, True


def cmd_cover(a):
    wins = cover_windows(a.s, a.t)
    return {"s": a.s, "t": a.t, "N": cover_level(a.s),
            "windows": [{"a": w.a, "S": list(w.S), "T": list(w.Tw),
                         "in_S": w.contains(a.t, "S")} for w in wins],
            "all_windows": [str(w.a) for w in all_windows(a.s)],
            "weights": {str(x): w for x, w in d2_partition_weights(a.s, a.t)}}, True


def _ratio_grid(a):
    custom = (a.r_values, a.s_values, a.t_values)
    if any(v is not None for v in custom):
        if any(v is None for v in custom):
            raise UsageError("--r-values, --s-values and --t-values go together")
        grid = GridSpec(tuple(a.r_values), tuple(a.s_values), tuple(a.t_values))
    else:
        grid = preset_grid(a.grid)
    n = len(grid.r_values) * len(grid.s_values) * len(grid.t_values)
    if n > MAX_POINTS:
        raise UsageError(f"grid has {n} points, cap is {MAX_POINTS}")
    if not grid.points():
        raise UsageError("grid has no points with r >= s")
    return grid


def cmd_verify_bound(a):
    grid = _ratio_grid(a)
    rep = ratio_sweep(as_k(a.k), grid, DEFAULT_CONFIG, bracket=(a.lower, a.upper),
                      spread_bound=a.spread, method=a.method, keep_rows=a.format == "csv",
                      threads=a.threads)
    return rep, rep.passed


def cmd_verify_signs(a):
    k = as_k(a.k)
    rp = derive_params(k)
    if a.glued:
        if a.region not in STAGES:
            raise UsageError(f"with --glued, --region must be one of {', '.join(STAGES)}")
        n = GLUED_AXIS[a.grid]
        grid = strip_points(a.region, k, rp, n)
    else:
        if a.region not in REGION_NAMES:
            raise UsageError(f"--region must be one of {', '.join(REGION_NAMES)}")
        n = SIGN_AXIS[a.grid]
        if n ** 3 > MAX_POINTS:
            raise UsageError("grid exceeds the point cap")
        grid = region_points(a.region, rp, n)
    rep = sign_sweep(a.region, a.sign, k, rp, grid=grid, c=a.c, tol=a.tol,
                     d2_convention=a.d2_convention, glued=a.glued, threads=a.threads)
    return rep, rep.passed


def cmd_crosscheck(a):
    cc = oracle_crosscheck(as_k(a.k), _point(a))
    if len(cc.values) < 2:
        raise UsageError(f"fewer than two methods apply here: {cc.errors}")
    ok = cc.max_rel_dev <= a.tol
    return {"check": cc, "tolerance": a.tol, "passed": ok}, ok


def cmd_mc(a):
    mc = McConfig(n_paths=a.n_paths, dt=a.dt, seed=a.seed, allow_small=a.allow_small)
    rep = mc_density_check(as_k(a.k), a.r0, a.t, mc, margin=a.margin)
    ok = rep.passed and rep.mean_ok
    return rep, ok


def cmd_report(a):
    """Smoke-scale campaign for one k: bound, every region sign, one cross-check."""
    k = as_k(a.k)
    rp = derive_params(k)
    bound = ratio_sweep(k, preset_grid(a.grid), threads=a.threads)
    n = SIGN_AXIS[a.grid]
    signs = {}
    for lab in REGION_NAMES:
        pts = region_points(lab, rp, n)
        for sg, name in (("+", "plus"), ("-", "minus")):
            signs[f"{lab}/{name}"] = sign_sweep(lab, sg, k, rp, grid=pts, threads=a.threads)
    cc = oracle_crosscheck(k, (1.0, 0.5, 1.0))
    cc_ok = cc.max_rel_dev <= 0.01
    ok = bound.passed and all(r.passed for r in signs.values()) and cc_ok
    return {"k": k, "params": rp, "bound": bound, "signs": signs,
            "crosscheck": cc, "crosscheck_passed": cc_ok, "passed": ok}, ok


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p, csv_ok=False):
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", default="json", choices=["json", "csv"] if csv_ok else ["json"],
                   help="report format" + (" (csv writes one row per grid point)" if csv_ok else ""))
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: all cores; HK_THREADS overrides)")


def _add_point(p, required=True):
    p.add_argument("--r", type=_nonneg, required=required)
    p.add_argument("--s", type=_nonneg, required=required)
    p.add_argument("--t", type=_positive, required=required)


def build_parser():
    ap = _Parser(prog="a1heat", description="Rank-one W-invariant heat kernel: evaluation and checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate h(r, s, t)")
    p.add_argument("--k", type=_positive, required=True)
    _add_point(p)
    p.add_argument("--method", default="auto", choices=["auto", "spectral", "closed", "pde"])
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phi", help="evaluate the spherical function phi_lambda(r)")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--lam", type=_nonneg, required=True)
    p.add_argument("--r", type=_nonneg, required=True)
    p.add_argument("--validate", action="store_true", help="compare against the ODE solution")
    _add_common(p)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("envelope", help="evaluate the two-sided envelope E(r, s, t)")
    p.add_argument("--k", type=_positive, required=True)
    _add_point(p)
    p.add_argument("--phi0-form", action="store_true", help="also give the phi_0 based form")
    _add_common(p)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("regions", help="derived region constants, membership, grid presets")
    p.add_argument("--k", type=_positive)
    _add_point(p, required=False)
    p.add_argument("--show-presets", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("cover", help="time windows covering [s, s^2] at (s, t)")
    p.add_argument("--s", type=_positive, required=True)
    p.add_argument("--t", type=_positive, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("verify-bound", help="sweep h/E over a grid")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--grid", default="default", choices=sorted(PRESETS))
    p.add_argument("--r-values", type=_float_list, help="comma list (with --s-values, --t-values)")
    p.add_argument("--s-values", type=_float_list)
    p.add_argument("--t-values", type=_float_list)
    p.add_argument("--method", default="auto", choices=["auto", "spectral", "closed", "pde"])
    p.add_argument("--lower", type=_positive, default=1e-3)
    p.add_argument("--upper", type=_positive, default=1e3)
    p.add_argument("--spread", type=_positive, default=1e6)
    _add_common(p, csv_ok=True)
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("verify-signs", help="sign of D h for a region comparison function")
    p.add_argument("--region", required=True,
                   help=f"one of {', '.join(REGION_NAMES)}; with --glued one of {', '.join(STAGES)}")
    p.add_argument("--sign", type=_sign, required=True, help="plus (D h >= 0) or minus (D h <= 0)")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--grid", default="default", choices=sorted(SIGN_AXIS))
    p.add_argument("--c", type=_positive, help="override the constant (default: guaranteed threshold)")
    p.add_argument("--tol", type=_positive, default=1e-8)
    p.add_argument("--glued", action="store_true", help="check a glued stage on its transition strip")
    p.add_argument("--d2-convention", default="signed", choices=["signed", "swapped"])
    _add_common(p)
    p.set_defaults(func=cmd_verify_signs)

    p = sub.add_parser("crosscheck", help="compare spectral, PDE and closed-form values")
    p.add_argument("--k", type=_positive, required=True)
    _add_point(p)
    p.add_argument("--tol", type=_positive, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("mc", help="Monte Carlo check of the transition density")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--r0", type=_positive, default=1.0)
    p.add_argument("--t", type=_positive, default=0.5)
    p.add_argument("--n-paths", type=int, default=100_000)
    p.add_argument("--dt", type=_positive, default=5e-4)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--margin", type=_nonneg, default=0.0)
    p.add_argument("--allow-small", action="store_true", help="permit fewer than 10^4 paths")
    _add_common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("report", help="bound, sign and cross-check campaign for one k")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--grid", default="smoke", choices=sorted(PRESETS))
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return ap


def run(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.threads = resolve_threads(args.threads)
        report, passed = args.func(args)
        report_write(report, args.out, args.format)
    except (A1HeatError, ValueError) as exc:
        print(f"a1heat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if passed else EXIT_FAILED


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
