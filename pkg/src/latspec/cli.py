"""Command-line entry point: reproducible batch runs over the pipeline.

Every subcommand validates its options fully before the first Green
evaluation, writes one JSON report (CSV for sweeps), and exits with
0 = ok, 2 = validation error, 3 = numerical-quality flags raised.
Reports are deterministic for a fixed config apart from the timestamp.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
from typing import Optional

from . import _util
from ._util import complex_to_json, json_sanitize, parse_complex, thread_count
from .lattice import Potential, brute_force_moments, quasi_norm, trace_moments
from .resolvent import green_auto, green_boundary, green_time, green_torus
from .determinant import QuadPolicy, det_eval, moment_relation_check, taylor_coeffs
from .zeros import coupling_threshold, find_zeros
from .hardy import boundary_trace, jensen_check, outer_reconstruct, trace_residuals
from .bounds import check_bounds, real_case_report
from . import bessel

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ValidationError(ValueError):
    """Bad config or precondition, detected before any computation."""


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_json(report: dict, out_path: Optional[str]) -> None:
    report = dict(report)
    report["generated_at"] = _timestamp()
    text = json.dumps(json_sanitize(report), sort_keys=True, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load_potential(path: str) -> Potential:
    if not path:
        raise ValidationError("a --potential file is required for this command")
    try:
        return Potential.from_file(path)
    except FileNotFoundError:
        raise ValidationError(f"potential file not found: {path}")
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ValidationError(f"invalid potential file {path}: {exc}")


def _parse_site(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ValidationError(f"site must be comma-separated integers, got {text!r}")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


# ---------------------------------------------------------------------------
# subcommand handlers; each returns (report dict, flags list)


def _cmd_green(args) -> tuple:
    d = args.d
    _require(d >= 1, "--d must be >= 1")
    lam = parse_complex(args.lam)
    site = _parse_site(args.site)
    _require(len(site) == d, f"site length {len(site)} != d={d}")
    if args.n_quad is not None:
        _require(args.n_quad >= 4 and args.n_quad % 2 == 0, "--n-quad must be even, >= 4")
    method = args.method
    if method == "torus":
        g = green_torus(site, lam, d, n_quad=args.n_quad)
    elif method == "time":
        g = green_time(site, lam, d)
    elif method == "auto":
        g = green_auto(site, lam, d)
    elif method in ("boundary-plus", "boundary-minus"):
        _require(abs(lam.imag) < 1e-12, "boundary evaluation takes a real lambda0")
        side = "plus" if method.endswith("plus") else "minus"
        g = green_boundary(site, lam.real, side, d)
    else:
        raise ValidationError(f"unknown method {method!r}")
    report = {
        "command": "green",
        "d": d,
        "lambda": complex_to_json(lam),
        "site": list(site),
        "method": method,
        "value": complex_to_json(g.value),
        "err_estimate": g.err_estimate,
    }
    flags = ["err_estimate not finite"] if not math.isfinite(g.err_estimate) else []
    return report, flags


def _cmd_det_eval(args) -> tuple:
    V = _load_potential(args.potential)
    z = parse_complex(args.z)
    _require(abs(z) <= 1.0 + 1e-12, "--z must lie in the closed unit disc")
    policy = QuadPolicy(boundary_method=args.boundary_method)
    smp = det_eval(V, z, policy)
    report = {
        "command": "det-eval",
        "z": complex_to_json(z),
        "value": complex_to_json(smp.value),
        "err_estimate": smp.err_estimate,
        "potential": args.potential,
    }
    return report, []


def _cmd_taylor_check(args) -> tuple:
    V = _load_potential(args.potential)
    _require(0.0 < args.r < 1.0, "--r must lie in (0, 1)")
    _require(args.n_max >= 1, "--n-max must be >= 1")
    m_samples = args.m_samples if args.m_samples else max(64, 8 * args.n_max)
    _require(m_samples >= 8 * args.n_max, "--m-samples must be >= 8 * n_max")
    tc = taylor_coeffs(V, args.r, args.n_max, m_samples)
    report = {
        "command": "taylor-check",
        "r": tc.r,
        "c": [complex_to_json(c) for c in tc.c],
        "err_estimate": tc.err_estimate,
    }
    flags = []
    if args.n_max >= 4:
        rel = moment_relation_check(V, tc)
        report["moment_relations"] = rel
        report["winner"] = rel["winner"]
        if rel["winner"] == "none":
            flags.append("no moment relation matched the Cauchy coefficients")
        mom = trace_moments(V)
        brute = brute_force_moments(V, n_max=4)
        report["moments_closed_form"] = [
            complex_to_json(v) for v in (mom.d1, mom.d2, mom.d3, mom.d4)
        ]
        report["moments_brute_force"] = [complex_to_json(v) for v in brute]
        report["moments_max_diff"] = max(
            abs(a - b) for a, b in zip((mom.d1, mom.d2, mom.d3, mom.d4), brute)
        )
    return report, flags


def _cmd_eigs(args) -> tuple:
    V = _load_potential(args.potential)
    _require(0.0 < args.r_outer <= 1.0 - 1e-3, "--r-outer must lie in (0, 1 - 1e-3]")
    _require(args.tol > 0.0, "--tol must be positive")
    recs = find_zeros(V, args.r_outer, args.tol)
    report = {
        "command": "eigs",
        "r_outer": args.r_outer,
        "tol": args.tol,
        "zeros": [
            {
                "z": complex_to_json(r.z),
                "lambda": complex_to_json(r.lam),
                "multiplicity": r.multiplicity,
                "residual": r.residual,
                "newton_radius": r.newton_radius,
            }
            for r in recs
        ],
    }
    flags = [
        f"zero at z={r.z} has residual {r.residual:.2e}"
        for r in recs
        if r.residual > 1e3 * args.tol
    ]
    return report, flags


def _pipeline(V: Potential, n_grid: int, r_outer: float, tol: float, n_max: int, taylor_r: float):
    zeros = find_zeros(V, r_outer, tol)
    bt = boundary_trace(V, n_grid)
    r0 = min((abs(r.z) for r in zeros), default=1.0)
    r_taylor = taylor_r if taylor_r else min(0.3, 0.5 * r0)
    tc = taylor_coeffs(V, r_taylor, n_max, max(64, 8 * n_max))
    return zeros, bt, tc


def _cmd_trace_check(args) -> tuple:
    V = _load_potential(args.potential)
    _require(args.n_grid >= 256 and args.n_grid & (args.n_grid - 1) == 0,
             "--n-grid must be a power of two >= 256")
    _require(0.0 < args.r_outer <= 1.0 - 1e-3, "--r-outer must lie in (0, 1 - 1e-3]")
    _require(args.tol > 0.0, "--tol must be positive")
    _require(args.n_max >= 1, "--n-max must be >= 1")
    try:
        r_list = [float(x) for x in args.r_list.split(",") if x]
    except ValueError:
        raise ValidationError(f"bad --r-list {args.r_list!r}")
    _require(all(0.0 < r < 1.0 - 1e-3 for r in r_list), "jensen radii must lie in (0, 1 - 1e-3)")

    zeros, bt, tc = _pipeline(V, args.n_grid, args.r_outer, args.tol, args.n_max, args.taylor_r)
    resid = trace_residuals(V, zeros, bt, tc)
    jensen = [
        {"r": r, "residual": jensen_check(V, zeros, r, n_grid=args.jensen_grid)}
        for r in r_list
    ]
    probes = [0.3, -0.45 + 0.2j, 0.6j, -0.7j, 0.85, -0.85]
    outer = outer_reconstruct(V, bt, zeros, probes)
    report = {
        "command": "trace-check",
        "n_grid": args.n_grid,
        "I0": bt.I0,
        "B0": resid["B0"],
        "rho0": resid["rho0"],
        "rho": [complex_to_json(r) for r in resid["rho"]],
        "t52": resid["t52"],
        "ratio_rho1": resid["ratio_rho1"],
        "jensen": jensen,
        "outer_error": outer["max_rel_err"],
        "zeros": [complex_to_json(r.z) for r in zeros],
        "taylor_r": tc.r,
        "flagged_points": len([k for k in bt.flagged if k >= 0]),
        "low_confidence": bt.low_confidence,
    }
    flags = []
    if bt.low_confidence:
        flags.append("boundary trace low-confidence (> 5% flagged points)")
    if resid["rho0"] < -1e-6:
        flags.append(f"rho0 = {resid['rho0']:.3e} below -1e-6")
    return report, flags


def _cmd_bounds_report(args) -> tuple:
    V = _load_potential(args.potential)
    _require(args.n_grid >= 256 and args.n_grid & (args.n_grid - 1) == 0,
             "--n-grid must be a power of two >= 256")
    _require(0.0 < args.r_outer <= 1.0 - 1e-3, "--r-outer must lie in (0, 1 - 1e-3]")
    _require(args.tol > 0.0, "--tol must be positive")
    zeros = find_zeros(V, args.r_outer, args.tol)
    bt = boundary_trace(V, args.n_grid)
    rep = check_bounds(V, zeros, bt)
    report = {
        "command": "bounds-report",
        "blaschke_sum": rep.blaschke_sum,
        "neg_b0": rep.neg_b0,
        "exact_pass": rep.exact_pass,
        "quasi_norm": rep.quasi_norm,
        "rho0": rep.rho0,
        "c_emp_log": rep.c_emp_log,
        "im_branch": rep.im_branch,
        "pos_branch": rep.pos_branch,
        "skipped": rep.skipped,
    }
    if V.is_real():
        report["real_case"] = real_case_report(V, zeros, bt)
    flags = [] if rep.exact_pass else ["exact inequality sum(1-|z_j|) <= -B0 failed"]
    if rep.rho0 < -1e-6:
        flags.append(f"rho0 = {rep.rho0:.3e} below -1e-6")
    return report, flags


def _cmd_bessel_check(args) -> tuple:
    _require(args.t_max > 0, "--t-max must be positive")
    _require(args.m_max >= 1, "--m-max must be >= 1")
    rng_m = (1, args.m_max)
    rng_t = (1.0, args.t_max)
    unif = bessel.check_uniform_bound(args.eps, m_range=rng_m, t_range=rng_t)
    beta = bessel.beta_estimate(3, m_max=min(args.m_max, 200), T=args.beta_T)
    # classic cross-checks at a few pinned arguments
    sq_sum = float(sum(bessel.bessel_j(n, 3.7) ** 2 for n in range(-60, 61)))
    worst_int = 0.0
    for m, t in ((0, 1.0), (3, 15.0), (7, 80.0), (2, 500.0), (40, 200.0)):
        worst_int = max(
            worst_int, abs(bessel.bessel_j(m, t) - bessel.integral_representation(m, t))
        )
    report = {
        "command": "bessel-check",
        "uniform_bound": unif,
        "beta_d3": beta,
        "normalization_residual": abs(sq_sum - 1.0),
        "integral_representation_worst": worst_int,
    }
    flags = []
    if abs(sq_sum - 1.0) > 1e-12:
        flags.append("squared-sum normalization residual above 1e-12")
    if worst_int > 1e-10:
        flags.append("integral representation residual above 1e-10")
    return report, flags


def _cmd_sweep(args) -> tuple:
    V = _load_potential(args.potential)
    try:
        lo, hi, num = args.scale_grid.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise ValidationError(f"--scale-grid must be lo:hi:num, got {args.scale_grid!r}")
    _require(num >= 1 and hi >= lo > 0.0, "--scale-grid must satisfy 0 < lo <= hi, num >= 1")
    _require(args.n_grid >= 256 and args.n_grid & (args.n_grid - 1) == 0,
             "--n-grid must be a power of two >= 256")
    _require(args.out is not None, "sweep requires -o/--out for the CSV file")

    rows = []
    flags = []
    for k in range(num):
        t = lo + (hi - lo) * k / max(num - 1, 1)
        Vt = V.scale(t)
        zeros = find_zeros(Vt, args.r_outer, args.tol)
        bt = boundary_trace(Vt, args.n_grid)
        rep = check_bounds(Vt, zeros, bt)
        z1 = zeros[0].z if zeros else 0.0
        lam1 = zeros[0].lam if zeros else 0.0
        rows.append(
            {
                "scale": t,
                "quasi_norm": rep.quasi_norm,
                "n_zeros": sum(r.multiplicity for r in zeros),
                "z1_re": z1.real if zeros else "",
                "z1_im": z1.imag if zeros else "",
                "lambda1_re": lam1.real if zeros else "",
                "lambda1_im": lam1.imag if zeros else "",
                "blaschke_sum": rep.blaschke_sum,
                "neg_b0": rep.neg_b0,
                "rho0": rep.rho0,
                "c_emp_log": rep.c_emp_log,
                "exact_pass": rep.exact_pass,
            }
        )
        if not rep.exact_pass:
            flags.append(f"exact inequality failed at scale {t}")
    fieldnames = list(rows[0].keys())
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return {"command": "sweep", "rows": len(rows), "out": args.out}, flags


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    # global options live on a parent parser too so they may be given
    # before or after the subcommand name; SUPPRESS keeps the subparser
    # from clobbering a value parsed before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON file with defaults for the subcommand options")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (default: LATSPEC_THREADS or 1)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="recorded in the report")

    p = argparse.ArgumentParser(
        prog="latspec",
        parents=[common],
        description="Lattice Schrodinger spectral toolbox: Green functions, "
        "determinants, eigenvalues, trace identities.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("green", help="one Green-function value", parents=[common])
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--lambda", dest="lam", required=True, help="'re,im'")
    g.add_argument("--site", required=True, help="comma-separated integers")
    g.add_argument("--method", default="auto",
                   choices=["auto", "torus", "time", "boundary-plus", "boundary-minus"])
    g.add_argument("--n-quad", type=int, default=None)
    g.add_argument("-o", "--out")

    de = sub.add_parser("det-eval", help="one determinant sample", parents=[common])
    de.add_argument("-p", "--potential", required=True)
    de.add_argument("--z", required=True, help="'re,im'")
    de.add_argument("--boundary-method", default="time", choices=["time", "extrapolated"])
    de.add_argument("-o", "--out")

    tc = sub.add_parser("taylor-check", help="Taylor coefficients + moment relations", parents=[common])
    tc.add_argument("-p", "--potential", required=True)
    tc.add_argument("--r", type=float, required=True)
    tc.add_argument("--n-max", type=int, default=4)
    tc.add_argument("--m-samples", type=int, default=None)
    tc.add_argument("-o", "--out")

    ei = sub.add_parser("eigs", help="all disc zeros / eigenvalues", parents=[common])
    ei.add_argument("-p", "--potential", required=True)
    ei.add_argument("--r-outer", type=float, default=1.0 - 1e-3)
    ei.add_argument("--tol", type=float, default=1e-10)
    ei.add_argument("-o", "--out")

    tr = sub.add_parser("trace-check", help="trace-identity residual report", parents=[common])
    tr.add_argument("-p", "--potential", required=True)
    tr.add_argument("--n-grid", type=int, default=256)
    tr.add_argument("--r-list", default="0.5,0.8,0.95")
    tr.add_argument("--jensen-grid", type=int, default=1024)
    tr.add_argument("--r-outer", type=float, default=1.0 - 1e-3)
    tr.add_argument("--tol", type=float, default=1e-10)
    tr.add_argument("--n-max", type=int, default=4)
    tr.add_argument("--taylor-r", type=float, default=None)
    tr.add_argument("-o", "--out")

    br = sub.add_parser("bounds-report", help="eigenvalue-sum estimates", parents=[common])
    br.add_argument("-p", "--potential", required=True)
    br.add_argument("--n-grid", type=int, default=256)
    br.add_argument("--r-outer", type=float, default=1.0 - 1e-3)
    br.add_argument("--tol", type=float, default=1e-10)
    br.add_argument("-o", "--out")

    bc = sub.add_parser("bessel-check", help="Bessel cross-validation suite", parents=[common])
    bc.add_argument("--eps", type=float, default=1e-10)
    bc.add_argument("--m-max", type=int, default=200)
    bc.add_argument("--t-max", type=float, default=400.0)
    bc.add_argument("--beta-T", type=float, default=1000.0)
    bc.add_argument("-o", "--out")

    sw = sub.add_parser("sweep", help="coupling sweep, CSV output", parents=[common])
    sw.add_argument("-p", "--potential", required=True)
    sw.add_argument("--scale-grid", required=True, help="lo:hi:num")
    sw.add_argument("--n-grid", type=int, default=256)
    sw.add_argument("--r-outer", type=float, default=1.0 - 1e-3)
    sw.add_argument("--tol", type=float, default=1e-9)
    sw.add_argument("-o", "--out")

    return p


_HANDLERS = {
    "green": _cmd_green,
    "det-eval": _cmd_det_eval,
    "taylor-check": _cmd_taylor_check,
    "eigs": _cmd_eigs,
    "trace-check": _cmd_trace_check,
    "bounds-report": _cmd_bounds_report,
    "bessel-check": _cmd_bessel_check,
    "sweep": _cmd_sweep,
}


def _apply_config(args, parser, argv: "list[str]") -> None:
    if not args.config:
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {args.config}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    # config supplies defaults; explicit command-line flags win
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in ("command", "config"):
            continue
        if not hasattr(args, attr):
            raise ValidationError(f"config key {key!r} is not an option of {args.command!r}")
        if attr not in given:
            setattr(args, attr, value)


def main(argv: Optional[list] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    # the shared options use SUPPRESS so a pre-subcommand value survives the
    # subparser pass; fill the fallbacks here instead of via set_defaults
    for attr, fallback in (("config", None), ("threads", None), ("seed", 0)):
        if not hasattr(args, attr):
            setattr(args, attr, fallback)
    try:
        _apply_config(args, parser, argv)
        _util.set_default_threads(thread_count(args.threads))
        handler = _HANDLERS[args.command]
        report, flags = handler(args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except (ValueError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except RuntimeError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    # thread count is intentionally not recorded: reports must be identical
    # across worker counts, differing only in the timestamp
    report["seed"] = args.seed
    report["flags"] = flags
    _write_json(report, getattr(args, "out", None) if args.command != "sweep" else None)
    return EXIT_NUMERICAL if flags else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
