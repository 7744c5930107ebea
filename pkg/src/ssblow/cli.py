"""Command-line front end for the blow-up profile toolkit.

Subcommands: params, classify, sigma-star, profile, verify, sweep.
Exit codes: 0 success, 2 usage or configuration error, 3 numerically
inconclusive outcome, 4 verification violation.  Option precedence is
flags > config file (key=value lines) > built-in defaults; every emitted
file is byte-stable given the same configuration and seed.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .params import (
    ParameterError,
    DomainError,
    derive_exponents,
    interface_xi_of_lambda,
    lambda_range,
    p2_coordinates,
    validate_params,
)
from .integrate import IntegrationControls
from .orbits import (
    BracketError,
    FateKind,
    InconclusiveError,
    run_p0_orbit,
    run_p2_orbit,
    run_q1_orbit,
    sigma_star,
)
from .profiles import (
    InconclusiveProfile,
    ProfileBracketError,
    find_good_profile_P1,
    integrate_ssode,
    reconstruct_profile,
    ssode_residual,
)
from .barriers import ConfigurationError, barrier_catalog, verify_barrier
from . import io as io_mod

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
EXIT_VIOLATION = 4

_SIGMA_FLOOR = 2.0 + 1e-3  # refuse nearly-degenerate exponents on the CLI


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("config line without '=': %r" % line)
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """flags > config file > defaults."""
    if not getattr(args, "config", None):
        return args
    file_vals = _read_config_file(args.config)
    for key, raw in file_vals.items():
        if not hasattr(args, key):
            raise ValueError("unknown config key %r" % key)
        default = parser.get_default(key)
        if getattr(args, key) == default:  # flag not supplied
            cur = getattr(args, key)
            if isinstance(cur, bool) or isinstance(default, bool):
                val = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int) and default is not None:
                val = int(raw)
            elif isinstance(default, float) and default is not None:
                val = float(raw)
            else:
                val = raw
            setattr(args, key, val)
    return args


def _controls_from(args) -> IntegrationControls:
    return IntegrationControls(
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        max_step=args.max_step,
        max_time=args.max_time,
    )


def _validated(args):
    if args.sigma < _SIGMA_FLOOR:
        raise ParameterError(
            "sigma must exceed 2 (at least %.3f on the command line)" % _SIGMA_FLOOR
        )
    return validate_params(args.m, args.sigma)


def _report_skeleton(command: str, config: dict) -> dict:
    return {
        "schema": 1,
        "tool": "ssblow",
        "version": __version__,
        "command": command,
        "config": config,
        "results": {},
        "warnings": [],
    }


def _emit(report: dict, args, wall_time: float) -> None:
    if getattr(args, "format", "text") == "json":
        # wall time is reported on the human channel only; emitted payloads
        # stay byte-stable for identical (config, seed, version)
        sys.stdout.write(io_mod.dump_report(report))
        return
    res = report["results"]
    print("[%s] ssblow %s (%.2fs)" % (report["command"], report["version"], wall_time))
    for key, val in res.items():
        print("  %s: %s" % (key, val))
    for w in report["warnings"]:
        print("  warning: %s" % w)


def _add_common(p: argparse.ArgumentParser, sigma=True):
    p.add_argument("--m", type=float, required=True, help="diffusion exponent, 1 < m < 2")
    if sigma:
        p.add_argument("--sigma", type=float, required=True, help="weight exponent, sigma > 2")
    p.add_argument("--config", type=str, default=None, help="key=value config file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", dest="abs_tol", type=float, default=1e-12)
    p.add_argument("--max-step", dest="max_step", type=float, default=0.1)
    p.add_argument("--max-time", dest="max_time", type=float, default=1e4)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ssblow",
        description="Self-similar blow-up profiles of u_t=(u^m)_xx+|x|^sigma u^p at m+p=2",
    )
    ap.add_argument("--version", action="version", version="ssblow " + __version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("params", help="echo derived constants")
    _add_common(p)

    p = sub.add_parser("classify", help="launch an orbit and classify its fate")
    _add_common(p)
    p.add_argument("--source", choices=("p2", "p0", "q1"), default="p2")
    p.add_argument("--delta", type=float, default=1e-6, help="launch offset")
    p.add_argument("--K", type=float, default=0.1, help="center-family parameter (p0)")
    p.add_argument("--z0", type=float, default=1e-5, help="launch height z0 (p0) or chart z (q1)")
    p.add_argument("--out", type=str, default=None, help="trajectory CSV path")

    p = sub.add_parser("sigma-star", help="bisect the critical sigma of the P2 orbit")
    _add_common(p, sigma=False)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-3)

    p = sub.add_parser("profile", help="compute a profile f(xi) and its interface data")
    _add_common(p)
    p.add_argument("--origin", choices=("p2", "p1", "p0"), default="p2")
    p.add_argument("--a", type=float, default=None, help="f(0) for origin p1")
    p.add_argument(
        "--a-bracket", dest="a_bracket", type=float, nargs=2, default=None,
        help="bisect f(0) between differing fates",
    )
    p.add_argument("--a-tol", dest="a_tol", type=float, default=None)
    p.add_argument("--K", type=float, default=0.05, help="tail coefficient for origin p0")
    p.add_argument("--xi-start", dest="xi_start", type=float, default=1e-4)
    p.add_argument("--via", choices=("ode", "phase"), default="ode",
                   help="direct profile-equation integration or phase-space reconstruction")
    p.add_argument("--out", type=str, default=None, help="profile CSV path")

    p = sub.add_parser("verify", help="verify barrier sign claims by seeded sampling")
    _add_common(p)
    p.add_argument("--all", action="store_true")
    p.add_argument("--barrier", action="append", default=None, help="barrier id (repeatable)")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", type=str, default=None, help="verification JSON path")

    p = sub.add_parser("sweep", help="classify the P2 orbit across a sigma grid")
    _add_common(p, sigma=False)
    p.add_argument("--sigmas", type=str, required=True, help="comma-separated sigma grid")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=str, default=None, help="sweep CSV path")
    return ap


# ---------------------------------------------------------------------------
# command bodies
# ---------------------------------------------------------------------------


def _cmd_params(args) -> tuple[int, dict]:
    pr = _validated(args)
    exp = derive_exponents(pr)
    p2 = p2_coordinates(pr)
    lo, _ = lambda_range(pr)
    report = _report_skeleton("params", {"m": pr.m, "sigma": pr.sigma})
    report["results"] = {
        "m": pr.m,
        "p": pr.p,
        "sigma": pr.sigma,
        "alpha": exp.alpha,
        "beta": exp.beta,
        "xi_max": exp.xi_max,
        "z_max": exp.z_max,
        "P2": [float(p2[0]), float(p2[1]), float(p2[2])],
        "parabola_lambda_range": [lo, 0.0],
        "vertex_lambda": lo / 2.0,
    }
    return EXIT_OK, report


def _fate_payload(fate) -> dict:
    return {
        "fate": fate.kind,
        "lambda_hat": fate.lambda_hat,
        "entry_point": None if fate.entry_point is None else [float(v) for v in fate.entry_point],
        "diagnostics": {
            "termination": fate.diagnostics.get("termination"),
            "n_steps": fate.diagnostics.get("n_steps"),
            "final_eta": fate.diagnostics.get("final_eta"),
            "events": fate.diagnostics.get("events", []),
        },
    }


def _cmd_classify(args) -> tuple[int, dict]:
    pr = _validated(args)
    controls = _controls_from(args)
    config = {
        "m": pr.m, "sigma": pr.sigma, "source": args.source,
        "delta": args.delta, "K": args.K, "z0": args.z0,
    }
    report = _report_skeleton("classify", config)
    if args.source == "p2":
        traj, fate = run_p2_orbit(pr, controls, delta=args.delta)
    elif args.source == "p0":
        traj, fate = run_p0_orbit(args.K, args.z0, pr, controls)
    else:
        chart_traj, traj, fate = run_q1_orbit(
            pr, delta=args.delta, z0=args.z0, controls=controls
        )
        if traj is None:
            traj = chart_traj
    report["results"] = _fate_payload(fate)
    if fate.lambda_hat is not None:
        report["results"]["xi0"] = interface_xi_of_lambda(fate.lambda_hat, pr)
    if args.out:
        io_mod.write_trajectory_csv(args.out, traj)
        report["results"]["trajectory_csv"] = args.out
    if fate.kind == FateKind.INCONCLUSIVE:
        report["warnings"].append("orbit fate is inconclusive: %s" % fate.diagnostics.get("reason", fate.diagnostics.get("termination")))
        return EXIT_INCONCLUSIVE, report
    return EXIT_OK, report


def _cmd_sigma_star(args) -> tuple[int, dict]:
    if min(args.lo, args.hi) < _SIGMA_FLOOR:
        raise ParameterError(
            "sigma must exceed 2: bracket must stay above %.3f" % _SIGMA_FLOOR
        )
    controls = _controls_from(args)
    config = {"m": args.m, "lo": args.lo, "hi": args.hi, "tol": args.tol}
    report = _report_skeleton("sigma-star", config)
    res = sigma_star(args.m, (args.lo, args.hi), args.tol, controls)
    report["results"] = {
        "sigma_star": res.sigma_star,
        "bracket": [res.bracket[0], res.bracket[1]],
        "iterations": res.iterations,
        "fate_lo": res.fate_at_ends[0].kind,
        "fate_hi": res.fate_at_ends[1].kind,
        "evaluations": [
            {"sigma": s, "budget": b, "fate": k, "lambda_hat": lam}
            for (s, b, k, lam) in res.evaluations
        ],
    }
    return EXIT_OK, report


def _cmd_profile(args) -> tuple[int, dict]:
    pr = _validated(args)
    controls = _controls_from(args)
    config = {
        "m": pr.m, "sigma": pr.sigma, "origin": args.origin, "via": args.via,
        "a": args.a, "a_bracket": args.a_bracket, "K": args.K, "xi_start": args.xi_start,
    }
    report = _report_skeleton("profile", config)
    warnings = report["warnings"]

    if args.origin == "p2" and args.via == "phase":
        traj, fate = run_p2_orbit(pr, controls)
        frame = reconstruct_profile(traj, pr)
        results = {"fate": fate.kind, "lambda_hat": fate.lambda_hat, "n_samples": len(frame)}
        if fate.lambda_hat is not None:
            results["xi0"] = interface_xi_of_lambda(fate.lambda_hat, pr)
        if not fate.decisive:
            warnings.append("phase orbit inconclusive")
            report["results"] = results
            return EXIT_INCONCLUSIVE, report
    elif args.origin == "p1" and args.a_bracket is not None:
        tol = args.a_tol if args.a_tol is not None else 1e-3 * (args.a_bracket[1] - args.a_bracket[0])
        a_star, res = find_good_profile_P1(pr, tuple(args.a_bracket), tol, controls, xi_start=args.xi_start)
        frame = res.frame
        results = {
            "a_star": a_star, "fate": res.fate, "xi0": res.xi0, "g_slope": res.g_slope,
            "n_samples": len(frame),
        }
    else:
        res = integrate_ssode(
            args.origin, pr, controls, a=args.a, K=args.K, xi_start=args.xi_start
        )
        frame = res.frame
        results = {
            "fate": res.fate, "xi0": res.xi0, "g_slope": res.g_slope,
            "pressure_leg": res.pressure_leg, "n_samples": len(frame),
        }
        if res.report is not None:
            results["interface_slopes"] = [res.report.slope_minus, res.report.slope_plus]
            results["discriminant"] = res.report.discriminant
            results["matched_slope"] = res.report.matched_slope
    if len(frame) >= 5:
        results["ssode_residual"] = ssode_residual(frame, pr)
    if args.out:
        io_mod.write_profile_csv(args.out, frame)
        results["profile_csv"] = args.out
    report["results"] = results
    return EXIT_OK, report


def _cmd_verify(args) -> tuple[int, dict]:
    pr = _validated(args)
    config = {
        "m": pr.m, "sigma": pr.sigma, "n": args.n, "seed": args.seed,
        "barriers": args.barrier or "all",
    }
    report = _report_skeleton("verify", config)
    catalog = {spec.id: spec for spec in barrier_catalog(pr)}
    if args.barrier:
        unknown = [b for b in args.barrier if b not in catalog]
        if unknown:
            raise ConfigurationError(
                "unknown barrier id(s) %s; catalog: %s" % (unknown, sorted(catalog))
            )
        ids = args.barrier
    else:
        ids = sorted(catalog)
    entries = []
    any_violation = False
    for bid in ids:
        rep = verify_barrier(catalog[bid], pr, args.n, args.seed)
        any_violation |= not rep.passed
        entries.append(
            {
                "barrier": bid,
                "expected": rep.expected,
                "applicable": rep.applicable,
                "gate": {k: bool(v) if isinstance(v, (bool, np.bool_)) else v for k, v in rep.gate_info.items()},
                "samples_tested": rep.samples_tested,
                "n_violations": rep.n_violations,
                "worst_margin": rep.worst_margin,
            }
        )
    report["results"] = {"barriers": entries, "all_passed": not any_violation}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(io_mod.dump_report(report))
    return (EXIT_VIOLATION if any_violation else EXIT_OK), report


def _sweep_one(task):
    m, sigma, controls_kw = task
    pr = validate_params(m, sigma)
    _, fate = run_p2_orbit(pr, IntegrationControls(**controls_kw))
    lam = fate.lambda_hat
    xi0 = interface_xi_of_lambda(lam, pr) if lam is not None else None
    return sigma, fate.kind, lam, xi0


def _cmd_sweep(args) -> tuple[int, dict]:
    sigmas = [float(s) for s in args.sigmas.split(",") if s.strip()]
    if not sigmas:
        raise ParameterError("empty sigma grid")
    if min(sigmas) < _SIGMA_FLOOR:
        raise ParameterError(
            "sigma must exceed 2: grid must stay above %.3f" % _SIGMA_FLOOR
        )
    validate_params(args.m, sigmas[0])
    controls_kw = dict(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, max_step=args.max_step, max_time=args.max_time
    )
    config = {"m": args.m, "sigmas": sigmas, "jobs": args.jobs}
    report = _report_skeleton("sweep", config)
    tasks = [(args.m, s, controls_kw) for s in sigmas]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    rows.sort(key=lambda r: sigmas.index(r[0]))
    report["results"] = {
        "rows": [
            {"sigma": s, "fate": k, "lambda_hat": lam, "xi0": xi0} for (s, k, lam, xi0) in rows
        ]
    }
    inconclusive = [s for (s, k, _, _) in rows if k == FateKind.INCONCLUSIVE]
    if args.out:
        io_mod.write_sweep_csv(args.out, rows)
        report["results"]["sweep_csv"] = args.out
    if inconclusive:
        report["warnings"].append("inconclusive fates at sigma = %s" % inconclusive)
        return EXIT_INCONCLUSIVE, report
    return EXIT_OK, report


_COMMANDS = {
    "params": _cmd_params,
    "classify": _cmd_classify,
    "sigma-star": _cmd_sigma_star,
    "profile": _cmd_profile,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _merge_config(args, parser)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    t0 = time.time()
    try:
        code, report = _COMMANDS[args.cmd](args)
    except (ParameterError, DomainError, BracketError, ProfileBracketError,
            ConfigurationError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (InconclusiveError, InconclusiveProfile) as exc:
        print("inconclusive: %s" % exc, file=sys.stderr)
        return EXIT_INCONCLUSIVE
    _emit(report, args, time.time() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
