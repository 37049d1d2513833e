"""Command-line entry point.

Subcommands: validate, spectral, simulate, spine-check, solve-fkpp,
estimate, run, list.  Exit codes: 0 ok, 1 check failure, 2 usage error,
3 resource/sampling limit.  Worker count comes from MTBBM_WORKERS (default
1); results do not depend on it.  Type ids are 1-based on the command line
and in CSV output, matching model files.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import fkpp
from .errors import (
    DomainTooSmallError,
    InsufficientSamplesError,
    MtbbmError,
    ResourceLimitError,
)
from .extremal import (
    additive_martingale,
    conditional_exceedance,
    derivative_martingale,
    dppp_mean_functional,
    estimate_C_infinity,
    extremal_point_pattern,
    laplace_functional,
    limit_law_compare,
    m_infinity_samples,
    test_functions,
)
from .model_io import resolve_model
from .experiments import list_experiments, parse_config, run_experiment
from .reports import EstimatorReport
from .rng import generator_for
from .simulate import run_replicates, simulate_max, simulate_replicate
from .spectral import front, spectral_data
from .spine import NAMED_FUNCTIONALS, many_to_one_check
from .models import validate_model


def _write_csv(path, header, rows, fmt=repr):
    rows = [[fmt(v) if isinstance(v, float) else v for v in row] for row in rows]
    if path in (None, "-"):
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)


def _cmd_validate(args) -> int:
    spec = resolve_model(args.model)
    report = validate_model(spec)
    for msg in report.messages:
        print(msg)
    print(f"irreducible={report.irreducible} no_death={report.no_death} "
          f"pure_jump={report.pure_jump} moments_ok={report.moments_ok}")
    passed = report.ok_permissive if args.permissive else report.ok
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


def _cmd_spectral(args) -> int:
    spec = resolve_model(args.model)
    sd = spectral_data(spec, permissive=args.permissive)
    rows = [[j + 1, float(sd.g[j]), float(sd.h[j]), float(sd.mu[j])] for j in range(sd.d)]
    print(f"lambda_star = {sd.lambda_star!r}")
    print(f"sqrt_2_lambda = {sd.sqrt2lam!r}")
    _write_csv(args.out, ["type", "g", "h", "mu"], rows)
    return 0


def _cmd_simulate(args) -> int:
    spec = resolve_model(args.model)
    sd = spectral_data(spec, permissive=args.permissive)
    rows = []
    if args.stats:
        header = ["replicate", "t", "n_particles", "max", "min", "W", "M"]
        for idx in range(args.reps):
            snap = simulate_replicate(spec, sd, (0.0, args.start_type - 1), args.t,
                                      args.seed, idx, permissive=args.permissive)
            rows.append([idx, args.t, snap.size, float(snap.positions.max()),
                         float(snap.positions.min()),
                         additive_martingale(snap, sd), derivative_martingale(snap, sd)])
    else:
        header = ["replicate", "t", "type", "position"]
        for idx in range(args.reps):
            snap = simulate_replicate(spec, sd, (0.0, args.start_type - 1), args.t,
                                      args.seed, idx, permissive=args.permissive)
            rows.extend([idx, args.t, int(j) + 1, float(x)]
                        for j, x in zip(snap.types, snap.positions))
    _write_csv(args.out, header, rows)
    return 0


def _cmd_spine_check(args) -> int:
    spec = resolve_model(args.model)
    sd = spectral_data(spec)
    if args.H not in NAMED_FUNCTIONALS:
        print(f"unknown functional {args.H!r}; valid: {', '.join(sorted(NAMED_FUNCTIONALS))}",
              file=sys.stderr)
        return 2
    lhs, rhs = many_to_one_check(spec, sd, NAMED_FUNCTIONALS[args.H], args.t,
                                 args.reps, args.seed, start_type=args.start_type - 1)
    rows = [["branching", lhs.estimate, lhs.se, lhs.n, lhs.seed],
            ["spine", rhs.estimate, rhs.se, rhs.n, rhs.seed]]
    _write_csv(args.out, ["side", "estimate", "se", "n", "seed"], rows)
    gap = abs(lhs.estimate - rhs.estimate)
    tol = 3.0 * math.hypot(lhs.se, rhs.se)
    print(f"|branching - spine| = {gap:.5f} vs 3 SE = {tol:.5f}")
    return 0 if gap <= tol else 1


def _parse_ic(text: str, d: int):
    name, _, arg = text.partition(":")
    if name == "heaviside":
        return fkpp.heaviside_ic()
    if name == "typed-heaviside":
        return fkpp.typed_heaviside_ic(int(arg) - 1)
    if name == "constant":
        return fkpp.constant_ic(float(arg))
    if name in ("laplace", "truncated"):
        tf = dict(test_functions(d))
        parts = arg.split(",")
        phi = tf.get(parts[0])
        if phi is None:
            raise MtbbmError(f"unknown test function {parts[0]!r}; valid: {', '.join(tf)}")
        if name == "laplace":
            return fkpp.laplace_ic(phi)
        return fkpp.truncated_ic(phi, float(parts[1]))
    raise MtbbmError(
        f"unknown initial condition {text!r}; use heaviside, typed-heaviside:<type>, "
        "constant:<c>, laplace:<phi-name>, truncated:<phi-name>,<L>"
    )


def _cmd_solve_fkpp(args) -> int:
    spec = resolve_model(args.model)
    sd = spectral_data(spec, permissive=args.permissive)
    ic = _parse_ic(args.ic, spec.d)
    save = [float(s) for s in args.save_times.split(",")] if args.save_times else None
    sol = fkpp.solve(spec, sd, ic, t_end=args.t_end, dx=args.dx, dt=args.dt,
                     save_times=save, permissive=args.permissive)
    rows = []
    for k, t in enumerate(sol.times):
        for i in range(sol.d):
            rows.extend([float(t), float(x), i + 1, float(v)]
                        for x, v in zip(sol.x, sol.values[k, i]))
    _write_csv(args.out, ["t", "x", "type", "value"], rows, fmt=lambda v: f"{v:.17e}")
    print(f"max pre-clamp violation: {sol.max_violation:.3e}")
    return 0


def _cmd_estimate(args) -> int:
    spec = resolve_model(args.model)
    sd = spectral_data(spec)
    seed = args.seed
    rows = []
    if args.what in ("cinf", "cinf-typed"):
        rs = [float(r) for r in args.rs.split(",")]
        ic = fkpp.typed_heaviside_ic(args.i1 - 1) if args.what == "cinf-typed" else None
        rep = estimate_C_infinity(spec, sd, rs, ic=ic)
        for r, v in zip(rep.extra["rs"], rep.extra["values"]):
            rows.append([args.what, r, v, float("nan"), seed, rep.extra["stabilized"]])
        _write_csv(args.out, ["what", "r", "estimate", "se", "seed", "stabilized"], rows)
        return 0
    if args.what == "martingale":
        def both(s):
            return np.array([additive_martingale(s, sd), derivative_martingale(s, sd)])

        rep = run_replicates(spec, sd, (0.0, 0), args.t, args.reps, seed, both)
        rows = [["additive-W", args.t, float(rep.estimate[0]), float(rep.se[0]), args.reps, seed],
                ["derivative-M", args.t, float(rep.estimate[1]), float(rep.se[1]), args.reps, seed]]
        _write_csv(args.out, ["what", "t", "estimate", "se", "n", "seed"], rows)
        return 0
    if args.what == "overshoot":
        harv = conditional_exceedance(spec, sd, args.t, args.z, args.reps, seed,
                                      min_accepted=args.min_accepted)
        ov = harv.overshoots
        rows = [["overshoot-mean", args.t, float(ov.mean()),
                 float(ov.std(ddof=1) / math.sqrt(ov.shape[0])), int(ov.shape[0]), seed]]
        _write_csv(args.out, ["what", "t", "estimate", "se", "n_accepted", "seed"], rows)
        return 0
    if args.what == "limit-law":
        maxima = np.array([
            simulate_max(spec, (0.0, 0), args.t, generator_for(seed, idx))
            for idx in range(args.reps)
        ]) - front(args.t, sd)
        c_rep = estimate_C_infinity(spec, sd, [args.t / 2, args.t])
        minf, _ = m_infinity_samples(spec, sd, args.s_proxy, max(500, args.reps // 10), seed + 1)
        res = limit_law_compare(maxima, sd, float(c_rep.estimate), minf)
        rows = [["limit-law-sup-distance", args.t, res["sup_distance"], float("nan"),
                 args.reps, seed]]
        _write_csv(args.out, ["what", "t", "estimate", "se", "n", "seed"], rows)
        return 0
    if args.what == "dppp-check":
        c_rep = estimate_C_infinity(spec, sd, [args.t / 2, args.t])
        minf, _ = m_infinity_samples(spec, sd, args.s_proxy, 500, seed + 1)
        harv = conditional_exceedance(spec, sd, args.t - 1.0, 0.0,
                                      max(4000, args.reps), seed + 2, min_accepted=100)
        ok = True
        for name, phi in test_functions(spec.d):
            direct = np.empty(args.reps)
            for idx in range(args.reps):
                snap = simulate_replicate(spec, sd, (0.0, 0), args.t, seed + 3, idx)
                direct[idx] = laplace_functional(extremal_point_pattern(snap, sd).restrict(-5.0), phi)
            rep = dppp_mean_functional(phi, sd, float(c_rep.estimate), minf, harv.bank,
                                       -5.0, args.reps, seed + 4)
            gap = abs(float(direct.mean()) - rep.estimate)
            ok = ok and gap <= 0.05
            rows.append([name, args.t, float(direct.mean()), rep.estimate, gap, seed])
        _write_csv(args.out, ["phi", "t", "direct", "dppp", "gap", "seed"], rows)
        return 0 if ok else 1
    print(f"unknown estimator {args.what!r}", file=sys.stderr)
    return 2


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    result = run_experiment(cfg)
    for check in result.checks:
        status = "pass" if check.passed else "FAIL"
        print(f"[criterion {check.criterion}] {check.name}: {status} ({check.detail})")
    print(f"artifacts: {', '.join(result.files)}")
    if args.check and not result.ok:
        return 1
    return 0


def _cmd_list(_args) -> int:
    for name, desc in list_experiments():
        print(f"{name:24s} {desc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtbbm",
        description="Multitype branching Brownian motion laboratory: exact simulation, "
                    "F-KPP solver, and extremal-process estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--model", required=True,
                       help="builtin name (A, B, C) or path to a model file")
        if seed:
            p.add_argument("--seed", type=int, default=20240811)

    p = sub.add_parser("validate", help="check model assumptions")
    common(p, seed=False)
    p.add_argument("--permissive", action="store_true")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("spectral", help="print the eigentriple and invariant law")
    common(p, seed=False)
    p.add_argument("--permissive", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_spectral)

    p = sub.add_parser("simulate", help="simulate replicates, write particles or stats CSV")
    common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--start-type", type=int, default=1, help="1-based start type")
    p.add_argument("--stats", action="store_true",
                   help="one aggregated row per replicate instead of one row per particle")
    p.add_argument("--permissive", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("spine-check", help="many-to-one identity: branching vs spine")
    common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--H", default="ones", help=f"one of {', '.join(sorted(NAMED_FUNCTIONALS))}")
    p.add_argument("--start-type", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_spine_check)

    p = sub.add_parser("solve-fkpp", help="solve the reaction-diffusion system")
    common(p, seed=False)
    p.add_argument("--ic", default="heaviside")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dx", type=float, default=0.05)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--save-times", default=None, help="comma-separated times to save")
    p.add_argument("--permissive", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_solve_fkpp)

    p = sub.add_parser("estimate", help="run a named estimator")
    p.add_argument("--what", required=True,
                   choices=["cinf", "cinf-typed", "martingale", "overshoot",
                            "limit-law", "dppp-check"])
    common(p)
    p.add_argument("--t", type=float, default=9.0)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--rs", default="4,8,16")
    p.add_argument("--i1", type=int, default=1, help="1-based type for cinf-typed")
    p.add_argument("--s-proxy", type=float, default=10.0)
    p.add_argument("--min-accepted", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("run", help="run an experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--check", action="store_true", help="exit 1 if any check fails")
    p.add_argument("--out", default=None, help="override the config's output directory")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("list", help="list available experiments")
    p.set_defaults(fn=_cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceLimitError, InsufficientSamplesError, DomainTooSmallError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3
    except MtbbmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
