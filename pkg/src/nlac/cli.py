"""Command line entry point: batch studies and simulations, no interaction.

Exit codes: 0 on success / passed check, 1 on a failed acceptance check,
2 on usage or validation errors.  Errors print one line on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as nio
from .geometry import approximate_solution
from .grid import make_grid
from .kernel import DEFAULT_BETA, DEFAULT_BUMP_RADIUS, MollifierSpec, normalize, symbol_table
from .potential import PotentialSpec, optimal_profile
from .solver import SolverConfig, run
from .verify import (band_limited_field, compare_nonlocal_local, consistency_study,
                     ehrling_check, mcf_convergence, spectral_floor)


class UsageError(ValueError):
    pass


def _default_workers() -> int:
    env = os.environ.get("NLAC_WORKERS")
    if env is not None:
        return int(env)
    return os.cpu_count() or 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    manifest_cmds = ("simulate", "consistency", "ehrling", "spectral-floor",
                     "compare-local", "mcf")
    for name in manifest_cmds:
        p = sub.add_parser(name)
        p.add_argument("--manifest", required=True)
        p.add_argument("--out", default="./out")
        p.add_argument("--workers", type=int, default=_default_workers())
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("profile")
    p.add_argument("--kind", default="quartic", choices=["quartic", "custom"])
    p.add_argument("--coefficients", default="", help="comma-separated, lowest degree first")
    p.add_argument("--rho-max", type=float, default=10.0)
    p.add_argument("--count", type=int, default=401)
    p.add_argument("--out", default="./out")

    p = sub.add_parser("symbol")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--bump-radius", type=float, default=DEFAULT_BUMP_RADIUS)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--points-per-axis", type=int, required=True)
    p.add_argument("--out", default="./out")
    p.add_argument("--workers", type=int, default=_default_workers())
    return parser


def _require(params: dict, key: str):
    if key not in params:
        raise UsageError(f"manifest params missing required key {key!r}")
    return params[key]


def _solver_config(mani: nio.StudyManifest, table=None) -> SolverConfig:
    s = mani.solver
    for key in ("epsilon", "dt", "t_end"):
        if s[key] is None:
            raise UsageError(f"manifest solver section missing {key!r}")
    return SolverConfig(grid=mani.grid, epsilon=s["epsilon"], dt=s["dt"],
                        t_end=s["t_end"], potential=mani.potential, table=table,
                        stabilizer=s["stabilizer"],
                        diagnostic_stride=s["diagnostic_stride"],
                        dealias=s["dealias"], seed=mani.seed)


def _cmd_simulate(mani: nio.StudyManifest, out: str, workers: int, seed: int) -> int:
    params = dict(mani.params)
    eta = params.pop("eta", None)
    if params:
        raise UsageError(f"unknown params for simulate: {sorted(params)}")
    table = None
    if eta is not None:
        table = symbol_table(mani.kernel, eta, mani.grid, workers=workers)
    config = _solver_config(mani, table)
    if mani.interface is not None:
        initial = approximate_solution(mani.grid, mani.interface,
                                       mani.interface.radius0, config.epsilon,
                                       mani.potential)
    else:
        rng = np.random.default_rng(seed)
        initial = band_limited_field(mani.grid, mani.grid.points_per_axis // 4, rng)
    record = run(config, initial)
    record.to_csv(os.path.join(out, "run.csv"))
    nio.write_snapshot(record.final_state, os.path.join(out, "final.nlac"))
    return 0


def _cmd_consistency(mani: nio.StudyManifest, out: str, workers: int, seed: int) -> int:
    params = dict(mani.params)
    etas = _require(params, "etas")
    num_fields = params.pop("num_fields", 10)
    cutoff = params.pop("cutoff", mani.grid.points_per_axis // 4)
    params.pop("etas")
    if params:
        raise UsageError(f"unknown params for consistency: {sorted(params)}")
    rng = np.random.default_rng(seed)
    fields = [band_limited_field(mani.grid, cutoff, rng) for _ in range(num_fields)]
    report = consistency_study(mani.kernel, mani.grid, etas, fields, workers=workers)
    passed = 0.9 <= report.slope <= 1.1 and report.extras["k_stability"] <= 0.1
    nio.write_report({"study": "consistency", "params": {"etas": list(etas)},
                      **report.to_dict(), "passed": passed},
                     os.path.join(out, "consistency.json"))
    return 0 if passed else 1


def _cmd_ehrling(mani: nio.StudyManifest, out: str, workers: int, seed: int) -> int:
    params = dict(mani.params)
    r_values = _require(params, "r_values")
    trials = params.pop("trials", 100)
    params.pop("r_values")
    if params:
        raise UsageError(f"unknown params for ehrling: {sorted(params)}")
    report = ehrling_check(mani.kernel, mani.grid, r_values, trials, seed,
                           workers=workers)
    passed = report.violations == 0
    nio.write_report({"study": "ehrling",
                      "params": {"r_values": list(r_values), "trials": trials},
                      **report.to_dict(), "passed": passed},
                     os.path.join(out, "ehrling.json"))
    return 0 if passed else 1


def _cmd_spectral_floor(mani: nio.StudyManifest, out: str, workers: int, seed: int) -> int:
    params = dict(mani.params)
    epsilons = sorted(_require(params, "epsilons"), reverse=True)
    tol = params.pop("tol", 1e-6)
    params.pop("epsilons")
    if params:
        raise UsageError(f"unknown params for spectral-floor: {sorted(params)}")
    if mani.interface is None:
        raise UsageError("spectral-floor requires an interface section")
    results = {}
    for eps in epsilons:
        u_a = approximate_solution(mani.grid, mani.interface,
                                   mani.interface.radius0, eps, mani.potential)
        est = spectral_floor(u_a, eps, mani.potential, tol=tol)
        results[eps] = est
    coarse = results[epsilons[0]]
    floor = -1.2 * abs(coarse.value)
    passed = all(e.converged and e.value >= floor for e in results.values())
    nio.write_report({
        "study": "spectral-floor",
        "params": {"epsilons": epsilons, "tol": tol},
        "table": [[eps, results[eps].value] for eps in epsilons],
        "floor": floor,
        "converged": {str(eps): results[eps].converged for eps in epsilons},
        "passed": passed,
    }, os.path.join(out, "spectral_floor.json"))
    return 0 if passed else 1


def _cmd_compare_local(mani: nio.StudyManifest, out: str, workers: int, seed: int) -> int:
    params = dict(mani.params)
    etas = _require(params, "etas")
    params.pop("etas")
    if params:
        raise UsageError(f"unknown params for compare-local: {sorted(params)}")
    if mani.interface is None:
        raise UsageError("compare-local requires an interface section")
    base = _solver_config(mani, table=None)
    initial = approximate_solution(mani.grid, mani.interface,
                                   mani.interface.radius0, base.epsilon,
                                   mani.potential)
    report = compare_nonlocal_local(base, mani.kernel, initial, etas, workers=workers)
    passed = 0.8 <= report.slope <= 1.2
    nio.write_report({"study": "compare-local", "params": {"etas": list(etas)},
                      **report.to_dict(), "passed": passed},
                     os.path.join(out, "compare_local.json"))
    return 0 if passed else 1


def _cmd_mcf(mani: nio.StudyManifest, out: str, workers: int, seed: int) -> int:
    params = dict(mani.params)
    epsilons = _require(params, "epsilons")
    eta_rule = params.pop("eta_rule", "zero")
    t_end = params.pop("t_end", 0.2)
    dts = params.pop("dts", None)
    radius_tol = params.pop("radius_tol", None)
    eta_exponent = params.pop("eta_exponent", 4.0)
    stride = params.pop("diagnostic_stride", 250)
    params.pop("epsilons")
    if params:
        raise UsageError(f"unknown params for mcf: {sorted(params)}")
    if mani.interface is None:
        raise UsageError("mcf requires an interface section")
    report = mcf_convergence(mani.interface, epsilons, eta_rule, mani.grid,
                             mani.potential, kernel_spec=mani.kernel,
                             t_end=t_end, dts=dts,
                             stabilizer=mani.solver["stabilizer"],
                             diagnostic_stride=stride,
                             eta_exponent=eta_exponent, workers=workers)
    eps_sorted = sorted(report.field_errors)
    errs = [report.field_errors[e] for e in eps_sorted]
    passed = all(a < b for a, b in zip(errs, errs[1:]))
    if report.field_rate is not None:
        passed = passed and report.field_rate.slope >= 1.0
    if radius_tol is not None:
        passed = passed and all(v <= radius_tol for v in report.radius_errors.values())
    nio.write_report({"study": "mcf",
                      "params": {"epsilons": list(epsilons), "eta_rule": eta_rule,
                                 "t_end": t_end},
                      **report.to_dict(), "passed": passed},
                     os.path.join(out, "mcf.json"))
    return 0 if passed else 1


def _cmd_profile(args) -> int:
    coeffs = tuple(float(c) for c in args.coefficients.split(",") if c.strip()) \
        if args.coefficients else ()
    spec = PotentialSpec(kind=args.kind, coefficients=coeffs)
    rho = np.linspace(-args.rho_max, args.rho_max, args.count)
    theta = optimal_profile(spec, rho)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "profile.csv")
    with open(path, "w") as fh:
        fh.write("rho,theta0\n")
        for r, t in zip(rho, theta):
            fh.write(f"{r:.17g},{t:.17g}\n")
    return 0


def _cmd_symbol(args) -> int:
    beta = args.beta if args.beta is not None else DEFAULT_BETA.get(args.dim)
    if beta is None:
        raise UsageError(f"no default beta for dim {args.dim}; pass --beta")
    spec = normalize(MollifierSpec(dim=args.dim, beta=beta,
                                   bump_radius=args.bump_radius))
    grid = make_grid(args.dim, args.points_per_axis)
    table = symbol_table(spec, args.eta, grid, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    table.to_csv(os.path.join(args.out, "symbol.csv"))
    return 0


_MANIFEST_DISPATCH = {
    "simulate": _cmd_simulate,
    "consistency": _cmd_consistency,
    "ehrling": _cmd_ehrling,
    "spectral-floor": _cmd_spectral_floor,
    "compare-local": _cmd_compare_local,
    "mcf": _cmd_mcf,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "profile":
            return _cmd_profile(args)
        if args.command == "symbol":
            return _cmd_symbol(args)
        mani = nio.load_manifest(args.manifest)
        seed = args.seed if args.seed is not None else mani.seed
        os.makedirs(args.out, exist_ok=True)
        return _MANIFEST_DISPATCH[args.command](mani, args.out, args.workers, seed)
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
