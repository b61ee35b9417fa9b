"""Command line interface: ``redrough <subcommand> [options]``.

Exit codes: 0 success, 1 invariant or certificate failure, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import checks, scenarios, sweeps
from .controlled import ControlledPath, compose, identity_path, lift_function
from .drivers import DriverSpec, gen_fbm
from .errors import NumericalFailure, RoughPathError
from .functions import as_field, builtin
from .grid import Grid, read_path_csv, write_path_csv
from .rough_path import ReducedRoughPath, check_alpha, geometric_lift, ito_lift, load_json, rrp_norm, save_json
from .sewing import certificate_terms, dyadic_pairs, fit_slope, integrate, local_error_certificate
from .solver import SolverConfig, solve_global

log = logging.getLogger("redrough")


class UsageError(Exception):
    pass


def _dump(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def _load_config(args) -> dict:
    if not args.config:
        return {}
    try:
        return json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc


def _driver_from(cfg: dict, args) -> ReducedRoughPath:
    """A rough path from ``driver_file`` (JSON), ``path_csv`` or an inline ``driver`` spec."""
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if "driver_file" in cfg:
        r = load_json(cfg["driver_file"])
        return r if alpha is None else r.with_alpha(alpha)
    if "path_csv" in cfg:
        x = read_path_csv(cfg["path_csv"])
        lift = cfg.get("lift", "geometric")
        a = 0.5 if alpha is None else alpha
        return ito_lift(x, a) if lift == "ito" else geometric_lift(x, a)
    spec = dict(cfg.get("driver", {"kind": "smooth", "curve": "line"}))
    if args.seed is not None:
        spec["seed"] = args.seed
    if alpha is not None:
        spec["alpha"] = alpha
    try:
        return DriverSpec.from_dict(spec).rough_path()
    except TypeError as exc:
        raise UsageError(f"bad driver spec: {exc}") from exc


def cmd_lift(args, cfg, out: Path) -> int:
    r = _driver_from(cfg, args)
    save_json(out / "rough_path.json", r)
    write_path_csv(out / "path.csv", r.path)
    n = rrp_norm(r, cfg.get("budget", "auto"))
    _dump(out / "lift_report.json", {"schema": "redrough.lift_report/1", "alpha": r.alpha, "dim": r.dim,
                                     "n_steps": r.grid.n_steps, "x_alpha": n.x_alpha, "s_2alpha": n.s_2alpha,
                                     "hash": r.content_hash()})
    return 0


def _integrand(cfg: dict, r: ReducedRoughPath) -> ControlledPath:
    spec = cfg.get("integrand", "identity")
    if spec == "identity":
        return identity_path(r)
    if isinstance(spec, dict) and "field" in spec:
        return lift_function(builtin(spec["field"]), r)
    if isinstance(spec, dict) and "solution_field" in spec:
        f = as_field(builtin(spec["solution_field"]), r.dim)
        rep = solve_global(spec.get("xi", [0.0] * f.domain_dim), f, r)
        return compose(f, rep.solution)
    raise UsageError(f"unknown integrand spec {spec!r}")


def cmd_integrate(args, cfg, out: Path) -> int:
    r = _driver_from(cfg, args)
    c = _integrand(cfg, r)
    res = integrate(c, r)
    write_path_csv(out / "integral.csv", res.values)
    terms = certificate_terms(c, r)
    total = res.values.values
    pairs = [p for p in dyadic_pairs(r.grid.n_steps) if p[1] - p[0] >= 2]
    lhs, rhs = [], []
    for i, j in pairs:
        a, b = local_error_certificate(c, r, i, j, terms=terms, integral=total)
        lhs.append(a)
        rhs.append(b)
    lengths = [float(r.grid.times[j] - r.grid.times[i]) for i, j in pairs]
    pos = [(h, e) for h, e in zip(lengths, lhs) if e > 0]
    slope = fit_slope(*zip(*pos)) if len(pos) >= 2 else None
    violations = sum(int(a > b) for a, b in zip(lhs, rhs))
    _dump(out / "certificate.json", {"schema": "redrough.certificate/1", "pairs": [list(p) for p in pairs],
                                     "lhs": lhs, "rhs": rhs, "slope": slope, "violations": violations,
                                     "germ_defect_3alpha": res.germ_defect_3alpha})
    return 1 if violations else 0


def cmd_solve(args, cfg, out: Path) -> int:
    r = _driver_from(cfg, args)
    f = as_field(builtin(cfg.get("field", "sin")), r.dim)
    xi = cfg.get("xi", [0.0] * f.domain_dim)
    over = dict(cfg.get("solver", {}))
    if args.beta is not None:
        over["beta"] = args.beta
    try:
        sc = SolverConfig(**over)
    except TypeError as exc:
        raise UsageError(f"bad solver overrides: {exc}") from exc
    rep = solve_global(xi, f, r, sc)
    write_path_csv(out / "solution.csv", rep.solution.y_path())
    _dump(out / "solve_report.json", rep.to_json())
    return 0 if rep.residual_norm <= 10 * rep.config.fixed_point_tol * max(1.0, float(np.max(np.abs(rep.solution.y)))) else 1


def cmd_convergence(args, cfg, out: Path) -> int:
    name = args.scenario or cfg.get("scenario", "linear-line")
    levels = cfg.get("levels", [4, 10])
    tb = sweeps.convergence_sweep(name, range(levels[0], levels[1] + 1), cfg.get("hurst", 0.45),
                                  args.seed if args.seed is not None else cfg.get("seed", 0), args.threads)
    tb.write_csv(out / f"convergence_{name}.csv")
    doc = tb.to_json()
    doc["fitted_order"] = None if math.isnan(tb.fitted_order) else tb.fitted_order
    _dump(out / f"convergence_{name}.json", doc)
    return 0


def cmd_fbm_gen(args, cfg, out: Path) -> int:
    h = args.hurst if args.hurst is not None else cfg.get("hurst", 0.5)
    n = args.n_steps if args.n_steps is not None else cfg.get("n_steps", 1024)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    sample = gen_fbm(h, seed, Grid.uniform(n, cfg.get("horizon", 1.0)), cfg.get("dim", 1), cfg.get("method", "auto"))
    write_path_csv(out / "fbm.csv", sample.path)
    _dump(out / "fbm.json", {"schema": "redrough.fbm/1", "hurst": h, "seed": seed, "n_steps": n,
                             "method": sample.method})
    return 0


def cmd_check(args, cfg, out: Path) -> int:
    if args.dense_table:
        try:
            doc = json.loads(Path(args.dense_table).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read dense table {args.dense_table}: {exc}") from exc
        rep = checks.check_dense_table(doc, cfg.get("tolerance", 1e-10))
        _dump(out / "dense_check.json", rep)
        if not rep["passed"]:
            print(f"reduced Chen relation violated at triple {tuple(rep['worst_triple'])}, "
                  f"scaled defect {rep['max_scaled_defect']:.3e}", file=sys.stderr)
        return 0 if rep["passed"] else 1
    if args.alpha is not None:
        check_alpha(args.alpha)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    rep = checks.run_checks(seed, args.threads)
    _dump(out / "check.json", rep)
    for name, s in rep["suites"].items():
        print(f"{name}: {'pass' if s['passed'] else 'FAIL'}")
    return 0 if rep["passed"] else 1


def cmd_acceptance(args, cfg, out: Path) -> int:
    names = args.only or sorted(scenarios.SCENARIOS)
    ok = True
    for name in names:
        res = scenarios.run_scenario(name, args.seed or 0, args.threads)
        _dump(out / f"acceptance_{name}.json", res)
        print(f"{name}: {'PASS' if res['passed'] else 'FAIL'}")
        ok &= res["passed"]
    return 0 if ok else 1


COMMANDS = {
    "lift": cmd_lift,
    "integrate": cmd_integrate,
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "fbm-gen": cmd_fbm_gen,
    "check": cmd_check,
    "acceptance": cmd_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--alpha", type=float, default=None, help="Hölder exponent of the driver")
    common.add_argument("--beta", type=float, default=None, help="driver exponent used by the solver")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="redrough", description="Reduced rough path toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("lift", parents=[common], help="lift a driver to a reduced rough path")
    sub.add_parser("integrate", parents=[common], help="rough integral with sewing certificates")
    sub.add_parser("solve", parents=[common], help="solve dY = F(Y) dX")
    cv = sub.add_parser("convergence", parents=[common], help="dyadic refinement sweep")
    cv.add_argument("--scenario", choices=sweeps.SCENARIOS)
    fb = sub.add_parser("fbm-gen", parents=[common], help="sample fractional Brownian motion")
    fb.add_argument("--hurst", type=float)
    fb.add_argument("--n-steps", type=int)
    ck = sub.add_parser("check", parents=[common], help="run the invariant suites")
    ck.add_argument("--dense-table", help="JSON with grid, path and a dense second-level table to validate")
    ac = sub.add_parser("acceptance", parents=[common], help="run acceptance scenarios A1-A8")
    ac.add_argument("--only", nargs="*", choices=sorted(scenarios.SCENARIOS))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("redrough: --threads must be at least 1", file=sys.stderr)
        return 2
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cfg = _load_config(args)
        return COMMANDS[args.command](args, cfg, out)
    except NumericalFailure as exc:
        print(f"redrough: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (UsageError, RoughPathError, ValueError, KeyError) as exc:
        print(f"redrough: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
