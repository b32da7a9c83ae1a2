"""Command-line front end.

Subcommands:
    solve            solve the configured problem; write field CSV + report JSON
    validate-params  print the parameter bounds and any violated constraints
    check            run a property suite: comparison | hull | regularity | operators
    report           convergence + equicontinuity traces as one JSON document

Exit codes: 0 success/converged, 2 iteration budget exhausted, 1 error or
failed check.  Set MEANFIX_LOG=debug|info|warning for log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (check_comparison, check_graph_hull, check_regularity,
                       equicontinuity_report, operator_property_suite)
from .config import (ConfigError, RunConfig, boundary_from_config, build_domain,
                     build_problem, canonical_json_dump, load_config)
from .gridfield import BoundaryData, build_initial, dump_field_csv
from .radius import RadiusParams, beta_max, default_params, lambda_max, validate_params
from .solver import solve

log = logging.getLogger("meanfix")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITER = 2


def _setup_logging():
    level = os.environ.get("MEANFIX_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _set_workers(n: int | None):
    if n is None:
        return
    import numba
    numba.set_num_threads(max(1, n))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
    problem = build_problem(cfg)
    report = solve(problem)
    out = _out_dir(args)
    names = cfg.output or {}
    field_csv = out / names.get("field_csv", "field.csv")
    field_meta = out / names.get("field_meta", "field.meta.json")
    report_path = out / names.get("report", "report.json")
    dump_field_csv(report.field, field_csv, field_meta)
    doc = report.to_json_dict()
    doc["tol"] = problem.tol
    doc["alpha"] = problem.spec.params.alpha
    doc["h"] = problem.h
    doc["seed"] = cfg.seed
    with open(report_path, "w") as fh:
        fh.write(canonical_json_dump(doc))
    print(f"{report.termination}: {report.iterations} iterations, "
          f"final residual {report.residual_trace[-1]:.3e}")
    print(f"wrote {field_csv}, {field_meta}, {report_path}")
    return EXIT_OK if report.termination == "converged" else EXIT_MAX_ITER


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    domain = build_domain(cfg)
    alpha = cfg.resolved_alpha()
    try:
        params = default_params(domain, alpha, epsilon=cfg.epsilon,
                                beta=cfg.beta, lam=cfg.lam)
    except ValueError:
        # show the raw parameter set and its violations instead
        eps = cfg.epsilon if cfg.epsilon is not None else (1 - alpha) / 2
        beta = cfg.beta if cfg.beta is not None else 1.0
        lam = cfg.lam if cfg.lam is not None else 0.0
        params = RadiusParams(alpha=alpha, epsilon=eps, beta=beta, lam=lam)
    violations = validate_params(params, domain)
    bmax = None
    lmax = None
    if 0 <= params.alpha < 1 and 0 < params.epsilon < 1 - params.alpha:
        bmax = beta_max(params.alpha, params.epsilon)
        if params.beta >= 1:
            lmax = lambda_max(domain, params.epsilon, params.beta)
    print(f"alpha={params.alpha} epsilon={params.epsilon} "
          f"beta={params.beta} lambda={params.lam}")
    print(f"beta_max={'unbounded' if bmax is None else f'{bmax:.6g}'} "
          f"lambda_max={'n/a' if lmax is None else f'{lmax:.6g}'}")
    if violations:
        for v in violations:
            print(f"violation[{v.code}]: {v.message}")
        return EXIT_ERROR
    print("ok")
    return EXIT_OK


def _affine_pair(seed: int) -> tuple[BoundaryData, BoundaryData]:
    """Seeded ordered boundary pair with a strictly positive gap."""
    rng = np.random.default_rng(seed)
    a, b, c = rng.uniform(-1, 1, size=3)
    k = rng.integers(1, 4)
    amp = rng.uniform(0.1, 0.5)
    gap0 = amp + rng.uniform(0.2, 1.0)

    def f1(x, y, theta):
        return a + b * x + c * y

    def f2(x, y, theta):
        return a + b * x + c * y + gap0 + amp * np.cos(k * theta)

    return (BoundaryData(f1, name="pair_lo"), BoundaryData(f2, name="pair_hi"))


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    problem = build_problem(cfg)
    suite = args.suite
    out = _out_dir(args)
    if suite == "comparison":
        f1, f2 = _affine_pair(seed)
        result = check_comparison(problem, f1, f2)
    elif suite == "hull":
        boundary = boundary_from_config(cfg.boundary)
        fld = build_initial(problem.domain, boundary, problem.h)
        result = check_graph_hull(fld, problem.spec, boundary)
    elif suite == "regularity":
        result = check_regularity(problem)
    elif suite == "operators":
        boundary = boundary_from_config(cfg.boundary)
        base = build_initial(problem.domain, boundary, problem.h)
        result = operator_property_suite(base, problem.spec, n_pairs=100,
                                         seed=seed)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown suite {suite}")
    doc = result.to_json_dict()
    doc["seed"] = seed
    path = out / f"check_{suite}.json"
    with open(path, "w") as fh:
        fh.write(canonical_json_dump(doc))
    print(f"{suite}: {'pass' if result.passed else 'FAIL'} ({path})")
    return EXIT_OK if result.passed else EXIT_ERROR


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    problem = build_problem(cfg)
    solve_report = solve(problem)
    eps = problem.spec.params.epsilon
    # deepest nested subdomain that still spans a decent grid neighbourhood
    n = 1
    while (1 - eps) ** (n + 1) > 4 * problem.h and n < 60:
        n += 1
    t_grid = np.linspace(2 * problem.h, 8 * problem.h, 4)
    mod_report = equicontinuity_report(problem, n=n, k_max=args.k_max,
                                       t_grid=t_grid, seed=cfg.seed)
    doc = {
        "solve": solve_report.to_json_dict(),
        "equicontinuity": mod_report.to_json_dict(),
        "subdomain_n": n,
        "tol": problem.tol,
    }
    out = _out_dir(args)
    path = out / "trace_report.json"
    with open(path, "w") as fh:
        fh.write(canonical_json_dump(doc))
    print(f"wrote {path}")
    return EXIT_OK if solve_report.termination == "converged" else EXIT_MAX_ITER


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="meanfix",
        description="Restricted mean-value Dirichlet solver on strictly convex domains")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--workers", type=int, default=None,
                       help="sweep worker threads (default: all cores)")
        p.add_argument("--out", default=".", help="output directory")

    p_solve = sub.add_parser("solve", help="solve the configured problem")
    common(p_solve)
    p_solve.set_defaults(fn=cmd_solve)

    p_val = sub.add_parser("validate-params", help="check parameter bounds")
    common(p_val)
    p_val.set_defaults(fn=cmd_validate)

    p_check = sub.add_parser("check", help="run a property suite")
    common(p_check)
    p_check.add_argument("suite",
                         choices=["comparison", "hull", "regularity", "operators"])
    p_check.set_defaults(fn=cmd_check)

    p_rep = sub.add_parser("report", help="convergence and modulus traces")
    common(p_rep)
    p_rep.add_argument("--k-max", type=int, default=8,
                       help="iterates in the equicontinuity trace")
    p_rep.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    _set_workers(args.workers)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
