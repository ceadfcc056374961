"""Command-line entry point: ``loglap <subcommand> ...``.

Exit codes: 0 consistent, 1 violation, 2 precondition unmet everywhere,
3 configuration or usage error.
"""
import argparse
import json
import sys

import numpy as np

from . import harness
from .config import RunConfig, load_config
from .errors import ConfigError, ContractError, DivergenceError, PreconditionError
from .geometry import Epigraph, classify
from .grid import GridFunction, UniformGrid, gaussian, read_gridfunction, write_gridfunction
from .operator import build_plan, evaluate_at, fourier_oracle
from .problems import ProblemSpec, _parse_spec, manufactured_monotone
from .solver import ball_grid, eigen_smallest, probe_nonexistence, solve_dirichlet
from .special import constants_for

EXIT = {harness.CONSISTENT: 0, harness.VIOLATED: 1, harness.UNMET: 2}


def _fmt(v):
    return f"{v:.10g}"


def _row(values):
    return ",".join(v if isinstance(v, str) else _fmt(v) for v in values)


def _point(text):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse point {text!r}") from None


def _emit(record):
    print(json.dumps(harness._plain(record), sort_keys=True))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _config(args, need_grid=False, need_problem=False):
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    if need_grid and cfg.grid is None:
        raise ConfigError("config has no [grid] section")
    if need_problem and (cfg.a is None or cfg.f is None):
        raise ConfigError("config [problem] must define a and f")
    return cfg


def _spec(cfg):
    return ProblemSpec(cfg.epigraph, cfg.a, cfg.f, cfg.grid)


def _initial(cfg, spec, text):
    kind, p = _parse_spec(text)
    scale = p.get("scale", 1.0)
    mask = spec.omega_mask()
    if kind == "zero":
        return GridFunction.zeros(spec.grid)
    if kind == "ones":
        return GridFunction(spec.grid, scale * mask.astype(float))
    if kind == "manufactured":
        return manufactured_monotone(spec.epigraph, spec.grid, scale)
    raise ConfigError(f"unknown initial guess {text!r}")


def cmd_constants(args):
    c = constants_for(args.dim)
    print(_row((str(c.n), c.c_n, c.rho_n)))
    return 0


def cmd_classify(args):
    cfg = _config(args)
    e = cfg.epigraph
    if args.family is not None:
        e = Epigraph(args.family, args.alpha if args.alpha is not None else e.alpha, args.r0 if args.r0 is not None else e.r0)
    print(classify(e, args.lam, _point(args.x)).value)
    return 0


def _function(grid, text, epigraph):
    kind, p = _parse_spec(text)
    if kind == "gaussian":
        return gaussian(grid, p.get("sigma", 1.0))
    if kind == "manufactured":
        return manufactured_monotone(epigraph, grid, p.get("scale", 1.0))
    raise ConfigError(f"unknown function {text!r}; use gaussian:sigma=S or manufactured:scale=S")


def cmd_apply(args):
    cfg = _config(args, need_grid=True)
    u = _function(cfg.grid, args.func, cfg.epigraph)
    x = _point(args.at)
    if cfg.check_box and not harness._in_box(cfg.grid, x):
        raise PreconditionError(f"point {args.at} lies outside the grid box")
    print(_fmt(evaluate_at(u, build_plan(cfg.grid), [x])[0]))
    return 0


def cmd_symbol_check(args):
    m = round(args.radius / args.h)
    grid = UniformGrid((-m * args.h,) * args.dim, args.h, (2 * m + 1,) * args.dim)
    u = gaussian(grid, args.sigma)
    quad = float(evaluate_at(u, build_plan(grid), [np.zeros(args.dim)])[0])
    oracle = fourier_oracle(args.sigma, args.dim)
    rel = abs(quad - oracle) / abs(oracle)
    print(_row((quad, oracle, rel)))
    return 0 if rel <= args.rtol else 1


def cmd_solve(args):
    cfg = _config(args, need_grid=True, need_problem=True)
    spec = _spec(cfg)
    u0 = _initial(cfg, spec, args.init or cfg.init)
    try:
        u, rep = solve_dirichlet(spec, cfg.solver, u0=u0)
    except DivergenceError as exc:
        _emit({"residual": float("inf"), "iters": exc.iteration, "converged": False, "error": str(exc)})
        return 1
    write_gridfunction(u, args.out)
    _emit(rep.as_dict())
    return 0 if rep.converged else 1


def cmd_eigen(args):
    grid = ball_grid(args.R, args.h, n=args.dim)
    eig = eigen_smallest(args.R, grid)
    write_gridfunction(eig.phi, args.out)
    print(_row((eig.lambda_1, eig.residual, str(eig.iterations))))
    return 0


def cmd_sweep(args):
    cfg = load_config(args.domain_config) if args.domain_config else RunConfig()
    u = read_gridfunction(args.inp)
    sw = cfg.sweep
    lo = args.lambda_min if args.lambda_min is not None else sw.get("lambda_min")
    hi = args.lambda_max if args.lambda_max is not None else sw.get("lambda_max")
    step = args.step if args.step is not None else sw.get("step")
    lams = harness.compatible_lambdas(u.grid, cfg.epigraph, lo, hi, step)
    if lams.size == 0:
        raise PreconditionError("no reflection-compatible lambda in the requested range")
    rep = harness.sweep_monotonicity(u, cfg.epigraph, lams)
    head = ["lambda", "min_w"] + [f"argmin_x{i + 1}" for i in range(u.grid.n)] + ["n_H", "n_A", "n_D"]
    lines = [",".join(head)]
    for row in rep.rows():
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    _emit({"kind": "sweep", "verdict": rep.verdict, "strict": rep.strict, "first_failure": rep.first_failure,
           "skipped": rep.skipped, "tol": rep.tol})
    if len(rep.skipped) == len(lams):
        return 2
    return 0 if rep.verdict else 1


def cmd_diagnose(args):
    cfg = _config(args)
    u = read_gridfunction(args.inp)
    plan = build_plan(u.grid)
    if args.kind == "antisym":
        if args.lam is None:
            raise ConfigError("--lambda is required for --kind antisym")
        if cfg.a is None or cfg.f is None:
            raise ConfigError("--kind antisym needs a config with [problem] a and f")
        spec = ProblemSpec(cfg.epigraph, cfg.a, cfg.f, u.grid)
        rep = harness.antisym_mp_check(u, args.lam, spec, plan)
    elif args.kind == "boundary":
        if args.lambda0 is None:
            raise ConfigError("--lambda0 is required for --kind boundary")
        rep = harness.boundary_quotient(u, cfg.epigraph, args.lambda0, args.k_max, plan)
    elif args.kind == "ball":
        rep = harness.ball_mp_check(u, args.R, plan)
    else:
        if not args.phi:
            raise ConfigError("--phi is required for --kind comparison")
        phi = read_gridfunction(args.phi)
        from .solver import EigenPair

        c = np.zeros(phi.grid.n)
        c[-1] = args.R
        eig = EigenPair(float("nan"), phi, float("nan"), 0, tuple(c))
        v, M, wit = harness.comparison_construct(u, eig)
        ball = harness.ball_mp_check(v - phi, args.R, build_plan(phi.grid))
        rep = harness.DiagnosticsReport("comparison", {"M": M, "witness": wit, "ball": ball.data}, ball.verdict)
    print(rep.to_json())
    return EXIT[rep.verdict]


def cmd_probe(args):
    cfg = _config(args, need_grid=True, need_problem=True)
    spec = _spec(cfg)
    u0 = _initial(cfg, spec, args.init) if args.init else None
    rep = probe_nonexistence(spec, cfg.solver, u0=u0, threshold=args.threshold)
    _emit(rep.as_dict())
    return {"decayed": 0, "grew": 0, "diverged": 0, "converged": 1}.get(rep.outcome, 2)


def build_parser():
    p = _Parser(prog="loglap", description="Logarithmic Laplacian numerics on epigraph domains.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("constants", help="print n,c_n,rho_n")
    s.add_argument("--dim", type=int, required=True)
    s.set_defaults(fn=cmd_constants)

    s = sub.add_parser("classify", help="region label of a point")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--config")
    s.add_argument("--family")
    s.add_argument("--alpha", type=float)
    s.add_argument("--r0", type=float)
    s.set_defaults(fn=cmd_classify)

    s = sub.add_parser("apply", help="discrete operator at a point")
    s.add_argument("--config", required=True)
    s.add_argument("--func", required=True)
    s.add_argument("--at", required=True)
    s.set_defaults(fn=cmd_apply)

    s = sub.add_parser("symbol-check", help="quadrature vs Fourier oracle for a Gaussian")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--radius", type=float, default=8.0)
    s.add_argument("--rtol", type=float, default=0.02)
    s.set_defaults(fn=cmd_symbol_check)

    s = sub.add_parser("solve", help="damped iteration for the truncated Dirichlet problem")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--init")
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("eigen", help="first Dirichlet eigenpair on B_1(R e_n)")
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_eigen)

    s = sub.add_parser("sweep", help="moving-plane monotonicity sweep")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--domain-config")
    s.add_argument("--lambda-min", type=float)
    s.add_argument("--lambda-max", type=float)
    s.add_argument("--step", type=float)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("diagnose", help="maximum-principle diagnostics")
    s.add_argument("--kind", choices=("antisym", "boundary", "ball", "comparison"), required=True)
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--config")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--lambda0", type=float)
    s.add_argument("--k-max", type=int, default=6)
    s.add_argument("--R", type=float, default=3.0)
    s.add_argument("--phi")
    s.set_defaults(fn=cmd_diagnose)

    s = sub.add_parser("probe-nonexistence", help="iterate from a positive start and report decay or growth")
    s.add_argument("--config", required=True)
    s.add_argument("--threshold", type=float, default=1e-3)
    s.add_argument("--init")
    s.set_defaults(fn=cmd_probe)
    return p


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            parser.print_usage(sys.stderr)
            return 3
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (PreconditionError, ContractError) as exc:
        print(f"precondition_unmet: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
