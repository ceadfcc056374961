"""Damped residual iteration for the box-truncated Dirichlet problem and
inverse iteration for the first Dirichlet eigenpair on a unit ball."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg

from .errors import ConfigError, ConvergenceError, DivergenceError, PreconditionError
from .grid import GridFunction, UniformGrid
from .operator import _convolve, build_plan, operator_matrix
from .problems import check_assumptions
from .special import constants_for

DENSE_LIMIT = 5000


@dataclass
class SolveConfig:
    tau: float = None  # None -> 0.8 / (largest diagonal entry)
    tol_residual: float = 1e-8
    max_iter: int = 2000
    positivity_projection: bool = True
    check_hypotheses: bool = True


@dataclass
class SolveReport:
    residual: float
    iterations: int
    converged: bool
    tau: float
    sup_history: list = field(default_factory=list, repr=False)
    residual_history: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {"residual": self.residual, "iters": self.iterations, "converged": self.converged}


class _ActiveOperator:
    """L_h restricted to the active nodes (zero elsewhere)."""

    def __init__(self, plan, idx):
        self.plan = plan
        self.idx = idx
        self.diagonal = plan.diagonal + plan.rho_n
        self.dense = operator_matrix(plan, idx) if len(idx) <= DENSE_LIMIT else None

    def __call__(self, v):
        if self.dense is not None:
            return self.dense @ v
        nz = v != 0
        return self.diagonal * v - _convolve(self.plan, self.idx, self.idx[nz], v[nz])


def _setup(spec, cfg):
    plan = build_plan(spec.grid, spec.constants)
    active = spec.omega_mask()
    op = _ActiveOperator(plan, spec.grid.multi_indices()[active])
    tau = 0.8 / op.diagonal if cfg.tau is None else float(cfg.tau)
    if not (0 < tau and tau * op.diagonal < 2):
        raise ConfigError(
            f"damping tau={tau:.6g} violates the stability bound tau * {op.diagonal:.6g} < 2"
        )
    return op, active, tau


def _iterate(spec, cfg, u0, rhs=None):
    """Yield (k, u_active, residual vector) for k = 0, 1, ...; u is updated in place."""
    op, active, tau = _setup(spec, cfg)
    if u0.grid != spec.grid:
        raise PreconditionError("initial guess lives on a different grid")
    if np.any(u0.values < 0):
        raise PreconditionError("initial guess must be nonnegative")
    if np.any(u0.values[~active] != 0):
        raise PreconditionError("initial guess must vanish outside Omega")
    coef = spec.coefficient()[active]
    g = None if rhs is None else rhs.values[active]
    u = u0.values[active].copy()
    k = 0
    while True:
        with np.errstate(over="ignore", invalid="ignore"):
            r = op(u) - (coef * spec.f(u) if g is None else g)
        if not np.all(np.isfinite(r)):
            raise DivergenceError("non-finite residual", k)
        yield k, u, r, tau
        with np.errstate(over="ignore", invalid="ignore"):
            u -= tau * r
        if cfg.positivity_projection:
            np.maximum(u, 0.0, out=u)
        if not np.all(np.isfinite(u)):
            raise DivergenceError("non-finite iterate", k + 1)
        k += 1


def _lift(spec, u_active):
    full = np.zeros(spec.grid.size)
    full[spec.omega_mask()] = u_active
    return GridFunction(spec.grid, full)


def solve_dirichlet(spec, cfg=None, u0=None, rhs=None):
    """Damped iteration u <- u - tau (L_h u - a(x_n) f(u)) on the Omega nodes.

    With ``rhs`` given, the nonlinear term is replaced by that fixed grid
    function (a linear problem L_h u = rhs).  Returns ``(u, SolveReport)``;
    the iterate is returned whether or not the residual reached the tolerance.
    """
    cfg = cfg or SolveConfig()
    if u0 is None:
        u0 = GridFunction.zeros(spec.grid)
    if rhs is None and cfg.check_hypotheses:
        rep = check_assumptions(spec.a, spec.f, spec.epigraph.l)
        if not rep.monotonicity_hypotheses:
            raise PreconditionError(f"coefficient/nonlinearity fail the standing hypotheses: {rep}")
    sups, ress = [], []
    for k, u, r, tau in _iterate(spec, cfg, u0, rhs):
        res = float(np.max(np.abs(r)))
        sups.append(float(np.max(np.abs(u))))
        ress.append(res)
        if res <= cfg.tol_residual or k >= cfg.max_iter:
            break
    report = SolveReport(res, k, res <= cfg.tol_residual, tau, sups, ress)
    return _lift(spec, u.copy()), report


def residual(u, spec, rhs=None):
    """sup over Omega nodes of |L_h u - a(x_n) f(u)| (or |L_h u - rhs|)."""
    active = spec.omega_mask()
    if np.any(u.values[~active] != 0):
        raise PreconditionError("u must vanish outside Omega")
    plan = build_plan(spec.grid, spec.constants)
    op = _ActiveOperator(plan, spec.grid.multi_indices()[active])
    v = u.values[active]
    target = spec.coefficient()[active] * spec.f(v) if rhs is None else rhs.values[active]
    return float(np.max(np.abs(op(v) - target)))


@dataclass
class ProbeReport:
    """Outcome of iterating from a positive start in a setting with no positive solution."""

    outcome: str  # "decayed" | "grew" | "diverged" | "converged" | "stalled"
    iterations: int
    threshold: float
    sup_history: list = field(repr=False)

    @property
    def final_sup(self):
        return self.sup_history[-1] if self.sup_history else float("nan")

    def as_dict(self):
        return {
            "outcome": self.outcome,
            "iters": self.iterations,
            "final_sup": self.final_sup,
            "threshold": self.threshold,
            "heuristic": True,
        }


def probe_nonexistence(spec, cfg=None, u0=None, threshold=1e-3, blowup=1e8):
    """Iterate from ``u0`` (default: 1 on the Omega nodes) and classify the run.

    This is a numerical probe, not a proof: "decayed" means the sup norm fell
    below ``threshold``, "grew" that it passed ``blowup``, "converged" that
    the residual reached the tolerance with the sup norm still above
    ``threshold`` (a positive solution, contradicting nonexistence).
    """
    cfg = cfg or SolveConfig()
    if u0 is None:
        u0 = GridFunction(spec.grid, spec.omega_mask().astype(float))
    sups = []
    outcome = "stalled"
    k = 0
    try:
        for k, u, r, tau in _iterate(spec, cfg, u0):
            s = float(np.max(np.abs(u)))
            sups.append(s)
            if s < threshold:
                outcome = "decayed"
                break
            if s > blowup:
                outcome = "grew"
                break
            if float(np.max(np.abs(r))) <= cfg.tol_residual:
                outcome = "converged"
                break
            if k >= cfg.max_iter:
                break
    except DivergenceError as exc:
        outcome, k = "diverged", exc.iteration
    return ProbeReport(outcome, k, threshold, sups)


def ball_nodes(x, center):
    """Nodes strictly inside the unit ball; nodes on the sphere (up to rounding) are outside."""
    return np.sum((x - np.asarray(center)) ** 2, axis=1) < 1.0 - 1e-9


@dataclass
class EigenPair:
    lambda_1: float
    phi: GridFunction
    residual: float
    iterations: int
    center: tuple = ()

    def ball_mask(self):
        return ball_nodes(self.phi.grid.coords(), self.center)


def ball_grid(R, h, n=2, margin=0.25):
    """Grid containing B_1(R e_n) with ``margin`` to spare; the centre is a node."""
    m = int(math.ceil((1.0 + margin) / h))
    kc = round(R / h)
    if abs(kc * h - R) > 1e-9:
        raise PreconditionError("R must be a multiple of h so the centre is a node")
    origin = [-m * h] * (n - 1) + [(kc - m) * h]
    return UniformGrid(tuple(origin), h, (2 * m + 1,) * n)


def eigen_smallest(R, grid, constants=None, tol=1e-10, max_iter=500, shift=None):
    """First eigenpair of L_h on B_1(R e_n) with zero exterior, by shifted inverse iteration.

    The shift defaults to the Gershgorin lower bound, which sits below every
    eigenvalue, so the iteration converges to the smallest one.
    """
    constants = constants or constants_for(grid.n)
    if not constants.rho_n > 0:
        raise PreconditionError(f"rho_n = {constants.rho_n:.6g} <= 0; the ball eigenproblem is gated on rho_n > 0")
    center = np.zeros(grid.n)
    center[-1] = R
    lo, hi = center - 1.0, center + 1.0
    if not (np.all(lo > np.asarray(grid.origin)) and np.all(hi < np.asarray(grid.upper))):
        raise PreconditionError("the ball B_1(R e_n) must lie strictly inside the grid box")
    plan = build_plan(grid, constants)
    x = grid.coords()
    ball = ball_nodes(x, center)
    A = operator_matrix(plan, grid.multi_indices()[ball])
    if shift is None:
        shift = float(np.min(np.diag(A) - (np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))))) - 1e-3
    fac = linalg.lu_factor(A - shift * np.eye(len(A)))
    v = np.ones(len(A))
    for it in range(1, max_iter + 1):
        y = linalg.lu_solve(fac, v)
        v = y / y[np.argmax(np.abs(y))]
        lam = float(v @ (A @ v) / (v @ v))
        res = float(np.max(np.abs(A @ v - lam * v)))
        if res <= tol:
            break
    else:
        raise ConvergenceError(f"inverse iteration stalled at residual {res:.3e} after {max_iter} steps")
    if np.all(v <= 0):
        v = -v
    full = np.zeros(grid.size)
    full[ball] = v
    return EigenPair(lam, GridFunction(grid, full), res, it, tuple(center))
