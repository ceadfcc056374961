"""Moving-plane diagnostics on grid functions.

All checks work on the box-truncated problem: the domain is Omega cut down
to the grid box (u vanishes outside it), and the H / A / D labels are taken
relative to that truncated domain.  Planes T_lambda are restricted to node
planes or midway between them so reflections map nodes to nodes exactly.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import integrate

from .errors import PreconditionError, ContractError
from .geometry import RegionLabel, classify_points, reflect
from .grid import GridFunction, UniformGrid
from .operator import build_plan, evaluate_at
from .solver import ball_nodes

CONSISTENT = "consistent"
VIOLATED = "violated"
UNMET = "precondition_unmet"


def _in_box(grid, x):
    lo = np.asarray(grid.origin) - 1e-9 * grid.h
    hi = np.asarray(grid.upper) + 1e-9 * grid.h
    return np.all((x >= lo) & (x <= hi), axis=-1)


def truncated_member(epigraph, grid):
    """Membership predicate for Omega intersected with the grid box."""
    return lambda x: epigraph.contains(x) & _in_box(grid, np.asarray(x, dtype=float))


def region_labels(epigraph, lam, grid):
    """Labels of all nodes of ``grid`` relative to the truncated domain.

    Nodes on T_lambda up to coordinate rounding are snapped onto the plane,
    so they are labelled ABOVE whatever the floating-point noise.
    """
    x = grid.coords()
    on_plane = np.abs(x[:, -1] - lam) <= 1e-9 * grid.h
    x[on_plane, -1] = lam
    return classify_points(epigraph, lam, x, inside=truncated_member(epigraph, grid))


def symmetric_grid(grid, lam):
    """Smallest grid on the same lattice, symmetric about T_lambda, containing ``grid``."""
    K = grid.reflection_row(lam)
    d = grid.dims[-1]
    kmin, kmax = min(0, K - (d - 1)), max(d - 1, K)
    origin = grid.origin[:-1] + (grid.origin[-1] + kmin * grid.h,)
    return UniformGrid(origin, grid.h, grid.dims[:-1] + (kmax - kmin + 1,))


def reflect_function(u, lam):
    """u_lambda(x) = u(x^lambda) on the grid symmetric about T_lambda."""
    K = u.grid.reflection_row(lam)
    sg = symmetric_grid(u.grid, lam)
    idx = sg.multi_indices() + u.grid.offset_to(sg)
    idx[:, -1] = K - idx[:, -1]
    return GridFunction(sg, u.at_lattice(idx))


def w_lambda(u, lam):
    """w_lambda = u_lambda - u on the grid symmetric about T_lambda.

    The result is exactly antisymmetric: w(x^lambda) = -w(x) at every node pair.
    """
    ul = reflect_function(u, lam)
    return ul - u.embed(ul.grid)


def _w_on_grid(u, lam):
    """w_lambda sampled on the nodes of u's own grid."""
    K = u.grid.reflection_row(lam)
    idx = u.grid.multi_indices()
    ref = idx.copy()
    ref[:, -1] = K - ref[:, -1]
    return u.at_lattice(ref) - u.values


def _lw_at(u, lam, point, constants, principal=False):
    """Discrete L_Delta w_lambda at one node, with w on the symmetric grid."""
    w = w_lambda(u, lam)
    return float(evaluate_at(w, build_plan(w.grid, constants), [point], principal=principal)[0])


def compatible_lambdas(grid, epigraph, lam_min=None, lam_max=None, step=None):
    """Reflection-compatible lambda values in (l, lam_max].

    By default ``lam_max = (l + top of box) / 2``, the largest lambda for which
    the reflection of H_lambda stays inside the box.  ``step`` must be a
    multiple of h/2.
    """
    half = grid.h / 2
    step = half if step is None else step
    m = round(step / half)
    if m < 1 or abs(m * half - step) > 1e-9:
        raise PreconditionError("lambda step must be a positive multiple of h/2")
    lo = epigraph.l if lam_min is None else lam_min
    hi = (epigraph.l + grid.upper[-1]) / 2 if lam_max is None else lam_max
    o = grid.origin[-1]
    j0 = math.floor((lo - o) / half + 1e-9)
    if lam_min is None or o + j0 * half <= epigraph.l + 1e-12:
        j0 += 1
    if lam_min is not None and o + j0 * half < lam_min - 1e-9:
        j0 += 1
    out = []
    j = j0
    while o + j * half <= hi + 1e-9:
        lam = round(o + j * half, 12)
        if lam > epigraph.l + 1e-12:
            out.append(lam)
        j += m
    return np.array(out)


@dataclass
class SweepReport:
    lambdas: np.ndarray
    min_w: np.ndarray
    argmin: np.ndarray
    region_counts: list
    verdict: bool
    tol: float
    skipped: list = field(default_factory=list)

    @property
    def first_failure(self):
        """Smallest lambda whose minimum fell below -tol (None if none did)."""
        for lam, m in zip(self.lambdas, self.min_w):
            if np.isfinite(m) and m < -self.tol:
                return float(lam)
        return None

    @property
    def strict(self):
        """Every computed minimum is strictly positive."""
        m = self.min_w[np.isfinite(self.min_w)]
        return bool(m.size and np.all(m > 0))

    def rows(self):
        for lam, m, x, c in zip(self.lambdas, self.min_w, self.argmin, self.region_counts):
            yield (lam, m, *x, *c)


def sweep_monotonicity(u, epigraph, lambdas, tol=1e-8):
    """Minimum of w_lambda over the H nodes for every lambda.

    The verdict holds when each minimum is at least ``-tol * ||u||_inf``.
    A lambda with no H nodes is skipped and listed in ``skipped``.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    x = u.grid.coords()
    scale = u.sup_norm()
    mins, args, counts, skipped = [], [], [], []
    for lam in lambdas:
        if not lam > epigraph.l:
            raise PreconditionError(f"lambda={lam} must exceed l={epigraph.l}")
        w = _w_on_grid(u, lam)
        labels = region_labels(epigraph, lam, u.grid)
        H = labels == RegionLabel.H.value
        counts.append(tuple(int(np.sum(labels == r.value)) for r in (RegionLabel.H, RegionLabel.A, RegionLabel.D)))
        if not np.any(H):
            skipped.append(float(lam))
            mins.append(np.nan)
            args.append(np.full(u.grid.n, np.nan))
            continue
        sel = np.flatnonzero(H)
        i = sel[np.argmin(w[sel])]
        mins.append(float(w[i]))
        args.append(x[i])
    mins = np.array(mins)
    ok = mins[np.isfinite(mins)] >= -tol * scale
    return SweepReport(lambdas, mins, np.array(args), counts, bool(np.all(ok)), tol * scale, skipped)


@dataclass
class DiagnosticsReport:
    kind: str
    data: dict
    verdict: str

    def to_json(self):
        return json.dumps({"kind": self.kind, "verdict": self.verdict, "data": _plain(self.data)}, sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.10g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def antisym_mp_check(u, lam, spec, plan, tol=None):
    """Sign of L_h w_lambda at an interior zero of w_lambda >= 0.

    Consistent when the minimum of w over H is not close to zero, or when it
    is and L_h w is strictly negative there.  The gate is the usual one: w
    nonnegative on H, positive on A and zero on D.
    """
    e = spec.epigraph
    tol = 1e-8 * u.sup_norm() if tol is None else tol
    w = _w_on_grid(u, lam)
    labels = region_labels(e, lam, u.grid)
    H, A, D = (labels == r.value for r in (RegionLabel.H, RegionLabel.A, RegionLabel.D))
    data = {"lambda": lam, "tol": tol}
    reasons = []
    if not np.any(H):
        reasons.append("H is empty")
    elif np.min(w[H]) < -tol:
        reasons.append("w < 0 somewhere on H")
    if np.any(A) and np.min(w[A]) <= 0:
        reasons.append("w not positive on A")
    if np.any(D) and np.max(np.abs(w[D])) > tol:
        reasons.append("w not zero on D")
    if reasons:
        data["reasons"] = reasons
        return DiagnosticsReport("antisym_mp", data, UNMET)
    sel = np.flatnonzero(H)
    i = sel[np.argmin(w[sel])]
    x0 = u.grid.coords()[i]
    data.update(x0=x0, w_min=float(w[i]))
    if w[i] > tol:
        data["branch"] = "no interior zero"
        return DiagnosticsReport("antisym_mp", data, CONSISTENT)
    lw = _lw_at(u, lam, x0, plan.constants)
    data.update(branch="interior zero", Lw=lw)
    ul, uu = u.values[i] + w[i], u.values[i]
    if ul > 0 and uu > 0:
        from .problems import lipschitz_quotient

        m = lipschitz_quotient(spec.f, uu, ul)
        data["aMw"] = float(spec.a(x0[-1]) * m * w[i])
    return DiagnosticsReport("antisym_mp", data, CONSISTENT if lw < 0 else VIOLATED)


def boundary_quotient(u, epigraph, lambda0, k_max, plan, tol=None):
    """Quotients L_h w_{lambda_k}(x^k) / delta_k along lambda_k decreasing to lambda0.

    lambda_k = lambda0 + (k_max - k + 1) h / 2; x^k is the minimiser of
    w_{lambda_k} over H and delta_k = lambda_k - x^k_n.  Only negative minima
    produce a quotient.
    """
    grid = u.grid
    data = {"lambda0": lambda0, "records": []}
    if k_max <= 0:
        return DiagnosticsReport("boundary_quotient", data, UNMET)
    w0 = _w_on_grid(u, lambda0)
    H0 = region_labels(epigraph, lambda0, grid) == RegionLabel.H.value
    if not np.any(H0) or np.min(w0[H0]) <= 0:
        data["reasons"] = ["w_lambda0 is not positive on H_lambda0"]
        return DiagnosticsReport("boundary_quotient", data, UNMET)
    x = grid.coords()
    for k in range(1, k_max + 1):
        lam = lambda0 + (k_max - k + 1) * grid.h / 2
        w = _w_on_grid(u, lam)
        sel = np.flatnonzero(region_labels(epigraph, lam, grid) == RegionLabel.H.value)
        i = sel[np.argmin(w[sel])]
        rec = {"k": k, "lambda": lam, "w_min": float(w[i]), "x": x[i]}
        if w[i] < 0:
            delta = lam - x[i, -1]
            lw = _lw_at(u, lam, x[i], plan.constants)
            rec.update(delta=delta, Lw=lw, quotient=lw / delta)
        data["records"].append(rec)
    q = [r["quotient"] for r in data["records"] if "quotient" in r]
    if not q:
        data["reasons"] = ["no negative minima"]
        return DiagnosticsReport("boundary_quotient", data, UNMET)
    return DiagnosticsReport("boundary_quotient", data, CONSISTENT if all(v < 0 for v in q) else VIOLATED)


def set_difference_volume(a, b, rng_seed=0, samples=2_000_000):
    """|B_1(a) \\ B_1(b)| by quadrature (n = 2) or seeded Monte Carlo (n != 2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    if n == 2:
        def chord(t):
            ca = math.sqrt(max(0.0, 1.0 - (t - a[1]) ** 2))
            s = (t - b[1]) ** 2
            lo, hi = a[0] - ca, a[0] + ca
            if s >= 1.0:
                return hi - lo
            cb = math.sqrt(1.0 - s)
            blo, bhi = b[0] - cb, b[0] + cb
            overlap = max(0.0, min(hi, bhi) - max(lo, blo))
            return (hi - lo) - overlap

        pts = [t for t in (b[1] - 1.0, b[1] + 1.0) if a[1] - 1.0 < t < a[1] + 1.0]
        val, _ = integrate.quad(chord, a[1] - 1.0, a[1] + 1.0, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-11)
        return val
    rng = np.random.default_rng(rng_seed)
    y = a + rng.uniform(-1, 1, size=(samples, n))
    ina = np.sum((y - a) ** 2, axis=1) < 1
    inb = np.sum((y - b) ** 2, axis=1) < 1
    return float(np.mean(ina & ~inb)) * 2.0**n


def ball_mp_check(u, R, plan, constants=None, tol=None):
    """Maximum principle on B_1(R e_n): L_h u >= 0 inside and u > 0 outside imply u > 0 inside.

    Also reports the two set volumes |B_1(x0) \\ A| and |B_1(R e_n) \\ A|,
    A = B_1(x0) & B_1(R e_n), at the inside minimiser x0; they must agree.
    """
    constants = constants or plan.constants
    grid = u.grid
    if u.grid != plan.grid:
        raise ContractError("grid function and kernel plan use different grids")
    tol = 1e-8 * u.sup_norm() if tol is None else tol
    c = np.zeros(grid.n)
    c[-1] = R
    data = {"R": R}
    reasons = []
    if not (np.all(c - 1 > np.asarray(grid.origin)) and np.all(c + 1 < np.asarray(grid.upper))):
        reasons.append("ball not inside grid box")
    if not constants.rho_n > 0:
        reasons.append("rho_n <= 0")
    x = grid.coords()
    inside = ball_nodes(x, c)
    if np.any(u.values[~inside] <= 0):
        reasons.append("u not positive outside the ball")
    lu = evaluate_at(u, plan, x[inside])
    data["min_Lu_inside"] = float(np.min(lu))
    if np.min(lu) < -tol:
        reasons.append("L_h u < 0 somewhere inside the ball")
    sel = np.flatnonzero(inside)
    i = sel[np.argmin(u.values[sel])]
    x0 = x[i]
    v1 = set_difference_volume(x0, c)
    v2 = set_difference_volume(c, x0)
    data.update(
        x0=x0,
        u_min=float(u.values[i]),
        vol_x0_minus_A=v1,
        vol_ball_minus_A=v2,
        volumes_agree=volumes_agree(v1, v2),
    )
    if reasons:
        data["reasons"] = reasons
        return DiagnosticsReport("ball_mp", data, UNMET)
    return DiagnosticsReport("ball_mp", data, CONSISTENT if u.values[i] > 0 else VIOLATED)


def volumes_agree(v1, v2, rel=0.01):
    if v1 == 0.0 and v2 == 0.0:
        return True
    return abs(v1 - v2) <= rel * max(abs(v1), abs(v2))


def comparison_construct(u, eig):
    """v = M u with M = max over ball nodes of phi / u; returns (v, M, witness).

    At the witness (the first maximiser in node order) v equals phi.
    """
    phi = eig.phi
    if u.grid != phi.grid:
        u = u.embed(phi.grid)
    ball = eig.ball_mask()
    if np.any(u.values[ball] <= 0):
        raise PreconditionError("u must be positive at every ball node")
    sel = np.flatnonzero(ball)
    ratio = phi.values[sel] / u.values[sel]
    j = int(np.argmax(ratio))
    M = float(ratio[j])
    v = u * M
    i = sel[j]
    if abs(v.values[i] - phi.values[i]) > 1e-10 * abs(phi.values[i]):
        raise AssertionError("v(witness) != phi(witness)")
    return v, M, phi.grid.coords()[i]


def kernel_gap(x, y, lam, n=None):
    """1/|x - y^lambda|^n - 1/|x - y|^n (negative for x, y strictly below T_lambda)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1] if n is None else n
    d = np.linalg.norm(x - y, axis=-1)
    dr = np.linalg.norm(x - reflect(y, lam), axis=-1)
    return dr ** (-float(n)) - d ** (-float(n))
