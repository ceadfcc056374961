"""Lattice quadrature for the logarithmic Laplacian.

On a lattice of spacing ``h`` the principal part is discretised as::

    (-Delta)^L_h u(x) = sum_{0<|z|<=1} w(z) (u(x) - u(x+z))
                        + sum_{|z|>1} w(z) (-u(x+z))
                        - (c_n / 2) q_n(h) Delta_h u(x)

with cell weights ``w(z) = c_n h^n / |z|^n`` and ``z`` running over the
nonzero lattice offsets.  The last term stands in for the singular cell at
``z = 0``: after the odd part cancels, that cell contributes
``-(c_n/2) Delta u(x) q_n(h)`` with ``q_n(h) = (1/n) int_cell |z|^{2-n} dz``.
Near/far membership is decided by the cell centre.  Because ``u`` vanishes
off the box, the near-field coefficient of ``u(x)`` is the full lattice sum
``sum_{0<|z|<=1} w(z)`` whether or not the partner nodes lie in the box.

Everything reduces to ``L_h = d I - T`` where ``T`` is a symmetric lattice
convolution whose weights depend only on the integer ``|k|^2`` of the offset,
so reflection and translation symmetries of the lattice hold exactly.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import itertools
import math
import os

import numpy as np
from scipy import integrate

from .errors import ContractError, PreconditionError
from .grid import GridFunction, UniformGrid
from .special import Constants, constants_for, unit_sphere_area

_BLOCK_ENTRIES = 2_000_000


def _threads():
    n = int(os.environ.get("LOGLAP_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def self_cell_moment(n, h):
    """q_n(h) = (1/n) int_{[-h/2,h/2]^n} |z|^{2-n} dz.

    The cube splits into 2n pyramids with apex at the origin; scaling each
    pyramid to unit height leaves a smooth integral over [-1, 1]^{n-1}.
    """
    if n == 1:
        inner = 1.0
    else:
        fn = lambda *s: (1.0 + sum(t * t for t in s)) ** ((2 - n) / 2)
        inner, _ = integrate.nquad(fn, [(-1.0, 1.0)] * (n - 1), opts={"epsabs": 1e-14, "epsrel": 1e-13})
    return h * h * (2 * n / 8.0) * inner / n


def _near_lattice_sum(n, h, c_n):
    m = int(math.floor(1.0 / h + 1e-12))
    k = np.arange(-m, m + 1)
    r2 = sum(np.meshgrid(*([k * k] * n), indexing="ij"))
    sel = (r2 > 0) & (r2 * h * h <= 1.0 + 1e-12)
    return float(np.sum(c_n / r2[sel].astype(float) ** (n / 2)))


@dataclass(frozen=True)
class KernelPlan:
    """Weights of the discrete operator on one grid.

    ``near_total`` is the coefficient of u(x) from the near field,
    ``neighbour_weight`` the extra weight of the 2n nearest neighbours coming
    from the self-cell term.
    """

    grid: UniformGrid
    constants: Constants
    q_n: float
    near_total: float
    neighbour_weight: float

    @property
    def n(self):
        return self.grid.n

    @property
    def h(self):
        return self.grid.h

    @property
    def rho_n(self):
        return self.constants.rho_n

    @property
    def diagonal(self):
        """Diagonal entry of the principal-part matrix."""
        return self.near_total + 2 * self.n * self.neighbour_weight

    def cell_weight(self, offset):
        """w(z) = c_n h^n / |z|^n for integer offsets (0 at z = 0)."""
        r2 = np.sum(np.asarray(offset, dtype=float) ** 2, axis=-1)
        with np.errstate(divide="ignore"):
            w = self.constants.c_n / r2 ** (self.n / 2)
        return np.where(r2 > 0, w, 0.0)

    def is_near(self, offset):
        r2 = np.sum(np.asarray(offset, dtype=float) ** 2, axis=-1)
        return (r2 > 0) & (r2 * self.h * self.h <= 1.0 + 1e-12)

    def coupling(self, r2):
        """Off-diagonal magnitude as a function of the integer squared offset."""
        r2 = np.asarray(r2, dtype=float)
        with np.errstate(divide="ignore"):
            w = self.constants.c_n / r2 ** (self.n / 2)
        w = np.where(r2 > 0, w, 0.0)
        return w + np.where(r2 == 1, self.neighbour_weight, 0.0)


def build_plan(grid, constants=None):
    """Precompute the :class:`KernelPlan` for ``grid``."""
    if constants is None:
        constants = constants_for(grid.n)
    if constants.n != grid.n:
        raise ContractError("constants and grid have different dimensions")
    q = self_cell_moment(grid.n, grid.h)
    near = _near_lattice_sum(grid.n, grid.h, constants.c_n)
    return KernelPlan(
        grid=grid,
        constants=constants,
        q_n=q,
        near_total=near,
        neighbour_weight=0.5 * constants.c_n * q / grid.h**2,
    )


def _check(u, plan):
    if u.grid != plan.grid:
        raise ContractError("grid function and kernel plan use different grids")
    if not plan.h < 0.25:
        raise PreconditionError(f"grid spacing h={plan.h} must be below 1/4")


def _convolve(plan, out_idx, src_idx, src_vals):
    """sum_j coupling(out_i - src_j) * src_vals_j, with the i == j term dropped."""
    out = np.zeros(len(out_idx))
    if len(src_idx) == 0 or len(out_idx) == 0:
        return out
    rows = max(1, _BLOCK_ENTRIES // len(src_idx))
    starts = range(0, len(out_idx), rows)

    def block(s):
        d = out_idx[s : s + rows, None, :] - src_idx[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        out[s : s + rows] = plan.coupling(r2) @ src_vals

    if _threads() > 1 and len(starts) > 1:
        with ThreadPoolExecutor(_threads()) as pool:
            list(pool.map(block, starts))
    else:
        for s in starts:
            block(s)
    return out


def _apply(u, plan, rho):
    _check(u, plan)
    idx = plan.grid.multi_indices()
    nz = u.values != 0
    conv = _convolve(plan, idx, idx[nz], u.values[nz])
    return GridFunction(plan.grid, (plan.diagonal + rho) * u.values - conv)


def apply_principal_part(u, plan):
    """Discrete (-Delta)^L u at every node of the grid."""
    return _apply(u, plan, 0.0)


def apply_log_laplacian(u, plan):
    """Discrete L_Delta u = (-Delta)^L u + rho_n u at every node of the grid."""
    return _apply(u, plan, plan.rho_n)


def evaluate_at(u, plan, points, principal=False):
    """Discrete L_Delta u (or its principal part) at lattice points.

    Points may lie outside the box, where u itself is zero.
    """
    _check(u, plan)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    idx = plan.grid.lattice_index(pts)
    nz = u.values != 0
    conv = _convolve(plan, idx, plan.grid.multi_indices()[nz], u.values[nz])
    rho = 0.0 if principal else plan.rho_n
    return (plan.diagonal + rho) * u.at_lattice(idx) - conv


def operator_matrix(plan, idx, principal=False):
    """Dense matrix of the operator restricted to the lattice nodes ``idx``
    with zero exterior values (symmetric by construction)."""
    idx = np.asarray(idx, dtype=np.int64)
    m = len(idx)
    A = np.empty((m, m))
    rows = max(1, _BLOCK_ENTRIES // max(m, 1))
    for s in range(0, m, rows):
        d = idx[s : s + rows, None, :] - idx[None, :, :]
        A[s : s + rows] = -plan.coupling(np.einsum("ijk,ijk->ij", d, d))
    rho = 0.0 if principal else plan.rho_n
    A[np.diag_indices(m)] = plan.diagonal + rho
    return A


def fourier_oracle(sigma, n=2, profile="gaussian"):
    """L_Delta u(0) for u(x) = exp(-|x|^2 / (2 sigma^2)) from the symbol 2 ln|xi|.

    With the forward transform int u(x) e^{-i x.xi} dx the value is
    (2 pi)^{-n} int 2 ln|xi| u_hat(xi) dxi, reduced here to a radial integral.
    """
    if profile != "gaussian":
        raise ContractError(f"unsupported profile {profile!r}; only 'gaussian' has an oracle")
    if n not in (1, 2, 3):
        raise ContractError("the Fourier oracle supports n in {1, 2, 3}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    norm = unit_sphere_area(n) * (sigma * sigma / (2 * math.pi)) ** (n / 2)
    fn = lambda r: 2.0 * math.log(r) * math.exp(-0.5 * (sigma * r) ** 2) * r ** (n - 1)
    scale = 1.0 / sigma
    parts = [(0.0, scale), (scale, 8 * scale), (8 * scale, np.inf)]
    total = sum(integrate.quad(fn, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0] for a, b in parts)
    return norm * total


def slab_kernel_mass(h_param, n=2):
    """int_S |y|^{-n} dy over the slab S = {h/2 < y_n < 1/4, |y'| < 1/8} (n = 2)."""
    if n != 2:
        raise PreconditionError("slab_kernel_mass is implemented for n = 2")
    if not 0 < h_param < 0.25:
        raise PreconditionError(f"h must lie in (0, 1/4) (got {h_param})")
    val, _ = integrate.dblquad(
        lambda t, s: 1.0 / (s * s + t * t), h_param / 2, 0.25, -0.125, 0.125, epsabs=1e-12, epsrel=1e-11
    )
    return val


def slab_bound_constant(n=2):
    """c = |S^{n-2}| int_0^{1/2} t^{n-2} (1 + t^2)^{-n/2} dt."""
    inner, _ = integrate.quad(lambda t: t ** (n - 2) * (1 + t * t) ** (-n / 2), 0.0, 0.5, epsabs=1e-14)
    return unit_sphere_area(n - 1) * inner


def slab_lower_bound(h_param, n=2):
    """c (ln(1/4) - ln h): the logarithmically divergent lower bound on the slab mass."""
    return slab_bound_constant(n) * (math.log(0.25) - math.log(h_param))
