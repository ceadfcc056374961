"""Box-truncated uniform lattices and functions on them.

A :class:`GridFunction` is implicitly zero outside its grid box, so every
grid function has compact support.  Node order is row-major over ``dims``
(the last axis, x_n, varies fastest).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, PreconditionError

_TOL = 1e-9


@dataclass(frozen=True)
class UniformGrid:
    origin: tuple
    h: float
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "h", float(self.h))
        if len(self.origin) != len(self.dims):
            raise ValueError("origin and dims must have the same length")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive (got {self.h})")
        if min(self.dims) < 1:
            raise ValueError("grid dims must be positive")

    @classmethod
    def box(cls, lower, upper, h):
        """Grid with nodes on ``lower + h k`` covering [lower, upper] per axis."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        dims = np.floor((upper - lower) / h + _TOL).astype(int) + 1
        return cls(tuple(lower), h, tuple(dims))

    @property
    def n(self):
        return len(self.dims)

    @property
    def size(self):
        return int(np.prod(self.dims))

    @property
    def upper(self):
        return tuple(o + self.h * (d - 1) for o, d in zip(self.origin, self.dims))

    def multi_indices(self):
        """(N, n) integer array of node indices in row-major order."""
        grids = np.meshgrid(*[np.arange(d) for d in self.dims], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def coords(self):
        """(N, n) node coordinates."""
        return np.asarray(self.origin) + self.h * self.multi_indices()

    def flat_index(self, idx):
        """Flat index of multi-indices ``idx`` (..., n); -1 for off-grid."""
        idx = np.asarray(idx)
        ok = np.all((idx >= 0) & (idx < np.asarray(self.dims)), axis=-1)
        flat = np.ravel_multi_index(tuple(np.moveaxis(np.where(ok[..., None], idx, 0), -1, 0)), self.dims)
        return np.where(ok, flat, -1)

    def lattice_index(self, x):
        """Integer lattice indices of points ``x`` relative to the origin.

        Raises if a point is not a lattice node; points may lie outside the box.
        """
        k = (np.asarray(x, dtype=float) - np.asarray(self.origin)) / self.h
        kr = np.rint(k)
        if np.any(np.abs(k - kr) > 1e-6):
            raise PreconditionError("point is not a node of the grid lattice")
        return kr.astype(np.int64)

    def same_lattice(self, other):
        if self.n != other.n or abs(self.h - other.h) > _TOL * self.h:
            return False
        k = (np.asarray(other.origin) - np.asarray(self.origin)) / self.h
        return bool(np.all(np.abs(k - np.rint(k)) < 1e-6))

    def offset_to(self, other):
        """Integer shift from this grid's origin to ``other``'s origin."""
        if not self.same_lattice(other):
            raise ContractError("grids do not share a lattice")
        return np.rint((np.asarray(other.origin) - np.asarray(self.origin)) / self.h).astype(np.int64)

    def contains_box(self, lower, upper):
        lo = np.asarray(self.origin) - _TOL
        hi = np.asarray(self.upper) + _TOL
        return bool(np.all(np.asarray(lower) >= lo) and np.all(np.asarray(upper) <= hi))

    def reflection_row(self, lam):
        """Integer K with x_n-row k reflecting to row K - k; raises if none exists."""
        K = 2.0 * (lam - self.origin[-1]) / self.h
        Kr = round(K)
        if abs(K - Kr) > 1e-6:
            raise PreconditionError(
                f"lambda={lam} is not reflection-compatible with the grid "
                "(it must lie on a node plane or midway between two)"
            )
        return int(Kr)

    def is_compatible(self, lam):
        try:
            self.reflection_row(lam)
        except PreconditionError:
            return False
        return True

    def __eq__(self, other):
        if not isinstance(other, UniformGrid):
            return NotImplemented
        return (
            self.dims == other.dims
            and abs(self.h - other.h) <= _TOL * self.h
            and np.allclose(self.origin, other.origin, atol=_TOL * self.h, rtol=0)
        )

    def __hash__(self):
        return hash((self.dims, round(self.h, 12)))


@dataclass
class GridFunction:
    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.size != self.grid.size:
            raise ContractError(f"values have length {self.values.size}, grid has {self.grid.size} nodes")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("grid function values must be finite")

    @classmethod
    def from_callable(cls, grid, fn):
        """Sample ``fn`` at the node coordinates; ``fn`` takes an (N, n) array."""
        return cls(grid, fn(grid.coords()))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.size))

    def array(self):
        return self.values.reshape(self.grid.dims)

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def at_lattice(self, idx):
        """Values at lattice indices (relative to this grid), zero off the box."""
        flat = self.grid.flat_index(idx)
        return np.where(flat >= 0, self.values[np.maximum(flat, 0)], 0.0)

    def embed(self, grid):
        """Restrict / zero-extend onto another grid of the same lattice."""
        shift = self.grid.offset_to(grid)
        return GridFunction(grid, self.at_lattice(grid.multi_indices() + shift))

    def __add__(self, other):
        _same(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__


def _same(a, b):
    if a.grid != b.grid:
        raise ContractError("grid functions live on different grids")


def gaussian(grid, sigma, center=None):
    """exp(-|x - center|^2 / (2 sigma^2)) sampled on ``grid``."""
    c = np.zeros(grid.n) if center is None else np.asarray(center, dtype=float)
    return GridFunction.from_callable(grid, lambda x: np.exp(-np.sum((x - c) ** 2, axis=1) / (2 * sigma**2)))


def _fmt(v):
    return f"{v:.10g}"


def write_gridfunction(u, path):
    """Write the text format: a ``# n=.. h=.. origin=.. dims=..`` header, then
    one ``x1,...,xn,value`` line per node in row-major order."""
    g = u.grid
    lines = [
        f"# n={g.n} h={_fmt(g.h)} origin={','.join(_fmt(o) for o in g.origin)} "
        f"dims={','.join(str(d) for d in g.dims)}"
    ]
    for x, v in zip(g.coords(), u.values):
        lines.append(",".join(_fmt(c) for c in x) + "," + _fmt(v))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_gridfunction(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ContractError("grid function file must start with a '#' header line")
        meta = dict(tok.split("=", 1) for tok in header[1:].split())
        try:
            n = int(meta["n"])
            grid = UniformGrid(
                tuple(float(t) for t in meta["origin"].split(",")),
                float(meta["h"]),
                tuple(int(t) for t in meta["dims"].split(",")),
            )
        except (KeyError, ValueError) as exc:
            raise ContractError(f"bad grid function header: {header!r}") from exc
        if grid.n != n:
            raise ContractError("header dimension does not match origin/dims")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (grid.size, n + 1):
        raise ContractError(f"expected {grid.size} rows of {n + 1} columns, got {data.shape}")
    return GridFunction(grid, data[:, -1])
