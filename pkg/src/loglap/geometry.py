"""Coercive epigraphs, reflections across T_lambda = {x_n = lambda} and the
H / A / D region decomposition used by the moving-plane method.

Points are arrays whose last axis holds the coordinates ``(x', x_n)``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PreconditionError

FAMILIES = ("paraboloid", "cone", "flat_bottom")


@dataclass(frozen=True)
class Epigraph:
    """Omega = {x_n > phi(x')} for a parametric coercive profile phi.

    ``paraboloid``: alpha |x'|^2; ``cone``: alpha |x'|;
    ``flat_bottom``: alpha max(|x'| - r0, 0).
    """

    family: str = "paraboloid"
    alpha: float = 1.0
    r0: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown epigraph family {self.family!r}; expected one of {FAMILIES}")
        if not self.alpha > 0:
            raise ValueError("epigraph alpha must be positive")
        if self.r0 < 0:
            raise ValueError("epigraph r0 must be nonnegative")

    @property
    def l(self):
        """Infimum of phi; every built-in family attains it at x' = 0."""
        return 0.0

    def lipschitz(self, radius):
        """Lipschitz constant of phi on {|x'| <= radius}."""
        if self.family == "paraboloid":
            return 2.0 * self.alpha * radius
        return self.alpha

    def phi(self, xp):
        return phi_eval(self, xp)

    def contains(self, x):
        """Open-set membership x_n > phi(x'); boundary points are outside."""
        x = np.asarray(x, dtype=float)
        return x[..., -1] > phi_eval(self, x[..., :-1])


def phi_eval(e, xp):
    """Evaluate phi at ``xp`` (last axis of length n-1)."""
    xp = np.asarray(xp, dtype=float)
    r = np.sqrt(np.sum(xp * xp, axis=-1))
    if e.family == "paraboloid":
        out = e.alpha * r * r
    elif e.family == "cone":
        out = e.alpha * r
    else:
        out = e.alpha * np.maximum(r - e.r0, 0.0)
    return float(out) if np.ndim(out) == 0 else out


class RegionLabel(str, Enum):
    H = "H"
    A = "A"
    D = "D"
    ABOVE = "ABOVE"


def reflect(x, lam):
    """x^lambda = (x', 2 lambda - x_n)."""
    y = np.array(x, dtype=float, copy=True)
    y[..., -1] = 2.0 * lam - y[..., -1]
    return y


def classify(e, lam, x):
    """Region label of a single point ``x`` relative to T_lambda.

    Ties: x_n = lambda is ABOVE, x_n = phi(x') is outside Omega and
    x_n = 2 lambda - phi(x') is D.
    """
    return RegionLabel(classify_points(e, lam, np.asarray(x, dtype=float)[None, :])[0])


def classify_points(e, lam, x, inside=None):
    """Vectorised :func:`classify`; returns an array of label strings.

    ``inside`` optionally replaces membership in Omega by a truncated domain:
    a callable mapping points to booleans (used for box-truncated problems,
    where Omega is cut down to the computational box).
    """
    if not lam > e.l:
        raise PreconditionError(f"lambda must exceed l = {e.l} (got {lam})")
    x = np.asarray(x, dtype=float)
    member = e.contains if inside is None else inside
    above = x[..., -1] >= lam
    in_h = member(x) & ~above
    in_a = member(reflect(x, lam)) & ~above & ~in_h
    out = np.full(x.shape[:-1], RegionLabel.D.value, dtype=object)
    out[in_a] = RegionLabel.A.value
    out[in_h] = RegionLabel.H.value
    out[above] = RegionLabel.ABOVE.value
    return out


def kernel_distance_pair(x, y, lam):
    """Return (|x - y|, |x - y^lambda|)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.linalg.norm(x - y, axis=-1)
    d_ref = np.linalg.norm(x - reflect(y, lam), axis=-1)
    return d, d_ref
