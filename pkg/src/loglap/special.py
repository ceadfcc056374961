"""Special functions and the dimensional constants of the logarithmic Laplacian.

The operator carries two constants that depend only on the dimension ``n``::

    c_n   = pi**(-n/2) * Gamma(n/2) = 2 / |S^{n-1}|
    rho_n = 2 ln 2 + psi(n/2) - gamma

``rho_n`` is negative for ``n = 1`` (``rho_1 = -2 gamma``); it is reported as is.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import special as _sp

EULER_GAMMA = float(np.euler_gamma)


def gamma_fn(x):
    """Gamma function for positive real ``x``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"gamma_fn: domain error, x must be positive (got {x})")
    return math.gamma(x)


def digamma(x):
    """Digamma function psi = Gamma'/Gamma for positive real ``x``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"digamma: domain error, x must be positive (got {x})")
    return float(_sp.digamma(x))


def unit_sphere_area(n):
    """Surface measure of the unit sphere S^{n-1} in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2) / gamma_fn(n / 2)


@dataclass(frozen=True)
class Constants:
    n: int
    c_n: float
    rho_n: float
    gamma_euler: float
    psi_half_n: float


def constants_for(n):
    """Return the :class:`Constants` bundle for dimension ``n >= 1``."""
    if int(n) != n or n < 1:
        raise ValueError(f"constants_for: domain error, n must be an integer >= 1 (got {n})")
    n = int(n)
    psi = digamma(n / 2)
    c_n = math.pi ** (-n / 2) * gamma_fn(n / 2)
    rho_n = 2.0 * math.log(2.0) + psi - EULER_GAMMA
    return Constants(n=n, c_n=c_n, rho_n=rho_n, gamma_euler=EULER_GAMMA, psi_half_n=psi)
