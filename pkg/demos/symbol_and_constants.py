"""Constants, the Gaussian symbol check and the sign change of L u(0)."""
import math

import numpy as np

from loglap import UniformGrid, build_plan, constants_for, evaluate_at, fourier_oracle, gaussian

# c_n and rho_n for the first few dimensions; rho_1 is negative
for n in (1, 2, 3):
    c = constants_for(n)
    print(f"n={n}  c_n={c.c_n:.10g}  rho_n={c.rho_n:.10g}")

# Gaussian at the origin: lattice quadrature vs the radial Fourier integral
h, radius = 0.05, 8.0
m = round(radius / h)
grid = UniformGrid((-m * h, -m * h), h, (2 * m + 1, 2 * m + 1))
plan = build_plan(grid)
for sigma in (0.8, 0.9, 1.0, 1.3, 2.0):
    quad = evaluate_at(gaussian(grid, sigma), plan, [[0.0, 0.0]])[0]
    oracle = fourier_oracle(sigma)
    print(f"sigma={sigma:<4} quadrature={quad:+.6f}  oracle={oracle:+.6f}  rel={abs(quad - oracle) / abs(oracle):.2e}")

# Wide Gaussians see mostly low frequencies, where 2 ln|xi| < 0
sigma_star = math.exp((math.log(2) - np.euler_gamma) / 2)
print(f"sign change at sigma* = {sigma_star:.6f}")
