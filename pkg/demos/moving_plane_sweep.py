"""Solve the truncated problem on a paraboloid and sweep the moving plane."""
import numpy as np

from loglap import (
    CoefficientA,
    Epigraph,
    GridFunction,
    NonlinearityF,
    ProblemSpec,
    SolveConfig,
    UniformGrid,
    compatible_lambdas,
    manufactured_monotone,
    solve_dirichlet,
    sweep_monotonicity,
)
from loglap.problems import implanted_dip

domain = Epigraph("paraboloid", 1.0)
grid = UniformGrid.box((-4, -4), (4, 4), 0.1)
spec = ProblemSpec(domain, CoefficientA("clamped", c=1.0), NonlinearityF("power", 2.0), grid)

# Small positive start.  On this box the truncated operator is indefinite,
# so the iteration eventually runs away; 200 steps stays well before that.
u0 = GridFunction(grid, 1e-4 * manufactured_monotone(domain, grid).values * spec.omega_mask())
u, report = solve_dirichlet(spec, SolveConfig(max_iter=200), u0=u0)
print("solve:", report.as_dict(), "sup =", u.sup_norm())

lams = compatible_lambdas(grid, domain)
sweep = sweep_monotonicity(u, domain, lams, tol=1e-6)
print(f"{len(lams)} planes, verdict={sweep.verdict}, strict={sweep.strict}, skipped={sweep.skipped}")
for row in list(sweep.rows())[2:8]:
    print("  lambda=%.2f min_w=%.3e argmin=(%.1f, %.1f) H=%d A=%d D=%d" % row)

# The same sweep catches a hand-made counterexample
dipped = implanted_dip(manufactured_monotone(domain, grid), (0.0, 2.0))
bad = sweep_monotonicity(dipped, domain, lams)
k = int(np.nanargmin(bad.min_w))
print(f"dip: verdict={bad.verdict}, first failure at lambda={bad.first_failure:.2f}, "
      f"worst min_w={bad.min_w[k]:.3f} at {bad.argmin[k]}")
