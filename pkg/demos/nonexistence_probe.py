"""Iterate a = x_n, f(u) = u from a positive start and watch the sup norm."""
import numpy as np

from loglap import (
    CoefficientA,
    Epigraph,
    NonlinearityF,
    ProblemSpec,
    SolveConfig,
    UniformGrid,
    build_plan,
    operator_matrix,
    probe_nonexistence,
)

domain = Epigraph("paraboloid", 1.0)
for top in (1.0, 1.5, 2.0, 4.0):
    grid = UniformGrid.box((-top, -top), (top, top), 0.1)
    spec = ProblemSpec(domain, CoefficientA("shifted_linear"), NonlinearityF("linear"), grid)
    mask = spec.omega_mask()
    A = operator_matrix(build_plan(grid), grid.multi_indices()[mask])
    low = np.linalg.eigvalsh(A - np.diag(grid.coords()[mask, 1]))[0]
    rep = probe_nonexistence(spec, SolveConfig(max_iter=2000))
    # decay needs L_h - a positive definite; that only happens on small boxes
    print(f"box [-{top}, {top}]^2: min eig(L_h - a) = {low:+.3f}  probe -> {rep.outcome} after {rep.iterations} steps")
