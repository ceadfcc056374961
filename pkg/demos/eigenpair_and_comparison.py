"""First eigenpair on B_1(3 e_2), the comparison construction and the ball check."""
import numpy as np

from loglap import (
    GridFunction,
    ball_grid,
    ball_mp_check,
    build_plan,
    comparison_construct,
    eigen_smallest,
)

for h in (0.1, 0.05):
    eig = eigen_smallest(3.0, ball_grid(3.0, h))
    print(f"h={h}: lambda_1={eig.lambda_1:.6f}  residual={eig.residual:.1e}  iterations={eig.iterations}")

phi = eig.phi
plan = build_plan(phi.grid)
ball = eig.ball_mask()

# phi plus a small floor outside the ball satisfies the ball check's hypotheses
u = GridFunction(phi.grid, phi.values + 0.01 * ~ball)
print("ball check on phi + floor:", ball_mp_check(u, 3.0, plan).verdict)

# v = M u touches phi at the witness, so v - phi has a zero inside the ball
x = phi.grid.coords()
u = GridFunction(phi.grid, phi.values + 0.2 * np.exp(-np.sum((x - (0.3, 3.2)) ** 2, axis=1)))
v, M, witness = comparison_construct(u, eig)
print(f"M={M:.4f} witness={witness}")
rep = ball_mp_check(v - phi, 3.0, plan)
print("ball check on v - phi:", rep.verdict, rep.data.get("reasons"))
