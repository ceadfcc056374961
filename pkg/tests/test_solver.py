import numpy as np
import pytest

from loglap.errors import ConfigError, ContractError, DivergenceError, PreconditionError
from loglap.geometry import Epigraph
from loglap.grid import GridFunction, UniformGrid
from loglap.operator import apply_log_laplacian, build_plan, evaluate_at, operator_matrix
from loglap.problems import CoefficientA, NonlinearityF, ProblemSpec, manufactured_monotone
from loglap.solver import (
    SolveConfig,
    _ActiveOperator,
    ball_grid,
    eigen_smallest,
    probe_nonexistence,
    residual,
    solve_dirichlet,
)
from loglap.special import constants_for

PARA = Epigraph("paraboloid", 1.0)
LINEAR = NonlinearityF("linear")
SQUARE = NonlinearityF("power", 2.0)


@pytest.fixture(scope="module")
def small_grid():
    # small enough that the truncated operator is positive definite on Omega
    return UniformGrid.box((-1.5, -1.5), (1.5, 1.5), 0.1)


def _manufactured(spec):
    u = manufactured_monotone(spec.epigraph, spec.grid)
    return GridFunction(spec.grid, u.values * spec.omega_mask())


def test_residual_of_zero(small_grid):
    spec = ProblemSpec(PARA, CoefficientA(), SQUARE, small_grid)
    assert residual(GridFunction.zeros(small_grid), spec) == 0.0


def test_residual_positive_for_random_u(small_grid):
    spec = ProblemSpec(PARA, CoefficientA(), SQUARE, small_grid)
    rng = np.random.default_rng(0)
    u = GridFunction(small_grid, rng.uniform(size=small_grid.size) * spec.omega_mask())
    r = residual(u, spec)
    assert np.isfinite(r) and r > 0


def test_manufactured_rhs_recovered(small_grid):
    spec = ProblemSpec(PARA, CoefficientA(), LINEAR, small_grid)
    ustar = _manufactured(spec)
    rhs = apply_log_laplacian(ustar, build_plan(small_grid))
    u, rep = solve_dirichlet(spec, SolveConfig(tol_residual=1e-12), rhs=rhs)
    assert rep.converged
    assert residual(u, spec, rhs=rhs) <= 1e-12
    assert np.max(np.abs(u.values - ustar.values)) <= 1e-10 * ustar.sup_norm()
    # residual non-increasing for the linear problem below the stability bound
    assert np.all(np.diff(rep.residual_history) <= 1e-15)
    assert rep.as_dict().keys() == {"residual", "iters", "converged"}


def test_stability_bound_is_a_config_error(small_grid):
    spec = ProblemSpec(PARA, CoefficientA(), SQUARE, small_grid)
    with pytest.raises(ConfigError):
        solve_dirichlet(spec, SolveConfig(tau=10.0), u0=_manufactured(spec))


def test_divergence_reports_iteration(small_grid):
    spec = ProblemSpec(PARA, CoefficientA(), SQUARE, small_grid)
    u0 = _manufactured(spec) * 1e6
    with pytest.raises(DivergenceError) as info:
        solve_dirichlet(spec, SolveConfig(max_iter=10_000), u0=u0)
    assert info.value.iteration >= 1


def test_initial_guess_preconditions(small_grid):
    spec = ProblemSpec(PARA, CoefficientA(), SQUARE, small_grid)
    with pytest.raises(PreconditionError):
        solve_dirichlet(spec, u0=_manufactured(spec) * -1.0)
    with pytest.raises(PreconditionError):
        solve_dirichlet(spec, u0=GridFunction(small_grid, np.ones(small_grid.size)))


def test_hypotheses_gate(small_grid):
    spec = ProblemSpec(PARA, CoefficientA("constant", c0=-1.0), SQUARE, small_grid)
    with pytest.raises(PreconditionError):
        solve_dirichlet(spec)
    u, rep = solve_dirichlet(spec, SolveConfig(check_hypotheses=False))
    assert rep.converged and u.sup_norm() == 0.0


def test_dense_and_matrix_free_agree(small_grid, monkeypatch):
    import loglap.solver as solver

    spec = ProblemSpec(PARA, CoefficientA(), LINEAR, small_grid)
    plan = build_plan(small_grid)
    idx = small_grid.multi_indices()[spec.omega_mask()]
    dense = _ActiveOperator(plan, idx)
    monkeypatch.setattr(solver, "DENSE_LIMIT", 0)
    free = solver._ActiveOperator(plan, idx)
    assert dense.dense is not None and free.dense is None
    rng = np.random.default_rng(1)
    for _ in range(5):
        v = rng.normal(size=len(idx))
        np.testing.assert_allclose(dense(v), free(v), rtol=0, atol=1e-10)


def test_probe_decays_when_nonlinear_term_vanishes(small_grid):
    spec = ProblemSpec(PARA, CoefficientA("constant", c0=0.0), LINEAR, small_grid)
    rep = probe_nonexistence(spec)
    assert rep.outcome == "decayed"
    assert rep.final_sup < 1e-3
    assert rep.as_dict()["heuristic"] is True


def test_probe_reports_growth_on_large_box():
    g = UniformGrid.box((-4, -4), (4, 4), 0.2)
    spec = ProblemSpec(PARA, CoefficientA("shifted_linear"), LINEAR, g)
    rep = probe_nonexistence(spec, SolveConfig(max_iter=5000), blowup=1e3)
    assert rep.outcome == "grew"


def test_ball_grid_centres_the_ball():
    g = ball_grid(3.0, 0.1)
    assert g.lattice_index([0.0, 3.0]).tolist() == [13, 13]
    with pytest.raises(PreconditionError):
        ball_grid(3.03, 0.1)


@pytest.fixture(scope="module")
def eig():
    g = ball_grid(3.0, 0.1)
    return eigen_smallest(3.0, g)


def test_eigenpair_properties(eig):
    assert eig.lambda_1 > 0
    assert eig.residual <= 1e-8
    ball = eig.ball_mask()
    assert np.all(eig.phi.values[ball] > 0)
    assert np.all(eig.phi.values[~ball] == 0)
    assert eig.phi.sup_norm() == pytest.approx(1.0)


def test_eigen_matrix_free_residual(eig):
    plan = build_plan(eig.phi.grid)
    ball = eig.ball_mask()
    lphi = evaluate_at(eig.phi, plan, eig.phi.grid.coords()[ball])
    assert np.max(np.abs(lphi - eig.lambda_1 * eig.phi.values[ball])) <= 1e-8


def test_eigen_matrix_symmetric(eig):
    plan = build_plan(eig.phi.grid)
    A = operator_matrix(plan, eig.phi.grid.multi_indices()[eig.ball_mask()])
    assert np.max(np.abs(A - A.T)) == 0.0


def test_eigen_gates():
    with pytest.raises(PreconditionError):
        eigen_smallest(3.0, UniformGrid.box((-0.5, 2.0), (0.5, 4.0), 0.1))
    with pytest.raises(PreconditionError):
        eigen_smallest(3.0, UniformGrid.box((2.0,), (4.0,), 0.1), constants=constants_for(1))
