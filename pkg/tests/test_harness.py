import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loglap.errors import PreconditionError
from loglap.geometry import Epigraph, reflect
from loglap.grid import GridFunction, UniformGrid
from loglap.harness import (
    CONSISTENT,
    UNMET,
    VIOLATED,
    antisym_mp_check,
    ball_mp_check,
    boundary_quotient,
    comparison_construct,
    compatible_lambdas,
    kernel_gap,
    region_labels,
    set_difference_volume,
    sweep_monotonicity,
    volumes_agree,
    w_lambda,
    _w_on_grid,
)
from loglap.operator import build_plan
from loglap.problems import CoefficientA, NonlinearityF, ProblemSpec, implanted_dip, manufactured_monotone, ramp
from loglap.solver import ball_grid, eigen_smallest

PARA = Epigraph("paraboloid", 1.0)
BOX = UniformGrid.box((-4, -4), (4, 4), 0.1)


def depth_profile(g, grid=BOX, e=PARA):
    x = grid.coords()
    t = x[:, -1] - e.phi(x[:, :-1])
    return GridFunction(grid, np.where(t > 0, g(np.maximum(t, 0.0)), 0.0))


@pytest.fixture(scope="module")
def plan():
    return build_plan(BOX)


@pytest.fixture(scope="module")
def manufactured():
    return manufactured_monotone(PARA, BOX)


def test_compatible_lambdas():
    lams = compatible_lambdas(BOX, PARA)
    assert lams[0] == pytest.approx(0.05) and lams[-1] == pytest.approx(2.0)
    assert all(BOX.is_compatible(l) for l in lams)
    assert np.all(lams > PARA.l)
    with pytest.raises(PreconditionError):
        compatible_lambdas(BOX, PARA, step=0.03)


def test_monotone_in_xn_gives_nonnegative_w():
    u = GridFunction.from_callable(BOX, lambda x: np.arctan(x[:, 1]) + 2)
    for lam in (0.05, 0.7, 1.5):
        w = _w_on_grid(u, lam)
        below = BOX.coords()[:, 1] < lam
        # partners reflected off the top of the box read zero; restrict to those inside
        inside = 2 * lam - BOX.coords()[:, 1] <= 4 + 1e-9
        assert np.all(w[below & inside] >= 0)


def test_sweep_manufactured(manufactured):
    rep = sweep_monotonicity(manufactured, PARA, compatible_lambdas(BOX, PARA))
    assert rep.verdict and rep.first_failure is None
    assert np.nanmin(rep.min_w) >= 0
    assert rep.skipped == [pytest.approx(0.05), pytest.approx(0.1)]


def test_sweep_implanted_dip(manufactured):
    dip = (0.0, 2.0)
    u = implanted_dip(manufactured, dip)
    rep = sweep_monotonicity(u, PARA, compatible_lambdas(BOX, PARA))
    assert not rep.verdict
    k = int(np.nanargmin(rep.min_w))
    assert np.linalg.norm(reflect(rep.argmin[k], rep.lambdas[k]) - dip) <= 2 * BOX.h


def test_sweep_plateau_has_zero_minima():
    u = depth_profile(lambda t: np.minimum(t, 1.0))
    rep = sweep_monotonicity(u, PARA, [1.5])
    assert rep.verdict and rep.min_w[0] == 0.0 and not rep.strict


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_antisymmetry_exact(seed, j):
    rng = np.random.default_rng(seed)
    g = UniformGrid.box((-1, -1), (1, 1), 0.1)
    u = GridFunction(g, rng.normal(size=g.size))
    lam = -1 + j * 0.05
    w = w_lambda(u, lam)
    x = w.grid.coords()
    partner = w.at_lattice(w.grid.lattice_index(reflect(x, lam)))
    assert np.array_equal(w.values + partner, np.zeros(w.grid.size))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 35))
def test_w_vanishes_on_D(seed, j):
    rng = np.random.default_rng(seed)
    g = UniformGrid.box((-2, -1), (2, 3), 0.1)
    mask = PARA.contains(g.coords())
    u = GridFunction(g, rng.uniform(size=g.size) * mask)
    lam = j * 0.05
    D = region_labels(PARA, lam, g) == "D"
    assert np.all(_w_on_grid(u, lam)[D] == 0.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-12, 1e-3), st.floats(1.0, 100.0))
def test_sweep_monotone_in_tolerance(seed, tol, factor):
    rng = np.random.default_rng(seed)
    g = UniformGrid.box((-1, -1), (1, 2), 0.1)
    u = GridFunction(g, rng.uniform(size=g.size) * PARA.contains(g.coords()))
    lams = compatible_lambdas(g, PARA, step=0.1)
    a = sweep_monotonicity(u, PARA, lams, tol=tol)
    b = sweep_monotonicity(u, PARA, lams, tol=tol * factor)
    assert (not a.verdict) or b.verdict


def test_kernel_gap_negative_below_plane():
    rng = np.random.default_rng(11)
    lam = 0.4
    x = rng.uniform([-3, -3], [3, lam], size=(10_000, 2))
    y = rng.uniform([-3, -3], [3, lam], size=(10_000, 2))
    assert np.all(kernel_gap(x, y, lam) < 0)


def test_antisym_interior_zero(plan):
    g = lambda t: ramp(np.minimum(t, 0.5)) + ramp(np.maximum(t - 1.5, 0.0))
    u = depth_profile(g)
    spec = ProblemSpec(PARA, CoefficientA("clamped"), NonlinearityF("power", 2.0), BOX)
    rep = antisym_mp_check(u, 1.0, spec, plan)
    assert rep.verdict == CONSISTENT
    assert rep.data["branch"] == "interior zero"
    assert rep.data["Lw"] < -1e-6


def test_antisym_no_interior_zero(plan, manufactured):
    spec = ProblemSpec(PARA, CoefficientA("clamped"), NonlinearityF("power", 2.0), BOX)
    rep = antisym_mp_check(manufactured, 1.5, spec, plan)
    assert rep.verdict == CONSISTENT and rep.data["branch"] == "no interior zero"


def test_antisym_gate(plan, manufactured):
    spec = ProblemSpec(PARA, CoefficientA("clamped"), NonlinearityF("power", 2.0), BOX)
    u = implanted_dip(manufactured, (0.0, 2.0))
    rep = antisym_mp_check(u, 1.8, spec, plan)
    assert rep.verdict == UNMET


def test_boundary_quotient_peaked(plan):
    u = depth_profile(lambda t: t * np.exp(-t))
    rep = boundary_quotient(u, PARA, 1.0, 6, plan)
    assert rep.verdict == CONSISTENT
    q = [r["quotient"] for r in rep.data["records"]]
    assert len(q) == 6 and all(v < 0 for v in q)
    lams = [r["lambda"] for r in rep.data["records"]]
    assert lams == sorted(lams, reverse=True) and lams[-1] == pytest.approx(1.05)


def test_boundary_quotient_degenerate(plan, manufactured):
    assert boundary_quotient(manufactured, PARA, 1.0, 4, plan).verdict == UNMET
    rep = boundary_quotient(manufactured, PARA, 1.0, 0, plan)
    assert rep.verdict == UNMET and rep.data["records"] == []


def lens_complement(d):
    if d >= 2:
        return math.pi
    return math.pi - (2 * math.acos(d / 2) - (d / 2) * math.sqrt(4 - d * d))


def test_set_difference_volumes():
    assert set_difference_volume((0, 3), (0, 3)) == 0.0
    for a in [(0.3, 2.6), (-0.7, 3.4), (0.0, 1.5)]:
        d = math.dist(a, (0, 3))
        assert set_difference_volume(a, (0, 3)) == pytest.approx(lens_complement(d), rel=1e-9)
    assert volumes_agree(set_difference_volume((0.2, 2.5), (0, 3)), set_difference_volume((0, 3), (0.2, 2.5)))


def test_set_difference_volume_3d():
    d = 0.6
    exact = 4 * math.pi / 3 - math.pi * (4 + d) * (2 - d) ** 2 / 12
    v = set_difference_volume((0, 0, 0), (0, 0, d))
    assert v == pytest.approx(exact, rel=0.01)


@pytest.fixture(scope="module")
def eig():
    return eigen_smallest(3.0, ball_grid(3.0, 0.1))


def test_ball_mp_consistent_fixture(eig):
    # phi inside plus a small positive floor outside the ball keeps L_h u >= 0 inside
    outside = ~eig.ball_mask()
    u = GridFunction(eig.phi.grid, eig.phi.values + 0.01 * outside)
    rep = ball_mp_check(u, 3.0, build_plan(u.grid))
    assert rep.verdict == CONSISTENT
    assert rep.data["u_min"] > 0 and rep.data["volumes_agree"]


def test_ball_mp_constant_is_unmet_after_truncation(eig):
    # truncating the far field at the box makes L_h 1 negative inside the ball
    u = GridFunction(eig.phi.grid, np.ones(eig.phi.grid.size))
    rep = ball_mp_check(u, 3.0, build_plan(u.grid))
    assert rep.data["min_Lu_inside"] < 0
    assert rep.verdict == UNMET


def test_ball_mp_negative_inside_is_reported(eig):
    u = GridFunction(eig.phi.grid, 0.01 - eig.phi.values * eig.ball_mask())
    rep = ball_mp_check(u, 3.0, build_plan(u.grid))
    assert rep.verdict in (UNMET, VIOLATED)
    assert rep.data["u_min"] < 0


def test_comparison_examples(eig):
    phi = eig.phi
    v, M, wit = comparison_construct(phi, eig)
    assert M == pytest.approx(1.0) and np.allclose(v.values, phi.values)
    v, M, wit = comparison_construct(phi * 2.0, eig)
    assert M == pytest.approx(0.5) and np.max(np.abs(v.values - phi.values)) <= 1e-15
    ball = eig.ball_mask()
    bump = np.exp(-np.sum((phi.grid.coords() - (0.3, 3.2)) ** 2, axis=1))
    u = GridFunction(phi.grid, phi.values + 0.2 * bump)
    v, M, wit = comparison_construct(u, eig)
    assert M < 1
    assert np.all(v.values[ball] >= phi.values[ball] - 1e-15)
    i = phi.grid.flat_index(phi.grid.lattice_index(wit))
    assert v.values[i] == pytest.approx(phi.values[i], rel=1e-10)


def test_comparison_needs_positive_u(eig):
    with pytest.raises(PreconditionError):
        comparison_construct(eig.phi * -1.0, eig)


def test_report_json_is_deterministic(plan):
    u = depth_profile(lambda t: t * np.exp(-t))
    a = boundary_quotient(u, PARA, 1.0, 2, plan).to_json()
    b = boundary_quotient(u, PARA, 1.0, 2, plan).to_json()
    assert a == b and '"kind": "boundary_quotient"' in a


def test_nodes_on_the_plane_are_above():
    for lam in compatible_lambdas(BOX, PARA):
        labels = region_labels(PARA, lam, BOX)
        on_plane = np.abs(BOX.coords()[:, 1] - lam) < 1e-6
        assert np.all(labels[on_plane] == "ABOVE")
