import numpy as np
import pytest
from scipy.linalg import expm

from slresolvent.gridfn import Grid, GridFunction, MatrixGridFunction, VectorGridFunction
from slresolvent.odeint import (ResolutionError, cauchy_distance_to_identity, fundamental_matrix,
                                solve_inhomogeneous, split_midpoints)
from slresolvent.potential import family_exp_osc
from slresolvent.quasi_system import perturbation_matrix, rhs_lift, system_matrix

from conftest import random_smooth


def const(grid, M):
    return MatrixGridFunction.constant(grid, M)


def test_zero_field(unit_grid):
    Y = fundamental_matrix(const(unit_grid, np.zeros((2, 2)))).Y.values
    assert np.all(Y == np.eye(2))


def test_nilpotent(unit_grid):
    Y = fundamental_matrix(const(unit_grid, [[0, 1], [0, 0]])).Y.values
    t = unit_grid.nodes
    np.testing.assert_allclose(Y[:, 0, 1], t, atol=1e-14)
    np.testing.assert_allclose(Y[-1], [[1, 1], [0, 1]], atol=1e-14)


def test_hyperbolic(unit_grid):
    Y1 = fundamental_matrix(const(unit_grid, [[0, 1], [1, 0]])).end
    ch, sh = np.cosh(1.0), np.sinh(1.0)
    np.testing.assert_allclose(Y1, [[ch, sh], [sh, ch]], atol=1e-10)
    np.testing.assert_allclose(Y1, expm(np.array([[0.0, 1.0], [1.0, 0.0]])), atol=1e-10)


def test_fourth_order():
    M = np.array([[0.3j, 2.0], [-1.5, -0.3j]])
    exact = expm(M)
    errs = [np.abs(fundamental_matrix(const(Grid(0.0, 1.0, n), M)).end - exact).max() for n in (11, 21, 41)]
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.1)


def test_resolution_policy_enforced():
    g = Grid(0.0, 1.0, 101)
    A = system_matrix(family_exp_osc()(0.01, g)).A
    with pytest.raises(ResolutionError):
        fundamental_matrix(A, scale=0.01)
    fundamental_matrix(system_matrix(family_exp_osc()(0.01, g.refine(10))).A, scale=0.01)


def test_inhomogeneous_zero(unit_grid):
    A = const(unit_grid, [[0, 1], [-3, 0]])
    phi = VectorGridFunction(unit_grid, np.zeros((unit_grid.n, 2)))
    assert np.all(solve_inhomogeneous(A, phi, [0, 0]).values == 0)


def test_inhomogeneous_direct_integration():
    g = Grid(2.0, 3.0, 51)
    w = solve_inhomogeneous(const(g, np.zeros((2, 2))),
                            rhs_lift(GridFunction.from_callable(g, np.ones_like)), [0, 0]).values
    np.testing.assert_allclose(w[:, 1], -(g.nodes - 2.0), atol=1e-13)
    assert np.all(w[:, 0] == 0)


def test_inhomogeneous_minus_y_second_eq_one(unit_grid):
    # -y'' = 1, y(0) = y'(0) = 0: y = -t^2/2
    w = solve_inhomogeneous(const(unit_grid, [[0, 1], [0, 0]]),
                            rhs_lift(GridFunction.from_callable(unit_grid, np.ones_like)), [0, 0]).values
    t = unit_grid.nodes
    np.testing.assert_allclose(w[:, 0], -t**2 / 2, atol=1e-13)
    np.testing.assert_allclose(w[:, 1], -t, atol=1e-13)


def test_interpolated_midpoints_keep_fourth_order():
    qf = lambda t: np.exp(2j * t) + np.cos(5 * t)
    ref_g = Grid(0.0, 1.0, 2001)
    A_ref, mid_ref = split_midpoints(system_matrix(GridFunction.from_callable(ref_g.refine(2), qf)).A)
    ref = fundamental_matrix(A_ref, mid=mid_ref).end
    errs = []
    for n in (21, 41, 81):
        A = system_matrix(GridFunction.from_callable(Grid(0.0, 1.0, n), qf)).A
        errs.append(np.abs(fundamental_matrix(A).end - ref).max())
    assert errs[0] / errs[1] > 12 and errs[1] / errs[2] > 12


def test_exact_midpoints_beat_linear_interpolation():
    rng = np.random.default_rng(3)
    qf = random_smooth(rng)
    ref_g = Grid(0.0, 1.0, 4001)
    A2 = system_matrix(GridFunction.from_callable(ref_g.refine(2), qf)).A
    A_ref, mid_ref = split_midpoints(A2)
    ref = fundamental_matrix(A_ref, mid=mid_ref).end
    g = Grid(0.0, 1.0, 101)
    A2c = system_matrix(GridFunction.from_callable(g.refine(2), qf)).A
    Ac, midc = split_midpoints(A2c)
    linear = 0.5 * (Ac.values[:-1] + Ac.values[1:])
    err_lin = np.abs(fundamental_matrix(Ac, mid=linear).end - ref).max()
    err_mid = np.abs(fundamental_matrix(Ac, mid=midc).end - ref).max()
    assert err_mid < err_lin / 10


def test_cocycle():
    # exact midpoints, so both halves use the same one-step maps as the full run
    rng = np.random.default_rng(7)
    g = Grid(0.0, 1.0, 201)
    A, mid = split_midpoints(system_matrix(GridFunction.from_callable(g.refine(2), random_smooth(rng)), 0.5).A)
    full = fundamental_matrix(A, mid=mid)
    first = MatrixGridFunction(Grid(0.0, 0.5, 101), A.values[:101])
    second = MatrixGridFunction(Grid(0.5, 1.0, 101), A.values[100:])
    Yc = fundamental_matrix(first, mid=mid[:100]).end
    Yb = fundamental_matrix(second, mid=mid[100:]).end @ Yc
    np.testing.assert_allclose(Yb, full.end, rtol=1e-12, atol=1e-12)


def test_liouville_random():
    rng = np.random.default_rng(11)
    g = Grid(0.0, 1.0, 401)
    for _ in range(5):
        A = system_matrix(GridFunction.from_callable(g, random_smooth(rng, amp=2.0)), rng.normal()).A
        d = fundamental_matrix(A).det()
        assert np.max(np.abs(d - 1)) < 1e-8


def test_cauchy_distance_zero(unit_grid):
    assert cauchy_distance_to_identity(const(unit_grid, np.zeros((2, 2)))) == 0


@pytest.mark.parametrize("c, length", [(0.5, 1.0), (1.0, 2.0), (-0.3, 1.0)])
def test_cauchy_distance_scalar_exponential(c, length):
    g = Grid(0.0, length, 401)
    d = cauchy_distance_to_identity(const(g, c * np.eye(2)))
    assert d == pytest.approx(abs(np.exp(c * length) - 1) if c > 0 else 1 - np.exp(c * length), rel=1e-9)


def test_cauchy_distance_decreases_exp_osc():
    fam = family_exp_osc()
    base = Grid(0.0, 1.0, 201)
    vals = []
    for eps in (1e-1, 1e-2):
        g = base.refine(base.refinement_for(eps))
        R = perturbation_matrix(fam(eps, g), fam.limit(g))
        vals.append(cauchy_distance_to_identity(R, scale=eps))
    assert vals[1] < vals[0]


def test_midpoint_rule_selection(unit_grid):
    A = system_matrix(GridFunction.from_callable(unit_grid, np.cos)).A
    lin = fundamental_matrix(A, mid="linear").end
    explicit = fundamental_matrix(A, mid=0.5 * (A.values[:-1] + A.values[1:])).end
    np.testing.assert_array_equal(lin, explicit)
    assert np.array_equal(fundamental_matrix(A).end, fundamental_matrix(A, mid="cubic").end)
    with pytest.raises(ValueError):
        fundamental_matrix(A, mid="quintic")
    with pytest.raises(ValueError):
        fundamental_matrix(A, mid=np.zeros((3, 2, 2)))


def test_table_family_uses_linear_midpoints(unit_grid):
    from slresolvent.potential import family_exp_osc, family_from_table
    q = GridFunction.from_callable(unit_grid, np.sin)
    assert family_from_table(unit_grid, [(0.1, q)], GridFunction.zeros(unit_grid)).midpoint_rule == "linear"
    assert family_exp_osc().midpoint_rule == "cubic"
