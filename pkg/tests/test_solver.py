import numpy as np
import pytest
from scipy.linalg import solve_banded

from npde.grid import dirichlet, extend, make_grid, mirror, periodic
from npde.reactions import fisher, gray_scott, TwoComponentReaction
from npde.solver import (CflReport, DivergenceError, cfl_check, discrete_residual,
                         solve_forward, solve_two_component, step_explicit,
                         step_implicit, step_two_component, thomas_solve)
from npde.stencil import EllipticCoefficients


def test_explicit_hand_example():
    grid = make_grid(3, 1.0, 0.25, dirichlet(0.0))
    coeffs = EllipticCoefficients.constant(grid, 1.0)
    out = step_explicit(np.array([0.0, 1.0, 0.0]), coeffs, grid)
    np.testing.assert_allclose(out, [0.25, 0.5, 0.25], rtol=0, atol=1e-15)


def test_explicit_identity_when_dynamics_vanish():
    grid = make_grid(5, 1.0, 0.25, periodic())
    coeffs = EllipticCoefficients.constant(grid, 0.0)
    u = np.array([1.0, -2.0, 3.0, -4.0, 5.0])
    np.testing.assert_array_equal(step_explicit(u, coeffs, grid), u)


def test_fisher_fixed_point_at_zero():
    grid = make_grid(5, 1.0, 0.25, periodic())
    coeffs = EllipticCoefficients.constant(grid, 0.0, reaction=fisher(1.0))
    np.testing.assert_array_equal(step_explicit(np.zeros(5), coeffs, grid),
                                  np.zeros(5))


def test_implicit_identity_when_a_zero():
    grid = make_grid(5, 1.0, 0.25, dirichlet(0.0))
    coeffs = EllipticCoefficients.constant(grid, 0.0)
    u = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    np.testing.assert_allclose(step_implicit(u, coeffs, grid), u, rtol=1e-14)


def test_implicit_3x3_system_oracle():
    grid = make_grid(3, 1.0, 0.25, dirichlet(0.0))
    coeffs = EllipticCoefficients.constant(grid, 1.0)
    u = np.array([0.0, 1.0, 0.0])
    M = np.array([[1.5, -0.25, 0.0], [-0.25, 1.5, -0.25], [0.0, -0.25, 1.5]])
    np.testing.assert_allclose(step_implicit(u, coeffs, grid),
                               np.linalg.solve(M, u), rtol=1e-13)


@pytest.mark.parametrize("bc", [dirichlet(0.0), dirichlet(1.5), periodic(),
                                mirror(), extend()])
def test_implicit_residual_recovers_input(bc):
    # substituting the output into the backward recurrence recovers the rhs
    rng = np.random.default_rng(8)
    n = 12
    grid = make_grid(n, 0.5, 0.3, bc)
    A = rng.uniform(0.0, 2.0, n)
    coeffs = EllipticCoefficients(A)
    u = rng.standard_normal(n)
    out = step_implicit(u, coeffs, grid)
    # residual check through the explicit operator: u' - k*diff(u') == u
    from npde.stencil import diffusion_term
    back = out - grid.k * diffusion_term(out, A, grid)
    np.testing.assert_allclose(back, u, rtol=0, atol=1e-10)


def test_singular_tridiagonal_reported():
    # a crafted negative A zeroes the pivot: 1 + 2 r A_j = 0
    grid = make_grid(3, 1.0, 1.0, dirichlet(0.0))
    A = np.full(3, -0.5)
    with pytest.raises(ValueError, match="singular"):
        step_implicit(np.ones(3), EllipticCoefficients(A), grid)


def test_thomas_against_scipy_banded():
    rng = np.random.default_rng(9)
    n = 40
    sub = np.zeros(n)
    sup = np.zeros(n)
    diag = rng.uniform(2.0, 3.0, n)
    sub[1:] = rng.uniform(-1.0, 0.0, n - 1)
    sup[:-1] = rng.uniform(-1.0, 0.0, n - 1)
    rhs = rng.standard_normal(n)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1] = diag
    ab[2, :-1] = sub[1:]
    np.testing.assert_allclose(thomas_solve(sub, diag, sup, rhs),
                               solve_banded((1, 1), ab, rhs), rtol=1e-12)


def test_periodic_implicit_matches_dense_solve():
    rng = np.random.default_rng(10)
    n = 16
    grid = make_grid(n, 0.5, 0.4, periodic())
    A = rng.uniform(0.1, 2.0, n)
    coeffs = EllipticCoefficients(A)
    u = rng.standard_normal(n)
    r = grid.r
    M = np.zeros((n, n))
    for j in range(n):
        M[j, j] = 1.0 + 2.0 * r * A[j]
        M[j, (j - 1) % n] -= r * A[(j - 1) % n]
        M[j, (j + 1) % n] -= r * A[(j + 1) % n]
    np.testing.assert_allclose(step_implicit(u, coeffs, grid),
                               np.linalg.solve(M, u), rtol=1e-11, atol=1e-12)


def test_two_component_null_dynamics():
    grid = make_grid(8, 0.5, 0.1, periodic(), ndim=2)
    rxn = TwoComponentReaction("null", lambda U, V: 0.0 * U, lambda U, V: 0.0 * V)
    rng = np.random.default_rng(11)
    U = rng.random((8, 8))
    V = rng.random((8, 8))
    U2, V2 = step_two_component(U, V, 0.0, 0.0, rxn, grid)
    np.testing.assert_array_equal(U2, U)
    np.testing.assert_array_equal(V2, V)


def test_gray_scott_uniform_fixed_point():
    grid = make_grid(8, 0.5, 0.1, periodic(), ndim=2)
    U = np.ones((8, 8))
    V = np.zeros((8, 8))
    U2, V2 = step_two_component(U, V, 1e-5, 5e-6, gray_scott(0.04, 0.06), grid)
    np.testing.assert_allclose(U2, U, atol=1e-15)
    np.testing.assert_allclose(V2, V, atol=1e-15)


def test_solve_forward_rejects_zero_steps():
    grid = make_grid(5, 1.0, 0.1, periodic())
    coeffs = EllipticCoefficients.constant(grid, 1.0)
    with pytest.raises(ValueError):
        solve_forward(np.zeros(5), coeffs, grid, 0)


def test_solve_forward_frozen_dynamics():
    grid = make_grid(5, 1.0, 0.1, periodic())
    coeffs = EllipticCoefficients.constant(grid, 0.0)
    u0 = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    traj = solve_forward(u0, coeffs, grid, 10)
    assert traj.n_steps == 10 and len(traj.slices) == 11
    for s in traj.slices:
        np.testing.assert_array_equal(s, u0)


def test_cfl_check_examples():
    grid = make_grid(5, 1.0, 0.25, periodic())
    assert cfl_check(EllipticCoefficients.constant(grid, 1.0), grid) == \
        CflReport(True, 0.25, 0.5)
    grid = make_grid(5, 1.0, 0.6, periodic())
    rep = cfl_check(EllipticCoefficients.constant(grid, 1.0), grid)
    assert not rep.stable and rep.max_r_a == pytest.approx(0.6)
    grid = make_grid(5, 1.0, 0.3, periodic())
    A = np.array([0.5, 1.0, 2.0, 1.0, 0.5])
    rep = cfl_check(EllipticCoefficients(A), grid)
    assert not rep.stable and rep.max_r_a == pytest.approx(0.6)


def test_cfl_limit_tighter_in_2d():
    grid = make_grid(5, 1.0, 0.3, periodic(), ndim=2)
    rep = cfl_check(EllipticCoefficients.constant(grid, 1.0), grid)
    assert rep.limit == 0.25 and not rep.stable


def test_mass_conservation_varying_a():
    rng = np.random.default_rng(12)
    n = 64
    A = rng.uniform(0.1, 1.0, n)
    grid = make_grid(n, 1.0, 0.4 / float(A.max()), periodic())
    coeffs = EllipticCoefficients(A)
    u = rng.uniform(0.5, 1.5, n)
    total0 = u.sum()
    for _ in range(200):
        u = step_explicit(u, coeffs, grid)
        assert abs(u.sum() - total0) / abs(total0) <= 1e-10


def test_maximum_principle_constant_a():
    rng = np.random.default_rng(13)
    grid = make_grid(32, 1.0, 0.45, periodic())
    coeffs = EllipticCoefficients.constant(grid, 1.0)
    u = rng.uniform(-1.0, 2.0, 32)
    lo, hi = u.min(), u.max()
    for _ in range(50):
        u = step_explicit(u, coeffs, grid)
        assert u.max() <= hi + 1e-14 and u.min() >= lo - 1e-14


def test_explicit_implicit_agree_to_second_order():
    # |explicit - implicit| = O(k^2): halving k quarters the gap
    n = 32
    x = np.linspace(0, 2 * np.pi, n, endpoint=False)
    u = np.sin(x)
    gaps = []
    for k in (0.1, 0.05, 0.025):
        grid = make_grid(n, 2 * np.pi / n, k, periodic())
        coeffs = EllipticCoefficients.constant(grid, 0.3)
        gap = np.max(np.abs(step_explicit(u, coeffs, grid)
                            - step_implicit(u, coeffs, grid)))
        gaps.append(gap)
    assert gaps[0] / gaps[1] == pytest.approx(4.0, abs=0.8)
    assert gaps[1] / gaps[2] == pytest.approx(4.0, abs=0.8)


def test_fisher_invariant_region():
    rng = np.random.default_rng(14)
    rate = 1.0
    grid = make_grid(32, 1.0, 0.4, periodic())
    coeffs = EllipticCoefficients.constant(grid, 1.0, reaction=fisher(rate))
    u = rng.uniform(0.0, 1.0, 32)
    bound = 1.0 + grid.k * rate / 4.0
    for _ in range(100):
        u = step_explicit(u, coeffs, grid)
        assert u.min() >= -1e-14 and u.max() <= bound + 1e-14


def test_implicit_unconditionally_stable_at_r5():
    grid = make_grid(32, 1.0, 5.0, dirichlet(0.0))
    coeffs = EllipticCoefficients.constant(grid, 1.0)
    rng = np.random.default_rng(15)
    u0 = rng.uniform(0.0, 1.0, 32)
    traj = solve_forward(u0, coeffs, grid, 100, scheme="implicit")
    assert max(np.max(np.abs(s)) for s in traj.slices) <= np.max(np.abs(u0)) + 1e-12


def test_divergence_reports_step_index():
    grid = make_grid(32, 1.0, 0.6, periodic())
    coeffs = EllipticCoefficients.constant(grid, 1.0)
    u0 = np.zeros(32)
    u0[16] = 1.0
    with pytest.raises(DivergenceError) as err:
        solve_forward(u0, coeffs, grid, 500)
    assert err.value.step is not None and 0 < err.value.step <= 200


def test_explicit_step_reports_nonfinite():
    grid = make_grid(5, 1.0, 0.25, periodic())
    coeffs = EllipticCoefficients.constant(grid, 1e308)
    u = np.array([0.0, 1e308, 0.0, 0.0, 0.0])
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError):
            step_explicit(u, coeffs, grid)


def test_solve_two_component_frames():
    grid = make_grid(16, 0.1, 0.5, periodic(), ndim=2)
    rng = np.random.default_rng(16)
    U = np.ones((16, 16)) + 0.01 * rng.random((16, 16))
    V = 0.1 * rng.random((16, 16))
    _, _, frames = solve_two_component(U, V, 2e-5, 1e-5, gray_scott(0.04, 0.06),
                                       grid, 10, record_every=2)
    assert len(frames) == 5


def test_discrete_residual_vanishes_on_explicit_trajectory():
    rng = np.random.default_rng(17)
    n = 16
    grid = make_grid(n, 0.5, 0.05, periodic())
    coeffs = EllipticCoefficients(rng.uniform(0.1, 1.0, n), None, fisher(0.5))
    traj = solve_forward(rng.uniform(0.2, 0.8, n), coeffs, grid, 5)
    res = discrete_residual(traj, coeffs, grid)
    assert res.shape == (5, n)
    np.testing.assert_allclose(res, 0.0, atol=1e-11)
