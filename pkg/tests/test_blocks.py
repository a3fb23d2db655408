import numpy as np
import pytest

from npde.blocks import (Conv1DBlock, RBMEnergy, elman_forward,
                         gen_conv1d, gen_conv2d, gen_dense, gen_rbm,
                         gen_rnn_cell, rbm_energy, rbm_free_energy,
                         residual_step, rnn_forward)
from npde.grid import dirichlet, extend, make_grid, mirror, periodic
from npde.reactions import fisher, no_reaction, sigmoid_reaction
from npde.solver import step_explicit, solve_forward
from npde.stencil import EllipticCoefficients, laplacian_2d_9pt


def test_gen_conv1d_constant_a_rows():
    grid = make_grid(6, 1.0, 0.25, dirichlet(0.0))
    block = gen_conv1d(EllipticCoefficients.constant(grid, 1.0), grid)
    for row in block.kernels:
        np.testing.assert_allclose(row, [0.25, 0.5, 0.25], atol=1e-15)


def test_gen_conv1d_zero_a_is_identity():
    grid = make_grid(6, 1.0, 0.25, periodic())
    block = gen_conv1d(EllipticCoefficients.constant(grid, 0.0), grid)
    np.testing.assert_array_equal(block.kernels[:, 1], np.ones(6))
    np.testing.assert_array_equal(block.kernels[:, [0, 2]], np.zeros((6, 2)))
    u = np.arange(6.0)
    np.testing.assert_array_equal(block.forward(u), u)


def test_gen_conv1d_forward_matches_hand_example():
    grid = make_grid(3, 1.0, 0.25, dirichlet(0.0))
    block = gen_conv1d(EllipticCoefficients.constant(grid, 1.0), grid)
    np.testing.assert_allclose(block.forward(np.array([0.0, 1.0, 0.0])),
                               [0.25, 0.5, 0.25], atol=1e-15)


@pytest.mark.parametrize("bc", [periodic(), dirichlet(0.0), dirichlet(1.0),
                                mirror(), extend()])
def test_conv1d_equals_explicit_step(bc):
    rng = np.random.default_rng(21)
    n = 17
    grid = make_grid(n, 0.5, 0.05, bc)
    coeffs = EllipticCoefficients(rng.uniform(0.0, 1.0, n), None, fisher(0.7))
    block = gen_conv1d(coeffs, grid)
    u = rng.uniform(0.0, 1.0, n)
    np.testing.assert_allclose(block.forward(u), step_explicit(u, coeffs, grid),
                               rtol=0, atol=1e-12)


def test_conv1d_folds_convection():
    rng = np.random.default_rng(22)
    n = 11
    grid = make_grid(n, 0.5, 0.05, periodic())
    coeffs = EllipticCoefficients(rng.uniform(0.0, 1.0, n),
                                  rng.uniform(-1.0, 1.0, n))
    block = gen_conv1d(coeffs, grid)
    u = rng.standard_normal(n)
    np.testing.assert_allclose(block.forward(u), step_explicit(u, coeffs, grid),
                               rtol=0, atol=1e-12)


def test_conv2d_identity_cases():
    grid = make_grid(8, 0.5, 0.1, periodic(), ndim=2)
    block = gen_conv2d(0.02 * laplacian_2d_9pt(), grid)
    const = np.full((8, 8), 3.0)
    np.testing.assert_allclose(block.forward(const), const, atol=1e-14)
    zero_block = gen_conv2d(np.zeros((3, 3)), grid)
    rng = np.random.default_rng(23)
    u = rng.standard_normal((8, 8))
    np.testing.assert_array_equal(zero_block.forward(u), u)


def test_conv2d_equals_2d_diffusion_step():
    rng = np.random.default_rng(24)
    n = 10
    grid = make_grid(n, 0.5, 0.02, periodic(), ndim=2)
    D = 1.3
    block = gen_conv2d(grid.k * D / grid.h**2 * laplacian_2d_9pt(), grid)
    u = rng.standard_normal((n, n))
    coeffs = EllipticCoefficients.constant(grid, D)
    np.testing.assert_allclose(block.forward(u),
                               step_explicit(u, coeffs, grid, "9pt"),
                               rtol=0, atol=1e-12)


def test_dense_identity():
    block = gen_dense(np.eye(3), np.zeros(3))
    u = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(block.forward(u), u)


def test_dense_mean_kernel():
    m = 5
    block = gen_dense(np.full((1, m), 1.0 / m), np.zeros(1))
    u = np.arange(5.0)
    assert block.forward(u)[0] == pytest.approx(u.mean(), rel=1e-15)


def test_dense_two_path_equivalence():
    rng = np.random.default_rng(25)
    for _ in range(10):
        l, m = rng.integers(1, 65), rng.integers(1, 65)
        block = gen_dense(rng.standard_normal((l, m)), rng.standard_normal(l),
                          sigmoid_reaction(1.3))
        u = rng.standard_normal(m)
        np.testing.assert_allclose(block.forward(u), block.forward_channels(u),
                                   rtol=0, atol=1e-12)
        np.testing.assert_array_equal(block.channel_kernels(), block.W)


def test_dense_shape_mismatch():
    with pytest.raises(ValueError):
        gen_dense(np.eye(3), np.zeros(2))
    block = gen_dense(np.eye(3), np.zeros(3))
    with pytest.raises(ValueError):
        block.forward(np.zeros(4))


def test_residual_zero_branch_is_identity():
    block = gen_dense(np.zeros((3, 3)), np.zeros(3))
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(residual_step(x, block), x)


def test_residual_scalar_arithmetic():
    block = gen_dense(np.array([[2.0]]), np.zeros(1))
    np.testing.assert_array_equal(residual_step(np.array([1.0]), block), [3.0])


def test_residual_with_diffusion_block_equals_explicit_step():
    rng = np.random.default_rng(26)
    n = 13
    grid = make_grid(n, 0.5, 0.05, periodic())
    coeffs = EllipticCoefficients(rng.uniform(0.1, 1.0, n))
    block = gen_conv1d(coeffs, grid)
    u = rng.standard_normal(n)
    np.testing.assert_allclose(residual_step(u, block),
                               step_explicit(u, coeffs, grid), atol=1e-13)


def test_residual_iteration_matches_trajectory():
    rng = np.random.default_rng(27)
    n = 13
    grid = make_grid(n, 0.5, 0.05, periodic())
    coeffs = EllipticCoefficients(rng.uniform(0.1, 1.0, n))
    block = gen_conv1d(coeffs, grid)
    u0 = rng.standard_normal(n)
    x = u0.copy()
    for _ in range(20):
        x = residual_step(x, block)
    traj = solve_forward(u0, coeffs, grid, 20)
    np.testing.assert_allclose(x, traj.final(), atol=1e-10)


def test_rnn_cell_dz_zero():
    grid = make_grid(5, 0.5, 0.1, periodic())
    v = 2.0
    cell = gen_rnn_cell(0.0, 0.0, v, grid)
    np.testing.assert_allclose(cell.W1, np.eye(5), atol=1e-15)
    np.testing.assert_allclose(cell.W2, np.zeros((5, 5)), atol=1e-15)
    np.testing.assert_allclose(cell.U, -(grid.k / v) * np.eye(5), atol=1e-15)


def test_rnn_cell_dz_zero_transverse_coupling():
    from npde.blocks import _laplacian_matrix
    grid = make_grid(5, 0.5, 0.1, periodic())
    v = 2.0
    cell = gen_rnn_cell(1.0, 0.0, v, grid)
    L = _laplacian_matrix(grid)
    np.testing.assert_allclose(cell.W1, np.eye(5) - (grid.k / v) * L, atol=1e-14)


def test_rnn_cell_frozen_at_k_zero_limit():
    grid = make_grid(5, 0.5, 1e-12, periodic())
    cell = gen_rnn_cell(0.8, 0.4, 1.5, grid)
    np.testing.assert_allclose(cell.W1, np.eye(5), atol=1e-9)
    np.testing.assert_allclose(cell.W2, np.zeros((5, 5)), atol=1e-9)
    np.testing.assert_allclose(cell.U, np.zeros((5, 5)), atol=1e-9)


def test_rnn_cell_satisfies_recurrence():
    # the generated matrices must solve the traveling-wave recurrence
    rng = np.random.default_rng(28)
    n = 9
    Dxy, Dz, v = 0.6, 0.25, 1.1
    grid = make_grid(n, 0.5, 0.05, periodic())
    cell = gen_rnn_cell(Dxy, Dz, v, grid)
    u = rng.standard_normal(n)
    u_prev = rng.standard_normal(n)
    f = rng.standard_normal(n)
    nxt = rnn_forward(cell, np.concatenate([u, u_prev]), f)[:n]
    lap = (np.roll(u, 1) - 2 * u + np.roll(u, -1)) / grid.h**2
    lhs = -v * (nxt - u) / grid.k
    rhs = Dxy * lap + Dz * (nxt - 2 * u + u_prev) / grid.h**2 + f
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10)


def test_rnn_degenerate_denominator_rejected():
    grid = make_grid(5, 1.0, 1.0, periodic())
    with pytest.raises(ValueError):
        gen_rnn_cell(0.0, -1.0, 1.0, grid)      # v h^2 + k Dz = 0
    with pytest.raises(ValueError):
        gen_rnn_cell(0.0, 0.0, -1.0, grid)      # v <= 0


def test_rnn_forward_shift_register():
    grid = make_grid(4, 1.0, 0.1, periodic())
    cell = gen_rnn_cell(0.0, 0.0, 1.0, grid)
    zero_cell = type(cell)(np.zeros((4, 4)), np.zeros((4, 4)), cell.U,
                           cell.Dxy, cell.Dz, cell.v, cell.h, cell.k)
    state = np.concatenate([np.arange(4.0), np.zeros(4)])
    out = rnn_forward(zero_cell, state, np.zeros(4))
    np.testing.assert_array_equal(out[:4], np.zeros(4))
    np.testing.assert_array_equal(out[4:], np.arange(4.0))


def test_rnn_forward_zero_state_gives_uf():
    grid = make_grid(4, 1.0, 0.1, periodic())
    cell = gen_rnn_cell(0.3, 0.2, 1.0, grid)
    f = np.array([1.0, -1.0, 2.0, 0.5])
    out = rnn_forward(cell, np.zeros(8), f)
    np.testing.assert_allclose(out[:4], cell.U @ f, atol=1e-15)
    np.testing.assert_array_equal(out[4:], np.zeros(4))


def test_rnn_forward_shape_check():
    grid = make_grid(4, 1.0, 0.1, periodic())
    cell = gen_rnn_cell(0.0, 0.0, 1.0, grid)
    with pytest.raises(ValueError):
        rnn_forward(cell, np.zeros(7), np.zeros(4))


def test_elman_zero_weights_sigmoid_gives_half():
    n, m = 3, 2
    h, o = elman_forward(np.zeros(m), np.zeros(n), np.zeros((n, m)),
                         np.zeros((n, n)), np.zeros((1, n)), np.zeros(n),
                         np.zeros(1), sigmoid_reaction(1.0), sigmoid_reaction(1.0))
    np.testing.assert_allclose(h, 0.5)
    np.testing.assert_allclose(o, 0.5)


def test_elman_no_recurrence_is_stacked_dense():
    rng = np.random.default_rng(29)
    U = rng.standard_normal((4, 3))
    V = rng.standard_normal((2, 4))
    b_h, b_o = rng.standard_normal(4), rng.standard_normal(2)
    x = rng.standard_normal(3)
    h, o = elman_forward(x, np.zeros(4), U, np.zeros((4, 4)), V, b_h, b_o,
                         no_reaction(), no_reaction())
    np.testing.assert_allclose(h, U @ x + b_h, atol=1e-15)
    np.testing.assert_allclose(o, V @ (U @ x + b_h) + b_o, atol=1e-15)


def test_elman_matches_double_loop_oracle():
    rng = np.random.default_rng(30)
    n, m, p = 5, 4, 3
    U = rng.standard_normal((n, m))
    W = rng.standard_normal((n, n))
    V = rng.standard_normal((p, n))
    b_h, b_o = rng.standard_normal(n), rng.standard_normal(p)
    x, h_prev = rng.standard_normal(m), rng.standard_normal(n)
    act = sigmoid_reaction(1.0)
    h, o = elman_forward(x, h_prev, U, W, V, b_h, b_o, act, act)
    h_oracle = np.empty(n)
    for i in range(n):
        z = b_h[i]
        for j in range(m):
            z += U[i, j] * x[j]
        for j in range(n):
            z += W[i, j] * h_prev[j]
        h_oracle[i] = 1.0 / (1.0 + np.exp(-z))
    o_oracle = np.empty(p)
    for i in range(p):
        z = b_o[i]
        for j in range(n):
            z += V[i, j] * h_oracle[j]
        o_oracle[i] = 1.0 / (1.0 + np.exp(-z))
    np.testing.assert_allclose(h, h_oracle, atol=1e-12)
    np.testing.assert_allclose(o, o_oracle, atol=1e-12)


def test_rbm_free_energy_zero_case():
    n_vis, n_hid = 4, 6
    rbm = RBMEnergy(np.zeros((n_vis, n_hid)), np.zeros(n_vis), np.zeros(n_hid))
    v = np.array([1.0, 0.0, 1.0, 0.0])
    assert rbm_free_energy(rbm, v) == pytest.approx(-n_hid * np.log(2.0), rel=1e-14)


def test_rbm_free_energy_bias_case():
    n_vis, n_hid = 3, 5
    b = np.zeros(n_vis)
    b[0] = 1.0
    rbm = RBMEnergy(np.zeros((n_vis, n_hid)), b, np.zeros(n_hid))
    v = np.zeros(n_vis)
    v[0] = 1.0
    assert rbm_free_energy(rbm, v) == pytest.approx(-1.0 - n_hid * np.log(2.0),
                                                    rel=1e-14)


def test_rbm_free_energy_direction_independent_when_uncoupled():
    rng = np.random.default_rng(31)
    rbm = RBMEnergy(np.zeros((4, 3)), np.zeros(4), rng.standard_normal(3))
    v1, v2 = rng.standard_normal(4), rng.standard_normal(4)
    assert rbm_free_energy(rbm, v1) == pytest.approx(rbm_free_energy(rbm, v2))


def test_rbm_free_energy_hidden_permutation_invariant():
    rng = np.random.default_rng(32)
    W = rng.standard_normal((4, 5))
    b = rng.standard_normal(4)
    c = rng.standard_normal(5)
    v = rng.standard_normal(4)
    perm = rng.permutation(5)
    f1 = rbm_free_energy(RBMEnergy(W, b, c), v)
    f2 = rbm_free_energy(RBMEnergy(W[:, perm], b, c[perm]), v)
    assert f1 == pytest.approx(f2, rel=1e-14)


def test_rbm_free_energy_stable_for_large_inputs():
    rbm = RBMEnergy(np.array([[1000.0], [-1000.0]]), np.zeros(2), np.zeros(1))
    val = rbm_free_energy(rbm, np.array([1.0, 0.0]))
    assert np.isfinite(val) and val == pytest.approx(-1000.0, rel=1e-12)


def test_rbm_energy_bilinear():
    rng = np.random.default_rng(33)
    W = rng.standard_normal((3, 4))
    b = rng.standard_normal(3)
    c = rng.standard_normal(4)
    v = rng.standard_normal(3)
    h = rng.standard_normal(4)
    expected = -(v @ W @ h) - b @ v - c @ h
    assert rbm_energy(RBMEnergy(W, b, c), v, h) == pytest.approx(expected, rel=1e-14)


def test_gen_rbm_band_matches_explicit_step_matrix():
    rng = np.random.default_rng(34)
    n = 8
    grid = make_grid(n, 0.5, 0.05, periodic())
    A = rng.uniform(0.1, 1.0, n)
    rbm = gen_rbm(EllipticCoefficients(A), grid)
    coeffs = EllipticCoefficients(A)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        np.testing.assert_allclose(rbm.W[:, j], step_explicit(e, coeffs, grid),
                                   atol=1e-13)
    # tridiagonal band (plus periodic corners)
    for i in range(n):
        for j in range(n):
            gap = min((i - j) % n, (j - i) % n)
            if gap > 1:
                assert rbm.W[i, j] == 0.0


def test_conv1d_bias_and_shape_validation():
    grid = make_grid(4, 1.0, 0.25, periodic())
    with pytest.raises(ValueError):
        Conv1DBlock(np.zeros((3, 3)), grid)          # wrong row count
    with pytest.raises(ValueError):
        Conv1DBlock(np.zeros((4, 2)), grid)          # wrong tap count
    block = Conv1DBlock(np.zeros((4, 3)), grid, bias=np.ones(4))
    np.testing.assert_array_equal(block.forward(np.zeros(4)), np.ones(4))
