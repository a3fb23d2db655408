import numpy as np
import pytest

from npde.blocks import gen_conv1d, gen_conv2d, gen_dense, gen_rbm, gen_rnn_cell
from npde.fieldio import (block_from_dict, block_to_dict,
                          field_to_csv, field_to_pgm, fmt, load_block,
                          load_field_csv, save_block, save_field_csv,
                          save_trajectory_csv)
from npde.grid import dirichlet, make_grid, periodic
from npde.reactions import fisher, sigmoid_reaction
from npde.solver import solve_forward
from npde.stencil import EllipticCoefficients, laplacian_2d_9pt


def test_fmt_round_trips_float64():
    rng = np.random.default_rng(70)
    for x in rng.standard_normal(50) * 10.0**rng.integers(-300, 300, 50):
        assert float(fmt(x)) == x


def test_field_csv_format_1d():
    text = field_to_csv(np.array([1.0, 2.5, -3.0]))
    assert text == "1,2.5,-3\n"


def test_field_csv_round_trip(tmp_path):
    rng = np.random.default_rng(71)
    f1 = rng.standard_normal(7)
    save_field_csv(tmp_path / "f1.csv", f1)
    np.testing.assert_array_equal(load_field_csv(tmp_path / "f1.csv"), f1)
    f2 = rng.standard_normal((4, 5))
    save_field_csv(tmp_path / "f2.csv", f2)
    np.testing.assert_array_equal(load_field_csv(tmp_path / "f2.csv"), f2)


def test_trajectory_csv_has_slice_index(tmp_path):
    grid = make_grid(4, 1.0, 0.1, periodic())
    traj = solve_forward(np.ones(4), EllipticCoefficients.constant(grid, 0.0),
                         grid, 3)
    save_trajectory_csv(tmp_path / "t.csv", traj)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 4
    assert lines[0].split(",")[0] == "0"
    assert lines[-1].split(",")[0] == "3"


def test_pgm_header_and_normalization():
    data = field_to_pgm(np.array([[0.0, 1.0], [2.0, 4.0]]))
    assert data.startswith(b"P5\n2 2\n255\n")
    pixels = np.frombuffer(data[-4:], dtype=np.uint8)
    np.testing.assert_array_equal(pixels, [0, 64, 128, 255])


def test_pgm_constant_field_is_black():
    data = field_to_pgm(np.full((2, 2), 3.7))
    pixels = np.frombuffer(data[-4:], dtype=np.uint8)
    np.testing.assert_array_equal(pixels, [0, 0, 0, 0])


def test_pgm_rejects_1d():
    with pytest.raises(ValueError):
        field_to_pgm(np.zeros(4))


def _sample_blocks():
    rng = np.random.default_rng(72)
    grid = make_grid(6, 0.5, 0.05, dirichlet(0.25))
    coeffs = EllipticCoefficients(rng.uniform(0.1, 1.0, 6), None, fisher(0.9))
    grid2 = make_grid(5, 0.5, 0.02, periodic(), ndim=2)
    return [
        gen_conv1d(coeffs, grid),
        gen_conv2d(0.1 * laplacian_2d_9pt(), grid2, channels=2),
        gen_dense(rng.standard_normal((3, 4)), rng.standard_normal(3),
                  sigmoid_reaction(1.5)),
        gen_rnn_cell(0.6, 0.3, 1.2, grid),
        gen_rbm(coeffs, grid, visible_bias=rng.standard_normal(6)),
    ]


@pytest.mark.parametrize("idx", range(5))
def test_block_dict_round_trip(idx):
    block = _sample_blocks()[idx]
    clone = block_from_dict(block_to_dict(block))
    assert block_to_dict(clone) == block_to_dict(block)


@pytest.mark.parametrize("idx", range(5))
def test_block_bytes_stable_across_save_load_save(idx, tmp_path):
    block = _sample_blocks()[idx]
    path = tmp_path / "block.json"
    save_block(path, block)
    first = path.read_bytes()
    save_block(path, load_block(path))
    assert path.read_bytes() == first


def test_conv1d_round_trip_preserves_forward(tmp_path):
    block = _sample_blocks()[0]
    save_block(tmp_path / "b.json", block)
    clone = load_block(tmp_path / "b.json")
    rng = np.random.default_rng(73)
    u = rng.standard_normal(6)
    np.testing.assert_array_equal(block.forward(u), clone.forward(u))
