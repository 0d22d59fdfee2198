import numpy as np
import pytest

from grid import (
    AlgState,
    DiffState,
    FullState,
    Grid1D,
    GridFn,
    bending_seminorm,
    l2_inner,
    norm_E,
    norm_X,
    norm_X_sum,
)
from utils.errors import DimensionError, DomainError, InputError, SizeError


@pytest.mark.parametrize('n_cells', [1, 7, 64, 1000])
def test_weights_sum_to_unit_measure(n_cells):
    grid = Grid1D(n_cells)
    assert abs(grid.weights.sum() - 1.0) <= 1e-14
    assert np.all(np.diff(grid.nodes) > 0)
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == pytest.approx(1.0)


@pytest.mark.parametrize('bad', [0, -3, 2.5, True])
def test_grid_rejects_bad_sizes(bad):
    with pytest.raises(SizeError):
        Grid1D(bad)


def test_grid_equality_by_cell_count():
    assert Grid1D(8) == Grid1D(8)
    assert Grid1D(8) != Grid1D(16)
    with pytest.raises(DimensionError):
        Grid1D(8).check_same(Grid1D(16))


def test_gridfn_validation():
    grid = Grid1D(4)
    with pytest.raises(DimensionError):
        GridFn(grid, np.zeros(4))
    with pytest.raises(InputError):
        GridFn(grid, [0.0, np.nan, 0.0, 0.0, 0.0])
    with pytest.raises(InputError):
        GridFn(grid, [0.0, np.inf, 0.0, 0.0, 0.0])
    f = GridFn(grid, np.arange(5.0))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_l2_inner_examples():
    grid = Grid1D(64)
    one = GridFn.constant(grid, 1.0)
    assert l2_inner(one, one) == pytest.approx(1.0, abs=1e-14)
    assert l2_inner(one, GridFn.zeros(grid)) == 0.0
    c = GridFn.from_function(grid, lambda x: np.cos(np.pi * x))
    assert abs(l2_inner(c, c) - 0.5) <= 1e-3


def test_l2_inner_exact_for_affine_products():
    grid = Grid1D(13)
    f = GridFn.from_function(grid, lambda x: 2.0 + 3.0 * x)
    one = GridFn.constant(grid, 1.0)
    assert abs(l2_inner(f, one) - 3.5) <= 1e-13


def test_l2_inner_grid_mismatch():
    with pytest.raises(DimensionError):
        l2_inner(GridFn.zeros(Grid1D(4)), GridFn.zeros(Grid1D(8)))


def test_norm_E_examples():
    grid = Grid1D(32)
    assert norm_E(DiffState.zeros(grid)) == 0.0
    V = DiffState(GridFn.constant(grid, 1.0), GridFn.zeros(grid))
    assert norm_E(V) == pytest.approx(1.0, abs=1e-14)
    V = DiffState(GridFn.constant(grid, 3.0), GridFn.constant(grid, 4.0))
    assert norm_E(V) == pytest.approx(5.0, abs=1e-13)


def test_norm_E_homogeneity_and_triangle(rng):
    grid = Grid1D(40)
    for _ in range(20):
        V1 = DiffState.from_array(grid, rng.normal(size=(2, grid.size)))
        V2 = DiffState.from_array(grid, rng.normal(size=(2, grid.size)))
        alpha = rng.normal()
        assert abs(norm_E(alpha * V1) - abs(alpha) * norm_E(V1)) <= 1e-12 * max(1.0, norm_E(V1))
        assert norm_E(V1 + V2) <= norm_E(V1) + norm_E(V2) + 1e-12


def test_norm_X_examples(ops128):
    grid = ops128.grid
    zero = FullState(DiffState.zeros(grid), AlgState.zeros(grid))
    assert norm_X(zero, ops128) == 0.0

    V = DiffState(GridFn.constant(grid, 1.0), GridFn.zeros(grid))
    assert norm_X(FullState(V, AlgState.zeros(grid)), ops128) == pytest.approx(1.0, abs=1e-14)

    w = AlgState(GridFn.from_function(grid, lambda x: x ** 2 * (1 - x) ** 2))
    U = FullState(DiffState.zeros(grid), w)
    assert abs(norm_X(U, ops128) - np.sqrt(0.8)) <= 1e-2
    assert bending_seminorm(w, ops128) == pytest.approx(norm_X(U, ops128))


def test_additive_norm_bounds(ops16, rng):
    grid = ops16.grid
    for _ in range(10):
        V = DiffState.from_array(grid, rng.normal(size=(2, grid.size)))
        w = AlgState.from_interior(grid, rng.normal(size=grid.size - 2))
        U = FullState(V, w)
        hilbert = norm_X(U, ops16)
        additive = norm_X_sum(U, ops16)
        assert hilbert <= additive + 1e-12
        assert additive <= np.sqrt(2.0) * hilbert + 1e-12


def test_alg_state_must_be_clamped():
    grid = Grid1D(4)
    with pytest.raises(DomainError):
        AlgState(GridFn(grid, [1.0, 0.0, 0.0, 0.0, 0.0]))
    w = AlgState.from_interior(grid, [1.0, 2.0, 3.0])
    assert w.w.values[0] == 0.0 and w.w.values[-1] == 0.0


def test_full_state_invariants():
    grid = Grid1D(4)
    with pytest.raises(DomainError):
        FullState(DiffState.zeros(grid), AlgState.zeros(grid), t=-1.0)
    with pytest.raises(DimensionError):
        FullState(DiffState.zeros(grid), AlgState.zeros(Grid1D(8)))
    with pytest.raises(DimensionError):
        DiffState(GridFn.zeros(grid), GridFn.zeros(Grid1D(8)))


def test_diff_state_arithmetic():
    grid = Grid1D(4)
    a = DiffState.from_array(grid, np.ones((2, 5)))
    b = DiffState.from_array(grid, 2.0 * np.ones((2, 5)))
    np.testing.assert_array_equal((a + b).as_array(), 3.0 * np.ones((2, 5)))
    np.testing.assert_array_equal((b - a).as_array(), np.ones((2, 5)))
    np.testing.assert_array_equal((-a).as_array(), -np.ones((2, 5)))
    np.testing.assert_array_equal((2 * a).as_array(), b.as_array())
    with pytest.raises(DimensionError):
        DiffState.from_array(grid, np.ones((3, 5)))
