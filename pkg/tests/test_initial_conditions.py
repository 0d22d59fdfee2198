import numpy as np
import pytest

from grid import AlgState, DiffState, FullState, Grid1D, GridFn
from initial_conditions import build_field, build_initial_state, normalize_preset, read_csv_field
from integrate import Trajectory
from report_writer import write_trajectory_csv
from utils.errors import ConfigError, InputError


def test_presets_on_the_grid():
    grid = Grid1D(8)
    x = grid.nodes
    assert np.all(build_field(grid, normalize_preset('zero')).values == 0.0)
    np.testing.assert_array_equal(
        build_field(grid, normalize_preset({'preset': 'constant', 'value': -2.0})).values, -2.0)
    bump = build_field(grid, normalize_preset({'preset': 'gauss_bump', 'amplitude': 3.0}))
    assert bump.values[4] == 3.0
    np.testing.assert_allclose(bump.values, 3.0 * np.exp(-((x - 0.5) / 0.1) ** 2))
    mode = build_field(grid, normalize_preset({'preset': 'cosine_mode', 'k': 2}))
    np.testing.assert_allclose(mode.values, np.cos(2 * np.pi * x))


def test_initial_state_from_two_presets():
    grid = Grid1D(8)
    V0 = build_initial_state(grid, 'zero', {'preset': 'constant', 'value': 1.0})
    assert np.all(V0.u.values == 0.0)
    assert np.all(V0.v.values == 1.0)


@pytest.mark.parametrize('entry', [
    'triangle', {'amplitude': 1.0}, 42,
    {'preset': 'constant'},
    {'preset': 'constant', 'value': float('nan')},
    {'preset': 'zero', 'value': 1.0},
    {'preset': 'gauss_bump', 'width': 0.0},
    {'preset': 'cosine_mode', 'k': 1.5},
    {'preset': 'from_csv'},
    {'preset': 'from_csv', 'path': 'a.csv', 'column': 'w'},
    {'preset': 'from_csv', 'path': 'a.csv', 'time': 'middle'},
])
def test_bad_presets_rejected(entry):
    with pytest.raises(ConfigError):
        normalize_preset(entry)


def test_from_csv_column_defaults_to_field():
    entry = normalize_preset({'preset': 'from_csv', 'path': 'run.csv'}, 'v')
    assert entry == {'preset': 'from_csv', 'path': 'run.csv', 'column': 'v', 'time': 'last'}


def stored_trajectory(grid, rng):
    trajectory = Trajectory()
    for t in (0.0, 0.25):
        V = DiffState.from_array(grid, rng.normal(size=(2, grid.size)))
        w = AlgState.from_interior(grid, rng.normal(size=grid.size - 2))
        trajectory.record(FullState(V, w, t), 0.0)
    return trajectory


def test_csv_round_trip_is_exact(tmp_path, rng):
    grid = Grid1D(16)
    trajectory = stored_trajectory(grid, rng)
    path = write_trajectory_csv(trajectory, str(tmp_path))
    first, last = trajectory.states
    np.testing.assert_array_equal(read_csv_field(path, 'u', 'first', grid), first.V.u.values)
    np.testing.assert_array_equal(read_csv_field(path, 'v', 'last', grid), last.V.v.values)
    np.testing.assert_array_equal(read_csv_field(path, 'u', 0.25, grid), last.V.u.values)

    entry = {'preset': 'from_csv', 'path': 'trajectory.csv'}
    V0 = build_initial_state(grid, entry, entry, base_file=str(tmp_path / 'run.json'))
    np.testing.assert_array_equal(V0.as_array(), last.V.as_array())


def test_csv_mismatches_raise(tmp_path, rng):
    grid = Grid1D(16)
    path = write_trajectory_csv(stored_trajectory(grid, rng), str(tmp_path))
    with pytest.raises(InputError):
        read_csv_field(path, 'u', 'last', Grid1D(8))
    with pytest.raises(InputError):
        read_csv_field(path, 'u', 0.5, grid)
    with pytest.raises(InputError):
        read_csv_field(str(tmp_path / 'missing.csv'), 'u', 'last', grid)
    broken = tmp_path / 'broken.csv'
    broken.write_text('t,x\n0,0\n', encoding='utf-8')
    with pytest.raises(InputError):
        read_csv_field(str(broken), 'u', 'last', grid)
