import math

import numpy as np
import pytest

from caching import OperatorCache
from config_manager import RunConfig
from constraint import ConstraintSolver
from converge import StudyResult, ConvergeRow, observed_orders, spatial_study, temporal_study
from grid import DiffState, GridFn


def test_observed_orders():
    orders = observed_orders([0.4, 0.2, 0.1], [1.6, 0.4, 0.1])
    assert orders[0] is None
    assert orders[1] == pytest.approx(2.0) and orders[2] == pytest.approx(2.0)
    assert math.isnan(observed_orders([0.2, 0.1], [0.0, 0.0])[1])


def test_study_verdict_uses_finest_pair():
    rows = [ConvergeRow('etd2', 0, 0.2, 1.0), ConvergeRow('etd2', 1, 0.1, 0.5, 0.9),
            ConvergeRow('etd2', 2, 0.05, 0.125, 2.0)]
    assert StudyResult('etd2', rows, (1.7, 2.3)).passed
    assert not StudyResult('etd2', rows[:2], (1.7, 2.3)).passed
    assert not StudyResult('etd2', [], (1.7, 2.3)).passed


def test_spatial_study_second_order():
    study = spatial_study(OperatorCache(), (32, 64, 128), max_workers=2)
    assert [row.level for row in study.rows] == [32, 64, 128]
    assert study.rows[0].error > study.rows[1].error > study.rows[2].error
    assert study.passed


@pytest.mark.parametrize('scheme, bracket', [('exp_euler', (0.8, 1.2)), ('etd2', (1.7, 2.3))])
def test_temporal_orders(ops16, scheme, bracket):
    grid = ops16.grid
    V0 = DiffState(GridFn(grid, 0.01 * np.cos(np.pi * grid.nodes)),
                   GridFn(grid, 0.01 * np.cos(2 * np.pi * grid.nodes)))
    config = RunConfig(n_cells=16, converge_t_end=0.1, converge_reference_dt=1.25e-4)
    study = temporal_study(scheme, V0, config, ops16, ConstraintSolver(ops16), max_workers=2)
    assert [row.step for row in study.rows] == [4e-3, 2e-3, 1e-3]
    assert bracket[0] <= study.order <= bracket[1]
