# converge.py
"""
Self-convergence studies: spatial order of the constraint solve on a
manufactured solution, and temporal order of each stepper against a
fine-step reference run.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from constants import ORDER_BRACKETS, SCHEMES
from constraint import ConstraintSolver
from grid import Grid1D, weighted_norm
from integrate import COMPLETED, integrate
from verify import manufactured_g, manufactured_w

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConvergeRow:
    study: str
    level: int
    step: float
    error: float
    observed_order: float | None = None


@dataclass
class StudyResult:
    study: str
    rows: list = field(default_factory=list)
    bracket: tuple = (0.0, 0.0)

    @property
    def order(self):
        """Observed order of the finest pair."""
        return self.rows[-1].observed_order if self.rows else None

    @property
    def passed(self):
        order = self.order
        low, high = self.bracket
        return order is not None and math.isfinite(order) and low <= order <= high


def observed_orders(steps, errors):
    """log(e_i / e_{i+1}) / log(s_i / s_{i+1}) for consecutive levels; None for the first."""
    orders = [None]
    for i in range(1, len(errors)):
        if errors[i] > 0.0 and errors[i - 1] > 0.0:
            orders.append(math.log(errors[i - 1] / errors[i]) / math.log(steps[i - 1] / steps[i]))
        else:
            orders.append(float('nan'))
    return orders


def _rows(study, levels, steps, errors):
    orders = observed_orders(steps, errors)
    return [ConvergeRow(study, level, step, error, order)
            for level, step, error, order in zip(levels, steps, errors, orders)]


def _manufactured_error(cache, n_cells, bc):
    grid = Grid1D(n_cells)
    solver = ConstraintSolver(cache.get(grid, bc), sign=1)
    w = solver.solve_values(manufactured_g(grid.nodes))
    return float(np.max(np.abs(w - manufactured_w(grid.nodes))))


def spatial_study(cache, levels, bc='neumann', max_workers=None):
    """Max-norm error of the clamped solve for w = x^2 (1 - x)^2 at each n_cells level."""
    errors = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_level = {executor.submit(_manufactured_error, cache, n, bc): n for n in levels}
        for future in as_completed(future_to_level):
            errors[future_to_level[future]] = future.result()
    ordered = [errors[n] for n in levels]
    steps = [1.0 / n for n in levels]
    return StudyResult('spatial', _rows('spatial', list(levels), steps, ordered), ORDER_BRACKETS['spatial'])


def _final_values(V0, cfg, ops, solver, nonlinearity):
    trajectory = integrate(V0, cfg, ops, solver, nonlinearity)
    if trajectory.verdict != COMPLETED:
        return None
    return trajectory.final_state.V.as_array()


def temporal_study(scheme, V0, run_config, ops, solver, max_workers=None):
    """
    Errors at converge_t_end of runs with each converge_dts step against a run
    with converge_reference_dt, same scheme and data.
    """
    dts = list(run_config.converge_dts)
    base = dict(scheme=scheme, t_end=run_config.converge_t_end, output_every=10 ** 9)
    configs = [run_config.stepper_config(dt=dt, **base) for dt in dts]
    reference_cfg = run_config.stepper_config(dt=run_config.converge_reference_dt, **base)

    results = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_key = {
            executor.submit(_final_values, V0, cfg, ops, solver, run_config.nonlinearity): key
            for key, cfg in [('reference', reference_cfg)] + list(enumerate(configs))
        }
        for future in as_completed(future_to_key):
            results[future_to_key[future]] = future.result()

    reference = results['reference']
    errors = []
    for index in range(len(dts)):
        if reference is None or results[index] is None:
            logger.error("Temporal study %s: a run did not complete", scheme)
            errors.append(float('nan'))
        else:
            errors.append(weighted_norm(ops.grid, results[index] - reference))
    return StudyResult(scheme, _rows(scheme, list(range(len(dts))), dts, errors), ORDER_BRACKETS[scheme])


def run_convergence(run_config, cache, V0, ops, solver):
    """All studies: spatial, then one temporal study per scheme."""
    studies = [spatial_study(cache, run_config.converge_levels, run_config.bc, run_config.max_workers)]
    for scheme in SCHEMES:
        studies.append(temporal_study(scheme, V0, run_config, ops, solver, run_config.max_workers))
    for study in studies:
        level = logging.INFO if study.passed else logging.ERROR
        logger.log(level, "Study %-9s observed order %s, bracket %s: %s", study.study,
                   study.order, study.bracket, 'pass' if study.passed else 'FAIL')
    return studies
