# report_writer.py
"""Writers for the result files: trajectory CSV, run summary, verification and convergence reports."""
from __future__ import annotations

import csv
import json
import logging
import math
import os

from constants import CONVERGE_FILE, CSV_DIGITS, SUMMARY_FILE, TRAJECTORY_FILE, VERIFY_FILE
from utils.utils import ensure_dir

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ('t', 'x', 'u', 'v', 'w', 'constraint_residual')
CONVERGE_COLUMNS = ('study', 'level', 'step', 'error', 'observed_order')


def format_number(value):
    """Decimal text with 17 significant digits, enough to round-trip a double."""
    if value is None:
        return ''
    return f"{float(value):.{CSV_DIGITS}g}"


def _json_number(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else str(value)


def write_trajectory_csv(trajectory, output_dir):
    path = os.path.join(ensure_dir(output_dir), TRAJECTORY_FILE)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_COLUMNS)
        for state, residual in zip(trajectory.states, trajectory.constraint_residuals):
            t = format_number(state.t)
            res = format_number(residual)
            nodes = state.grid.nodes
            u, v, w = state.V.u.values, state.V.v.values, state.w.w.values
            for i in range(state.grid.size):
                writer.writerow((t, format_number(nodes[i]), format_number(u[i]),
                                 format_number(v[i]), format_number(w[i]), res))
    logger.info("Wrote %d states to %s", len(trajectory.states), path)
    return path


def write_summary_json(trajectory, wall_seconds, output_dir):
    summary = {
        'verdict': trajectory.verdict,
        't_max_estimate': _json_number(trajectory.t_max_estimate),
        'max_constraint_residual': _json_number(trajectory.max_constraint_residual),
        'steps_taken': int(trajectory.steps_taken),
        'wall_seconds': float(wall_seconds),
    }
    path = os.path.join(ensure_dir(output_dir), SUMMARY_FILE)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(summary, f, indent=2)
    return path


def write_verify_json(results, output_dir):
    """One object per check: {name, passed, measured, tolerance, statement}."""
    records = [
        {
            'name': r.name,
            'passed': bool(r.passed),
            'measured': _json_number(r.measured),
            'tolerance': _json_number(r.tolerance),
            'statement': r.statement,
        }
        for r in results
    ]
    path = os.path.join(ensure_dir(output_dir), VERIFY_FILE)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(records, f, indent=2)
    return path


def write_converge_csv(rows, output_dir):
    path = os.path.join(ensure_dir(output_dir), CONVERGE_FILE)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(CONVERGE_COLUMNS)
        for row in rows:
            writer.writerow((row.study, row.level, format_number(row.step),
                             format_number(row.error), format_number(row.observed_order)))
    return path
