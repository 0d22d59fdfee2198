# initial_conditions.py
"""
Named initial-condition presets for u and v, and reading a field back from a
trajectory CSV written by the solve command.
"""
from __future__ import annotations

import csv
import logging

import numpy as np

from constants import IC_PRESETS
from grid import DiffState, GridFn
from utils.errors import ConfigError, InputError
from utils.utils import resolve_path

logger = logging.getLogger(__name__)

# Required and optional parameters per preset, with defaults for the optional ones.
PRESET_PARAMETERS = {
    'zero': {},
    'constant': {'value': None},
    'gauss_bump': {'amplitude': 1.0, 'center': 0.5, 'width': 0.1},
    'cosine_mode': {'k': 1, 'amplitude': 1.0},
    'from_csv': {'path': None, 'column': None, 'time': 'last'},
}


def normalize_preset(entry, field_name='u'):
    """
    Validate a preset given as a name ("zero") or a mapping with a "preset"
    key, and return a complete mapping with defaults filled in.

    Raises:
        ConfigError: unknown preset, unknown or missing parameter, bad value.
    """
    if isinstance(entry, str):
        entry = {'preset': entry}
    if not isinstance(entry, dict) or 'preset' not in entry:
        raise ConfigError(f"ic_{field_name} must be a preset name or an object with a 'preset' key")
    name = entry['preset']
    if name not in IC_PRESETS:
        raise ConfigError(f"ic_{field_name}: unknown preset {name!r}; expected one of {IC_PRESETS}")

    allowed = PRESET_PARAMETERS[name]
    unknown = set(entry) - set(allowed) - {'preset'}
    if unknown:
        raise ConfigError(f"ic_{field_name}: unknown parameter(s) {sorted(unknown)} for preset {name!r}")

    result = {'preset': name}
    for key, default in allowed.items():
        if key in entry:
            result[key] = entry[key]
        elif default is None and not (name == 'from_csv' and key == 'column'):
            raise ConfigError(f"ic_{field_name}: preset {name!r} requires {key!r}")
        else:
            result[key] = default
    _check_values(result, field_name)
    if result.get('column') is None and name == 'from_csv':
        result['column'] = field_name
    return result


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and np.isfinite(value)


def _check_values(entry, field_name):
    name = entry['preset']
    prefix = f"ic_{field_name} ({name})"
    for key in ('value', 'amplitude', 'center'):
        if key in entry and not _is_number(entry[key]):
            raise ConfigError(f"{prefix}: {key} must be a finite number, got {entry[key]!r}")
    if name == 'gauss_bump' and not (_is_number(entry['width']) and entry['width'] > 0):
        raise ConfigError(f"{prefix}: width must be positive, got {entry['width']!r}")
    if name == 'cosine_mode':
        k = entry['k']
        if isinstance(k, bool) or not isinstance(k, int) or k < 0:
            raise ConfigError(f"{prefix}: k must be a non-negative integer, got {k!r}")
    if name == 'from_csv':
        if not isinstance(entry['path'], str) or not entry['path']:
            raise ConfigError(f"{prefix}: path must be a non-empty string")
        if entry['column'] is not None and entry['column'] not in ('u', 'v'):
            raise ConfigError(f"{prefix}: column must be 'u' or 'v', got {entry['column']!r}")
        if entry['time'] not in ('first', 'last') and not _is_number(entry['time']):
            raise ConfigError(f"{prefix}: time must be 'first', 'last' or a number, got {entry['time']!r}")


def build_field(grid, entry, base_file=None):
    """Sample a normalized preset on the grid."""
    name = entry['preset']
    x = grid.nodes
    if name == 'zero':
        return GridFn.zeros(grid)
    if name == 'constant':
        return GridFn.constant(grid, entry['value'])
    if name == 'gauss_bump':
        return GridFn(grid, entry['amplitude'] * np.exp(-((x - entry['center']) / entry['width']) ** 2))
    if name == 'cosine_mode':
        return GridFn(grid, entry['amplitude'] * np.cos(entry['k'] * np.pi * x))
    path = resolve_path(entry['path'], base_file)
    return GridFn(grid, read_csv_field(path, entry['column'], entry['time'], grid))


def build_initial_state(grid, ic_u, ic_v, base_file=None):
    """V0 = (u0, v0) from two presets."""
    u = build_field(grid, normalize_preset(ic_u, 'u'), base_file)
    v = build_field(grid, normalize_preset(ic_v, 'v'), base_file)
    return DiffState(u, v)


def read_csv_field(path, column, time, grid):
    """
    Read one column of a trajectory CSV at the first, last or a given stored time.

    Raises:
        InputError: unreadable file, missing columns, or a node set that does
        not match the grid.
    """
    try:
        with open(path, newline='', encoding='utf-8') as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or not {'t', 'x', column} <= set(reader.fieldnames):
                raise InputError(f"{path}: expected columns t, x and {column}")
            rows = [(float(row['t']), float(row['x']), float(row[column])) for row in reader]
    except OSError as e:
        raise InputError(f"cannot read initial condition file {path}: {e}") from e
    except ValueError as e:
        raise InputError(f"{path}: malformed number: {e}") from e
    if not rows:
        raise InputError(f"{path}: no data rows")

    times = sorted({t for t, _, _ in rows})
    if time == 'first':
        selected = times[0]
    elif time == 'last':
        selected = times[-1]
    else:
        selected = min(times, key=lambda t: abs(t - float(time)))
        if abs(selected - float(time)) > 1e-12 * max(1.0, abs(float(time))):
            raise InputError(f"{path}: no stored time matches t={time}")

    block = [(x, value) for t, x, value in rows if t == selected]
    if len(block) != grid.size:
        raise InputError(f"{path}: {len(block)} nodes at t={selected}, grid has {grid.size}")
    xs = np.array([x for x, _ in block])
    if np.max(np.abs(xs - grid.nodes)) > 1e-12:
        raise InputError(f"{path}: node coordinates do not match the grid")
    logger.info("Loaded %s from %s at t=%.17g", column, path, selected)
    return np.array([value for _, value in block])
