# config_manager.py
from __future__ import annotations

import configparser
import json
import logging
import os
from dataclasses import dataclass, field, fields

from constants import (
    BOUNDARY_CONDITIONS,
    DEFAULT_BLOWUP_THRESHOLD,
    DEFAULT_PICARD_MAX_ITERS,
    DEFAULT_PICARD_NODES,
    DEFAULT_PICARD_TOL,
    MIN_CELLS_BIHARMONIC,
    NONLINEARITIES,
    SCHEMES,
)
from initial_conditions import normalize_preset
from integrate import PicardConfig, StepperConfig
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

INI_SECTION = 'Run'


@dataclass(frozen=True)
class RunConfig:
    """One validated run configuration."""

    n_cells: int = 64
    bc: str = 'neumann'
    constraint_sign: int = -1
    scheme: str = 'etd2'
    dt: float = 1e-3
    t_end: float = 0.5
    output_every: int = 1
    ic_u: dict = field(default_factory=lambda: {'preset': 'cosine_mode', 'k': 1, 'amplitude': 0.01})
    ic_v: dict = field(default_factory=lambda: {'preset': 'cosine_mode', 'k': 2, 'amplitude': 0.01})
    blowup_norm_threshold: float = DEFAULT_BLOWUP_THRESHOLD
    seed: int = 0
    a_disabled: bool = False
    nonlinearity: str = 'paper'
    picard_max_iters: int = DEFAULT_PICARD_MAX_ITERS
    picard_tol: float = DEFAULT_PICARD_TOL
    picard_quadrature_nodes: int = DEFAULT_PICARD_NODES
    converge_levels: tuple = (32, 64, 128)
    converge_dts: tuple = (4e-3, 2e-3, 1e-3)
    converge_reference_dt: float = 1.25e-4
    converge_t_end: float = 0.2
    max_workers: int | None = None
    source_file: str | None = field(default=None, compare=False)

    def stepper_config(self, **overrides):
        values = {
            'scheme': self.scheme,
            'dt': self.dt,
            't_end': self.t_end,
            'blowup_norm_threshold': self.blowup_norm_threshold,
            'output_every': self.output_every,
            'picard': PicardConfig(self.picard_max_iters, self.picard_tol,
                                   self.picard_quadrature_nodes),
        }
        values.update(overrides)
        return StepperConfig(**values)


CONFIG_KEYS = tuple(f.name for f in fields(RunConfig) if f.name != 'source_file')


# --- Value checks ---

def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value == value \
        and abs(value) != float('inf')


def _positive_int(key, value, minimum=1):
    if not _is_int(value) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return value


def _positive_real(key, value):
    if not _is_real(value) or value <= 0:
        raise ConfigError(f"{key} must be a positive number, got {value!r}")
    return float(value)


def _choice(key, value, choices):
    if value not in choices:
        raise ConfigError(f"{key} must be one of {choices}, got {value!r}")
    return value


def _validate(key, value):
    if key == 'n_cells':
        return _positive_int(key, value, minimum=MIN_CELLS_BIHARMONIC)
    if key == 'bc':
        return _choice(key, value, BOUNDARY_CONDITIONS)
    if key == 'constraint_sign':
        if not _is_int(value) or value not in (1, -1):
            raise ConfigError(f"constraint_sign must be +1 or -1, got {value!r}")
        return value
    if key == 'scheme':
        return _choice(key, value, SCHEMES)
    if key == 'nonlinearity':
        return _choice(key, value, NONLINEARITIES)
    if key in ('dt', 'picard_tol', 'converge_reference_dt', 'converge_t_end'):
        return _positive_real(key, value)
    if key == 't_end':
        if not _is_real(value) or value < 0:
            raise ConfigError(f"t_end must be a non-negative number, got {value!r}")
        return float(value)
    if key == 'blowup_norm_threshold':
        if not _is_real(value) or value <= 1:
            raise ConfigError(f"blowup_norm_threshold must exceed 1, got {value!r}")
        return float(value)
    if key in ('output_every', 'picard_max_iters'):
        return _positive_int(key, value)
    if key == 'picard_quadrature_nodes':
        return _positive_int(key, value, minimum=2)
    if key == 'seed':
        return _positive_int(key, value, minimum=0)
    if key == 'a_disabled':
        if not isinstance(value, bool):
            raise ConfigError(f"a_disabled must be true or false, got {value!r}")
        return value
    if key in ('ic_u', 'ic_v'):
        return normalize_preset(value, key[-1])
    if key == 'converge_levels':
        if not isinstance(value, (list, tuple)) or len(value) < 2:
            raise ConfigError("converge_levels must list at least two n_cells values")
        levels = tuple(_positive_int(key, v, minimum=MIN_CELLS_BIHARMONIC) for v in value)
        if list(levels) != sorted(set(levels)):
            raise ConfigError(f"converge_levels must be strictly increasing, got {list(levels)}")
        return levels
    if key == 'converge_dts':
        if not isinstance(value, (list, tuple)) or len(value) < 2:
            raise ConfigError("converge_dts must list at least two time steps")
        dts = tuple(_positive_real(key, v) for v in value)
        if list(dts) != sorted(set(dts), reverse=True):
            raise ConfigError(f"converge_dts must be strictly decreasing, got {list(dts)}")
        return dts
    if key == 'max_workers':
        return None if value is None else _positive_int(key, value)
    raise ConfigError(f"unknown configuration key {key!r}")


class ConfigManager:
    """
    Loads a run configuration from JSON (flat object) or from an .ini file with
    a [Run] section whose values are JSON literals.
    """

    def __init__(self, config_file):
        self.config_file = config_file
        self.defaults = {f.name: getattr(RunConfig(), f.name) for f in fields(RunConfig)
                         if f.name != 'source_file'}

    def _read_raw(self):
        if not os.path.exists(self.config_file):
            raise ConfigError(f"config file '{self.config_file}' not found")
        if self.config_file.lower().endswith('.ini'):
            return self._read_ini()
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.config_file}: invalid JSON: {e}") from e
        except OSError as e:
            raise ConfigError(f"cannot read config file '{self.config_file}': {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{self.config_file}: top level must be a JSON object")
        return raw

    def _read_ini(self):
        parser = configparser.ConfigParser()
        try:
            parser.read(self.config_file, encoding='utf-8')
        except configparser.Error as e:
            raise ConfigError(f"{self.config_file}: {e}") from e
        if not parser.has_section(INI_SECTION):
            raise ConfigError(f"{self.config_file}: missing [{INI_SECTION}] section")
        raw = {}
        for key, text in parser.items(INI_SECTION):
            try:
                raw[key] = json.loads(text)
            except json.JSONDecodeError:
                raw[key] = text
        return raw

    def load(self):
        """
        Read, fill in defaults, and validate.

        Raises:
            ConfigError: missing or unreadable file, unknown key, invalid value.
        """
        raw = self._read_raw()
        unknown = sorted(set(raw) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"{self.config_file}: unknown configuration key(s): {', '.join(unknown)}")

        values = {}
        for key in CONFIG_KEYS:
            if key in raw:
                value = raw[key]
            else:
                value = self.defaults[key]
                logger.debug("Added missing option: %s = %r", key, value)
            values[key] = _validate(key, value)
        config = RunConfig(**values, source_file=os.path.abspath(self.config_file))
        logger.info("Loaded configuration from %s", self.config_file)
        return config

    def get_config_summary(self, config):
        return {key: getattr(config, key) for key in CONFIG_KEYS}
