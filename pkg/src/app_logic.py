# app_logic.py
import logging
import os
import time

from caching import DummyCache, OperatorCache
from config_manager import ConfigManager
from constants import EXIT_BLOWUP, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_VERIFY_FAILED
from constraint import ConstraintSolver
from converge import run_convergence
from grid import Grid1D
from initial_conditions import build_initial_state
from integrate import BLOWUP_DETECTED, integrate
from report_writer import (
    write_converge_csv,
    write_summary_json,
    write_trajectory_csv,
    write_verify_json,
)
from utils.errors import ConfigError, PdaeError
from verify import run_verification

logger = logging.getLogger(__name__)


class PdaeApp:
    """Runs one command (solve, verify, converge) against one configuration file."""

    COMMANDS = ('solve', 'verify', 'converge')

    def __init__(self, config_file, output_dir=None, use_cache=True, operator_hook=None):
        self.config_file = config_file
        self.output_dir = output_dir or os.getcwd()
        self.cache = OperatorCache() if use_cache else DummyCache()
        self.operator_hook = operator_hook
        self.config = None
        self.operation_start_time = None

    # --- Setup shared by all commands ---

    def _load(self):
        manager = ConfigManager(self.config_file)
        self.config = manager.load()
        for key, value in manager.get_config_summary(self.config).items():
            logger.debug("  %s = %r", key, value)
        return self.config

    def _assemble(self, config):
        grid = Grid1D(config.n_cells)
        ops = self.cache.get(grid, config.bc, config.a_disabled)
        if self.operator_hook is not None:
            logger.warning("Operator hook installed; operators replaced before use")
            ops = self.operator_hook(ops)
        return grid, ops, ConstraintSolver(ops, config.constraint_sign)

    def _initial_state(self, config, grid):
        return build_initial_state(grid, config.ic_u, config.ic_v, config.source_file)

    # --- Commands ---

    def cmd_solve(self):
        config = self._load()
        grid, ops, solver = self._assemble(config)
        V0 = self._initial_state(config, grid)
        start = time.time()
        trajectory = integrate(V0, config.stepper_config(), ops, solver, config.nonlinearity)
        wall = time.time() - start
        write_trajectory_csv(trajectory, self.output_dir)
        write_summary_json(trajectory, wall, self.output_dir)
        if trajectory.verdict == BLOWUP_DETECTED:
            logger.warning("Blow-up detected near t = %.6g", trajectory.t_max_estimate)
            return EXIT_BLOWUP
        logger.info("Run completed: %d steps, max constraint residual %.3e",
                    trajectory.steps_taken, trajectory.max_constraint_residual)
        return EXIT_OK

    def cmd_verify(self):
        config = self._load()
        _, ops, _ = self._assemble(config)
        results = run_verification(ops, self.cache, config.constraint_sign, config.seed,
                                   config.max_workers)
        write_verify_json(results, self.output_dir)
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.error("Verification failed: %s", ', '.join(failed))
            return EXIT_VERIFY_FAILED
        logger.info("All %d checks passed", len(results))
        return EXIT_OK

    def cmd_converge(self):
        config = self._load()
        grid, ops, solver = self._assemble(config)
        V0 = self._initial_state(config, grid)
        studies = run_convergence(config, self.cache, V0, ops, solver)
        write_converge_csv([row for study in studies for row in study.rows], self.output_dir)
        failed = [s.study for s in studies if not s.passed]
        if failed:
            logger.error("Observed order out of bracket: %s", ', '.join(failed))
            return EXIT_VERIFY_FAILED
        return EXIT_OK

    def run(self, command):
        """Run a command and map its outcome to a process exit code."""
        if command not in self.COMMANDS:
            logger.error("Unknown command %r", command)
            return EXIT_CONFIG_ERROR
        self.operation_start_time = time.time()
        logger.info("Starting %s with %s", command, self.config_file)
        try:
            code = getattr(self, f'cmd_{command}')()
        except ConfigError as e:
            logger.error("Configuration error: %s", e)
            code = EXIT_CONFIG_ERROR
        except PdaeError as e:
            logger.error("%s: %s", type(e).__name__, e)
            code = EXIT_CONFIG_ERROR
        logger.debug("Operator cache holds %d assembled set(s)", len(self.cache))
        duration = time.time() - self.operation_start_time
        logger.info("Finished in %.2f seconds (exit code %d)", duration, code)
        self.operation_start_time = None
        return code
