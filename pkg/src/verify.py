# verify.py
"""
Verification harness: executable checks of the operator properties the solver
relies on (dissipativity and maximality of A, the contraction semigroup,
coercivity and solvability of the constraint, Lipschitz structure of the
reduced right-hand side). Each check yields one CheckResult.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from constraint import ConstraintSolver, weak_form_residual
from grid import AlgState, Grid1D, GridFn, weighted_norm
from operators import shifted_solve
from reduced_rhs import estimate_lipschitz, sample_ball_pairs
from utils.errors import PdaeError

logger = logging.getLogger(__name__)

LIPSCHITZ_RADII = (0.1, 1.0, 10.0)
LIPSCHITZ_SAMPLES = 200
MANUFACTURED_LEVELS = (64, 128)
MANUFACTURED_RATIO = (3.5, 4.5)
WEAK_FORM_MAX_CELLS = 64

STATEMENTS = {
    'dissipativity': "A is dissipative: <Af, f> <= 0 on its domain",
    'maximality': "A is maximal: I - A is onto, (I - A) f = g solvable for every g",
    'contraction': "e^{tA} is a contraction: ||e^{tA} f|| <= ||f|| for t >= 0",
    'semigroup_law': "e^{(s+t)A} = e^{sA} e^{tA}",
    'strong_continuity': "e^{tA} f -> f as t -> 0+",
    'spectral_reconstruction': "A = Q diag(lambda) Q^T W from the weighted eigendecomposition",
    'coercivity': "the bending form a(w, w) >= ||w_xx||^2 is coercive on H^2_0",
    'constraint_spd': "the clamped constraint operator L is symmetric positive definite",
    'manufactured_order': "the clamped solve converges at second order in h",
    'weak_form_residual': "the solved w satisfies a(w, phi) = <g, phi> for every test function",
    'energy_identity': "a(w, w) = <g, w> for the solved w",
    'inverse_bound': "||L^{-1} g||_S <= ||g||",
    'g_continuity': "G(V) = +-(u + v) is Lipschitz from E with constant <= sqrt(2)",
    'lipschitz_composite': "K = F(V, L^{-1} G V) is locally Lipschitz with constant <= L_F (1 + L_inv L_G)",
    'lipschitz_growth': "the local Lipschitz constant of F does not shrink as the ball grows",
    'lipschitz_small_ball': "difference quotients of F settle as the ball shrinks to 0",
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float | None
    tolerance: float | None
    statement: str = ''


def manufactured_w(x):
    return x ** 2 * (1.0 - x) ** 2


def manufactured_g(x):
    """w'''' + w for w = x^2 (1 - x)^2."""
    return 24.0 + manufactured_w(x)


def _unit_vectors(rng, grid, count, project):
    """Random node vectors normalized in the weighted norm."""
    out = []
    for _ in range(count):
        f = project(rng.uniform(-1.0, 1.0, grid.size))
        out.append(f / weighted_norm(grid, f))
    return out


class Verifier:
    """Runs every check against one OperatorSet; the operator cache serves extra grids."""

    def __init__(self, ops, cache, sign=-1, seed=0, max_workers=None):
        self.ops = ops
        self.grid = ops.grid
        self.cache = cache
        self.sign = sign
        self.seed = seed
        self.max_workers = max_workers
        self.rng = np.random.default_rng(seed)
        self._solver = None

    @property
    def solver(self):
        if self._solver is None:
            self._solver = ConstraintSolver(self.ops, self.sign)
        return self._solver

    # --- Generator and semigroup ---

    def check_dissipativity(self):
        ops = self.ops
        worst = max(
            float(np.dot(self.grid.weights, ops.A.matvec(f) * f))
            for f in _unit_vectors(self.rng, self.grid, 100, ops.project)
        )
        return CheckResult('dissipativity', worst <= 1e-12, worst, 1e-12)

    def check_maximality(self):
        worst = 0.0
        for _ in range(20):
            g = self.rng.uniform(-1.0, 1.0, self.grid.size)
            f = shifted_solve(self.ops.A, 1.0, g)
            residual = f - self.ops.A.matvec(f) - g
            worst = max(worst, float(np.max(np.abs(residual)) / np.max(np.abs(g))))
        return CheckResult('maximality', worst <= 1e-10, worst, 1e-10)

    def check_contraction(self):
        decomp = self.ops.decomp
        worst = -np.inf
        for f in _unit_vectors(self.rng, self.grid, 50, self.ops.project):
            t = self.rng.uniform(0.0, 10.0)
            worst = max(worst, weighted_norm(self.grid, decomp.expm(t, f)) - 1.0)
        return CheckResult('contraction', worst <= 1e-12, float(worst), 1e-12)

    def check_semigroup_law(self):
        decomp = self.ops.decomp
        worst = 0.0
        for f in _unit_vectors(self.rng, self.grid, 20, self.ops.project):
            s, t = self.rng.uniform(0.0, 5.0, 2)
            composed = decomp.expm(s, decomp.expm(t, f))
            worst = max(worst, float(np.max(np.abs(composed - decomp.expm(s + t, f)))))
        return CheckResult('semigroup_law', worst <= 1e-10, worst, 1e-10)

    def check_strong_continuity(self):
        # sin^2 is smooth and compatible with both boundary conditions.
        f = np.sin(np.pi * self.grid.nodes) ** 2
        drift = weighted_norm(self.grid, self.ops.decomp.expm(1e-8, f) - f)
        return CheckResult('strong_continuity', drift <= 1e-6, drift, 1e-6)

    def check_spectral_reconstruction(self):
        decomp = self.ops.decomp
        radius = max(1.0, float(np.max(np.abs(decomp.eigenvalues))))
        worst = 0.0
        for f in _unit_vectors(self.rng, self.grid, 10, self.ops.project):
            rebuilt = decomp.apply_multipliers(decomp.eigenvalues, f)
            worst = max(worst, weighted_norm(self.grid, self.ops.A.matvec(f) - rebuilt) / radius)
        return CheckResult('spectral_reconstruction', worst <= 1e-10, worst, 1e-10)

    # --- Constraint operator ---

    def check_coercivity(self):
        h = self.grid.h
        difference = h * (self.ops.L.to_dense() - self.ops.B.to_dense())
        smallest = float(np.linalg.eigvalsh(0.5 * (difference + difference.T))[0])
        return CheckResult('coercivity', smallest >= -1e-10, smallest, -1e-10)

    def check_constraint_spd(self):
        self._solver = None
        try:
            _ = self.solver
        except PdaeError:
            return CheckResult('constraint_spd', False, None, 0.0)
        smallest = float(np.linalg.eigvalsh(self.ops.L.to_dense())[0])
        return CheckResult('constraint_spd', smallest > 0.0, smallest, 0.0)

    def check_manufactured_order(self):
        errors = []
        for n_cells in MANUFACTURED_LEVELS:
            grid = Grid1D(n_cells)
            ops = self.cache.get(grid, self.ops.bc, self.ops.a_disabled)
            solver = ConstraintSolver(ops, sign=1)
            w = solver.solve_values(manufactured_g(grid.nodes))
            errors.append(float(np.max(np.abs(w - manufactured_w(grid.nodes)))))
        ratio = errors[0] / errors[1]
        low, high = MANUFACTURED_RATIO
        return CheckResult('constraint_manufactured_order', low <= ratio <= high, ratio, high)

    def check_weak_form_residual(self):
        grid = self.grid
        ops, solver = self.ops, self.solver
        if grid.n_cells > WEAK_FORM_MAX_CELLS:
            grid = Grid1D(WEAK_FORM_MAX_CELLS)
            ops = self.cache.get(grid, self.ops.bc, self.ops.a_disabled)
            solver = ConstraintSolver(ops, self.sign)
        g = GridFn(grid, manufactured_g(grid.nodes))
        w = AlgState(GridFn(grid, solver.solve_values(g.values)))
        measured = weak_form_residual(w, g, ops) / (1.0 + weighted_norm(grid, g.values))
        return CheckResult('weak_form_residual', measured <= 1e-10, measured, 1e-10)

    def check_energy_identity(self):
        h = self.grid.h
        worst = 0.0
        for _ in range(20):
            g = self.rng.uniform(-1.0, 1.0, self.grid.size)
            w = self.solver.solve_values(g)
            interior = w[1:-1]
            form = h * float(np.dot(interior, self.ops.L.matvec(interior)))
            load = h * float(np.dot(g[1:-1], interior))
            worst = max(worst, abs(form - load) / max(abs(load), 1e-300))
        return CheckResult('energy_identity', worst <= 1e-9, worst, 1e-9)

    def check_inverse_bound(self):
        worst = 0.0
        for _ in range(100):
            g = self.rng.uniform(-1.0, 1.0, self.grid.size)
            w = self.solver.solve_values(g)
            seminorm = np.sqrt(max(self.ops.bending(w), 0.0))
            worst = max(worst, float(seminorm / weighted_norm(self.grid, g)))
        bound = 1.0 + 1e-9
        return CheckResult('inverse_bound', worst <= bound, worst, bound)

    # --- Lipschitz structure ---

    def check_g_continuity(self):
        report = estimate_lipschitz('G', 1.0, LIPSCHITZ_SAMPLES, self.seed, ops=self.ops,
                                    solver=self.solver, max_workers=self.max_workers)
        bound = np.sqrt(2.0) * (1.0 + 1e-6)
        return CheckResult('g_continuity', report.max_ratio <= bound, report.max_ratio, bound)

    def check_lipschitz_composite(self):
        results = []
        for radius in LIPSCHITZ_RADII:
            report = estimate_lipschitz('K', radius, LIPSCHITZ_SAMPLES, self.seed, ops=self.ops,
                                        solver=self.solver, max_workers=self.max_workers)
            ratio = report.max_ratio / report.composite_bound
            results.append(CheckResult(f'lipschitz_composite[C={radius:g}]', ratio <= 1.1, ratio, 1.1))
        return results

    def check_lipschitz_growth(self):
        """The envelope L(C) of F does not shrink as C grows (nested sample sets)."""
        radius = 1.0
        inner = sample_ball_pairs('X', self.ops, radius, LIPSCHITZ_SAMPLES, self.seed)
        shell = sample_ball_pairs('X', self.ops, 2.0 * radius, LIPSCHITZ_SAMPLES, self.seed + 1)
        small = estimate_lipschitz('F', radius, len(inner), self.seed, ops=self.ops,
                                   pairs=inner, max_workers=self.max_workers)
        large = estimate_lipschitz('F', 2.0 * radius, 2 * len(inner), self.seed, ops=self.ops,
                                   pairs=np.concatenate((inner, shell)), max_workers=self.max_workers)
        gap = small.max_ratio - large.max_ratio
        return CheckResult('lipschitz_growth', gap <= 1e-12, gap, 1e-12)

    def check_lipschitz_small_ball(self):
        """Quotients of F settle to the Jacobian at 0 as the ball shrinks."""
        tiny = estimate_lipschitz('F', 1e-6, LIPSCHITZ_SAMPLES, self.seed, ops=self.ops,
                                  max_workers=self.max_workers)
        small = estimate_lipschitz('F', 1e-3, LIPSCHITZ_SAMPLES, self.seed, ops=self.ops,
                                   max_workers=self.max_workers)
        ratio = tiny.max_ratio / small.max_ratio
        return CheckResult('lipschitz_small_ball', 0.5 <= ratio <= 2.0, ratio, 2.0)

    def checks(self):
        return (
            self.check_dissipativity,
            self.check_maximality,
            self.check_contraction,
            self.check_semigroup_law,
            self.check_strong_continuity,
            self.check_spectral_reconstruction,
            self.check_coercivity,
            self.check_constraint_spd,
            self.check_manufactured_order,
            self.check_weak_form_residual,
            self.check_energy_identity,
            self.check_inverse_bound,
            self.check_g_continuity,
            self.check_lipschitz_composite,
            self.check_lipschitz_growth,
            self.check_lipschitz_small_ball,
        )

    def run(self):
        results = []
        for check in self.checks():
            name = check.__name__.removeprefix('check_')
            try:
                outcome = check()
            except PdaeError as e:
                logger.error("Check %s raised: %s", name, e)
                outcome = CheckResult(name, False, None, None)
            outcome = outcome if isinstance(outcome, list) else [outcome]
            outcome = [replace(r, statement=STATEMENTS[name]) for r in outcome]
            for result in outcome:
                level = logging.INFO if result.passed else logging.ERROR
                logger.log(level, "%-34s %s (measured %s, tolerance %s)", result.name,
                           'pass' if result.passed else 'FAIL', result.measured, result.tolerance)
                if not result.passed:
                    logger.error("  expected: %s", result.statement)
            results.extend(outcome)
        return results


def run_verification(ops, cache, sign=-1, seed=0, max_workers=None):
    return Verifier(ops, cache, sign, seed, max_workers).run()
