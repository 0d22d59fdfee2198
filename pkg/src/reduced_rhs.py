# reduced_rhs.py
"""
The nonlinearity F, the reduced right-hand side K(V) = F(V, L^{-1} G(V)) obtained
by eliminating the algebraic field, and sampled local-Lipschitz estimates.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from constants import NONLINEARITIES
from grid import AlgState, DiffState, GridFn
from utils.errors import DomainError

logger = logging.getLogger(__name__)


# --- Nonlinearities on node arrays (broadcast over leading axes) ---

def _coupled_values(u, v, w):
    return w * v + u * w, w * v + u


def _square_values(u, v, w):
    return u * u, v * v


def _zero_values(u, v, w):
    return np.zeros_like(u), np.zeros_like(v)


def _linear_values(u, v, w):
    return np.array(u, dtype=float), np.array(v, dtype=float)


_ARRAY_NONLINEARITIES = {
    'paper': _coupled_values,
    'square_test': _square_values,
    'zero': _zero_values,
    'linear_test': _linear_values,
}


def _wrap(values_fn):
    def evaluate(U):
        fu, fv = values_fn(U.V.u.values, U.V.v.values, U.w.w.values)
        return DiffState(GridFn(U.grid, fu), GridFn(U.grid, fv))
    evaluate.values_fn = values_fn
    return evaluate


nonlinearity_f = _wrap(_coupled_values)
nonlinearity_f.__doc__ = "F(U) = (w v + u w, w v + u), pointwise on the grid."
square_test_f = _wrap(_square_values)
zero_f = _wrap(_zero_values)
linear_test_f = _wrap(_linear_values)


def resolve_nonlinearity(nonlinearity):
    """Map a registry name or a (u, v, w) -> (fu, fv) callable to the array form."""
    if callable(nonlinearity):
        return getattr(nonlinearity, 'values_fn', nonlinearity)
    try:
        return _ARRAY_NONLINEARITIES[nonlinearity]
    except KeyError:
        raise DomainError(
            f"unknown nonlinearity {nonlinearity!r}; expected one of {NONLINEARITIES}") from None


class ReducedSystem:
    """
    V' = A V + K(V), K(V) = F(V, w(V)), w(V) = L^{-1} G(V).

    Works on (2, n_nodes) arrays holding u and v, or stacks of them.
    """

    def __init__(self, ops, solver, nonlinearity='paper'):
        ops.grid.check_same(solver.grid)
        self.ops = ops
        self.solver = solver
        self.grid = ops.grid
        self.nonlinearity = nonlinearity if isinstance(nonlinearity, str) else getattr(
            nonlinearity, '__name__', 'custom')
        self._f = resolve_nonlinearity(nonlinearity)

    def constraint_values(self, uv):
        """Return (w, g) node arrays for the differential state(s) uv."""
        uv = np.asarray(uv, dtype=float)
        g = self.solver.sign * (uv[..., 0, :] + uv[..., 1, :])
        return self.solver.solve_values(g), g

    def k_values(self, uv):
        """Return (K, w); K has the shape of uv."""
        uv = np.asarray(uv, dtype=float)
        w, _ = self.constraint_values(uv)
        fu, fv = self._f(uv[..., 0, :], uv[..., 1, :], w)
        return np.stack((fu, fv), axis=-2), w


def reduced_k(V, solver, nonlinearity='paper'):
    """
    Eliminate the constraint and evaluate the reduced right-hand side.

    Returns:
        (K, w): K(V) as a DiffState and the constraint-consistent AlgState.
    """
    solver.grid.check_same(V.grid)
    g = solver.rhs(V)
    w_values = solver.solve_values(g.values)
    w = AlgState(GridFn(V.grid, w_values))
    fu, fv = resolve_nonlinearity(nonlinearity)(V.u.values, V.v.values, w_values)
    return DiffState(GridFn(V.grid, fu), GridFn(V.grid, fv)), w


# --- Lipschitz estimation ---

@dataclass(frozen=True)
class LipschitzReport:
    op: str
    radius_C: float
    samples: int
    max_ratio: float
    component_constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.max_ratio >= 0.0:
            raise DomainError(f"Lipschitz ratio must be non-negative, got {self.max_ratio}")
        if self.samples < 2:
            raise DomainError(f"at least 2 samples are required, got {self.samples}")

    @property
    def composite_bound(self):
        """L (1 + L1 L2) from the matched component constants (K reports only)."""
        c = self.component_constants
        return c['F'] * (1.0 + c['L_inv'] * c['G'])


LIPSCHITZ_OPS = ('F', 'G', 'L_inv', 'K')
_SPACE_OF_OP = {'F': 'X', 'G': 'E', 'L_inv': 'L2', 'K': 'E'}


def _e_norm(grid, uv):
    return float(np.sqrt(np.sum(grid.weights * uv * uv)))


def _x_norm(ops, uvw):
    return float(np.sqrt(_e_norm(ops.grid, uvw[:2]) ** 2 + max(ops.bending(uvw[2]), 0.0)))


def _l2_norm(grid, g):
    return float(np.sqrt(np.dot(grid.weights, g * g)))


def _point_norm(space, ops, point):
    if space == 'E':
        return _e_norm(ops.grid, point)
    if space == 'X':
        return _x_norm(ops, point)
    return _l2_norm(ops.grid, point)


def sample_ball_pairs(space, ops, radius_C, samples, seed):
    """
    Draw `samples` pairs of points in the ball of radius radius_C.

    Node values are i.i.d. uniform on [-1, 1] (w clamped to zero at the
    boundary for space 'X'), then each point is rescaled to norm radius_C * rho
    with rho uniform on (0, 1]. Shapes: 'E' -> (samples, 2, 2, n),
    'X' -> (samples, 2, 3, n), 'L2' -> (samples, 2, n).
    """
    if not radius_C > 0.0:
        raise DomainError(f"ball radius must be positive, got {radius_C}")
    if int(samples) != samples or samples < 2:
        raise DomainError(f"samples must be an integer >= 2, got {samples}")
    rng = np.random.default_rng(seed)
    n = ops.grid.size
    shape = {'E': (2,), 'X': (3,), 'L2': ()}[space]
    points = rng.uniform(-1.0, 1.0, size=(int(samples), 2) + shape + (n,))
    if space == 'X':
        points[:, :, 2, 0] = 0.0
        points[:, :, 2, -1] = 0.0
    rho = 1.0 - rng.uniform(0.0, 1.0, size=(int(samples), 2))
    for p in range(points.shape[0]):
        for q in range(2):
            norm = _point_norm(space, ops, points[p, q])
            points[p, q] *= radius_C * rho[p, q] / norm
    return points


def estimate_lipschitz(op, radius_C, samples, seed, *, ops, solver=None,
                       nonlinearity='paper', pairs=None, max_workers=None):
    """
    Empirical Lipschitz constant of F, G, L^{-1} or K on a ball of radius_C.

    Ratios are measured X -> E for F, E -> L2 for G (the computable proxy of
    its dual-space norm), L2 -> S for L^{-1} (S the bending seminorm) and
    E -> E for K. For K the component constants of F, L^{-1} and G are taken
    on the very pairs that define the K ratio, so the composite bound
    L (1 + L1 L2) can be compared directly.
    """
    if op not in LIPSCHITZ_OPS:
        raise DomainError(f"unknown operator {op!r}; expected one of {LIPSCHITZ_OPS}")
    if op in ('L_inv', 'K') and solver is None:
        raise DomainError(f"estimating {op} requires a constraint solver")
    space = _SPACE_OF_OP[op]
    if pairs is None:
        pairs = sample_ball_pairs(space, ops, radius_C, samples, seed)
    elif not radius_C > 0.0:
        raise DomainError(f"ball radius must be positive, got {radius_C}")
    pairs = np.asarray(pairs, dtype=float)
    grid = ops.grid
    sign = solver.sign if solver is not None else -1
    f_values = resolve_nonlinearity(nonlinearity)

    def evaluate_pair(pair):
        a, b = pair
        if op == 'G':
            diff = sign * ((a[0] + a[1]) - (b[0] + b[1]))
            return (_l2_norm(grid, diff) / _e_norm(grid, a - b),)
        if op == 'L_inv':
            wa, wb = solver.solve_values(np.stack((a, b)))
            return (np.sqrt(max(ops.bending(wa - wb), 0.0)) / _l2_norm(grid, a - b),)
        if op == 'F':
            fa = np.stack(f_values(a[0], a[1], a[2]))
            fb = np.stack(f_values(b[0], b[1], b[2]))
            return (_e_norm(grid, fa - fb) / _x_norm(ops, a - b),)
        # K, with matched component ratios
        ga = sign * (a[0] + a[1])
        gb = sign * (b[0] + b[1])
        wa, wb = solver.solve_values(np.stack((ga, gb)))
        fa = np.stack(f_values(a[0], a[1], wa))
        fb = np.stack(f_values(b[0], b[1], wb))
        dV = _e_norm(grid, a - b)
        dg = _l2_norm(grid, ga - gb)
        dw = np.sqrt(max(ops.bending(wa - wb), 0.0))
        dU = np.sqrt(dV ** 2 + dw ** 2)
        dF = _e_norm(grid, fa - fb)
        return dF / dV, dF / dU, dw / dg, dg / dV

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        ratios = np.array(list(executor.map(evaluate_pair, pairs)))

    components = {}
    if op == 'K':
        components = {
            'F': float(np.max(ratios[:, 1])),
            'L_inv': float(np.max(ratios[:, 2])),
            'G': float(np.max(ratios[:, 3])),
        }
    report = LipschitzReport(op=op, radius_C=float(radius_C), samples=len(pairs),
                             max_ratio=float(np.max(ratios[:, 0])),
                             component_constants=components)
    logger.debug("Lipschitz estimate %s at C=%g over %d pairs: %.6g",
                 op, radius_C, len(pairs), report.max_ratio)
    return report
