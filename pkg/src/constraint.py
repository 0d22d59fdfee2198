# constraint.py
"""
The algebraic constraint L(w) = G(V): a clamped fourth-order problem solved by
a cached banded Cholesky factorization, plus the variational certificate.
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.linalg

from grid import AlgState, GridFn, weighted_norm
from utils.errors import DomainError, InputError, NumericalError

logger = logging.getLogger(__name__)


def g_of_v(V, sign=-1):
    """Constraint right-hand side sign * (u + v)."""
    if sign not in (1, -1):
        raise DomainError(f"constraint sign must be +1 or -1, got {sign!r}")
    return GridFn(V.grid, sign * (V.u.values + V.v.values))


class ConstraintSolver:
    """
    Holds the Cholesky factor of h*L (interior nodes) and solves L w = g.

    The weighted matrix h*L is the matrix of the bilinear form
    a(w, phi) = int w_xx phi_xx + int w phi in the nodal basis, so each solve is
    the discrete variational problem a(w, phi) = int g phi for all phi.
    """

    def __init__(self, ops, sign=-1):
        if sign not in (1, -1):
            raise DomainError(f"constraint sign must be +1 or -1, got {sign!r}")
        self.grid = ops.grid
        self.sign = sign
        self.L = ops.L
        weighted = self.grid.h * np.array(ops.L.bands)
        upper = weighted[:ops.L.bandwidth + 1]
        try:
            self._factor = scipy.linalg.cholesky_banded(upper, lower=False)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"constraint operator is not positive definite: {e}") from e
        logger.debug("Factored constraint operator on %d interior nodes", ops.L.size)

    def rhs(self, V):
        return g_of_v(V, self.sign)

    def solve_values(self, g_values):
        """
        Solve for node values of w given node values of g. Accepts a vector or a
        2-D array with one right-hand side per row; boundary values of w are zero.
        """
        g_values = np.asarray(g_values, dtype=float)
        if not np.all(np.isfinite(g_values)):
            raise InputError("constraint right-hand side contains NaN or Inf values")
        interior = g_values[..., 1:-1]
        weighted_rhs = self.grid.h * interior.T
        solution = scipy.linalg.cho_solve_banded((self._factor, False), weighted_rhs)
        # One refinement step against the unfactored operator.
        correction = weighted_rhs - self.grid.h * self.L.matvec(solution.T).T
        solution = solution + scipy.linalg.cho_solve_banded((self._factor, False), correction)
        w_values = np.zeros_like(g_values)
        w_values[..., 1:-1] = solution.T
        return w_values

    def residual(self, w_values, g_values):
        """Relative residual ||L w - g||_W / (1 + ||g||_W) over interior nodes."""
        interior = np.asarray(w_values, dtype=float)[1:-1]
        r = self.L.matvec(interior) - np.asarray(g_values, dtype=float)[1:-1]
        absolute = np.sqrt(self.grid.h * np.dot(r, r))
        return float(absolute / (1.0 + weighted_norm(self.grid, g_values)))


def solve_constraint(solver, g):
    """Return the clamped w with L w = g."""
    solver.grid.check_same(g.grid)
    return AlgState(GridFn(g.grid, solver.solve_values(g.values)))


def constraint_residual(solver, w, g):
    solver.grid.check_same(w.grid)
    solver.grid.check_same(g.grid)
    return solver.residual(w.w.values, g.values)


def weak_form_residual(w, g, ops):
    """
    max_i |a(w, phi_i) - l(phi_i)| over the nodal basis phi_i of interior nodes,
    with a the weighted L form and l(phi) = int g phi.
    """
    ops.grid.check_same(w.grid)
    ops.grid.check_same(g.grid)
    h = ops.grid.h
    interior = w.w.values[1:-1]
    residual = h * ops.L.matvec(interior) - h * g.values[1:-1]
    return float(np.max(np.abs(residual), initial=0.0))
