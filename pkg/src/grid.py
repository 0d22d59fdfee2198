# grid.py
"""
Discrete function spaces on the unit interval: the node-centered mesh, its
trapezoidal quadrature, and the L2 / product norms the solver measures in.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from utils.errors import DimensionError, DomainError, InputError, SizeError


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh x_i = i*h, i = 0..n_cells, over (0, 1)."""

    n_cells: int

    def __post_init__(self):
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise SizeError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        object.__setattr__(self, 'n_cells', int(self.n_cells))

    @property
    def h(self):
        return 1.0 / self.n_cells

    @property
    def size(self):
        """Number of nodes, boundary included."""
        return self.n_cells + 1

    @cached_property
    def nodes(self):
        nodes = np.arange(self.size, dtype=float) * self.h
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def weights(self):
        weights = np.full(self.size, self.h)
        weights[0] = weights[-1] = 0.5 * self.h
        weights.flags.writeable = False
        return weights

    def check_same(self, other):
        if self != other:
            raise DimensionError(
                f"grid mismatch: {self.n_cells} cells vs {other.n_cells} cells")


def _frozen_copy(values):
    values = np.array(values, dtype=float)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class GridFn:
    """One scalar field sampled at the grid nodes."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_copy(self.values)
        if values.shape != (self.grid.size,):
            raise DimensionError(
                f"expected {self.grid.size} node values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("grid function contains NaN or Inf values")
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.size, float(value)))

    @classmethod
    def from_function(cls, grid, func):
        """Sample a vectorized callable at the grid nodes."""
        return cls(grid, np.broadcast_to(func(grid.nodes), (grid.size,)))

    def _other_values(self, other):
        if isinstance(other, GridFn):
            self.grid.check_same(other.grid)
            return other.values
        return NotImplemented

    def __add__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return values
        return GridFn(self.grid, self.values + values)

    def __sub__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return values
        return GridFn(self.grid, self.values - values)

    def __neg__(self):
        return GridFn(self.grid, -self.values)

    def __mul__(self, alpha):
        if isinstance(alpha, GridFn):
            return GridFn(self.grid, self.values * self._other_values(alpha))
        return GridFn(self.grid, self.values * float(alpha))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DiffState:
    """The differential pair V = (u, v)."""

    u: GridFn
    v: GridFn

    def __post_init__(self):
        self.u.grid.check_same(self.v.grid)

    @property
    def grid(self):
        return self.u.grid

    @classmethod
    def zeros(cls, grid):
        return cls(GridFn.zeros(grid), GridFn.zeros(grid))

    @classmethod
    def from_array(cls, grid, array):
        """Build from a (2, n_cells + 1) array holding u and v."""
        array = np.asarray(array, dtype=float)
        if array.shape != (2, grid.size):
            raise DimensionError(f"expected shape (2, {grid.size}), got {array.shape}")
        return cls(GridFn(grid, array[0]), GridFn(grid, array[1]))

    def as_array(self):
        return np.vstack((self.u.values, self.v.values))

    def __add__(self, other):
        if not isinstance(other, DiffState):
            return NotImplemented
        return DiffState(self.u + other.u, self.v + other.v)

    def __sub__(self, other):
        if not isinstance(other, DiffState):
            return NotImplemented
        return DiffState(self.u - other.u, self.v - other.v)

    def __neg__(self):
        return DiffState(-self.u, -self.v)

    def __mul__(self, alpha):
        return DiffState(self.u * alpha, self.v * alpha)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class AlgState:
    """The algebraic field w, clamped: zero at both boundary nodes."""

    w: GridFn

    def __post_init__(self):
        if self.w.values[0] != 0.0 or self.w.values[-1] != 0.0:
            raise DomainError("algebraic field must vanish at both boundary nodes")

    @property
    def grid(self):
        return self.w.grid

    @classmethod
    def zeros(cls, grid):
        return cls(GridFn.zeros(grid))

    @classmethod
    def from_interior(cls, grid, interior):
        values = np.zeros(grid.size)
        values[1:-1] = interior
        return cls(GridFn(grid, values))


@dataclass(frozen=True, eq=False)
class FullState:
    """U = (V, w) at time t."""

    V: DiffState
    w: AlgState
    t: float = 0.0

    def __post_init__(self):
        self.V.grid.check_same(self.w.grid)
        if not self.t >= 0.0:
            raise DomainError(f"state time must be non-negative, got {self.t}")

    @property
    def grid(self):
        return self.V.grid


# --- Inner products and norms ---

def l2_inner(f, g):
    """Trapezoidal approximation of the L2 inner product on (0, 1)."""
    f.grid.check_same(g.grid)
    return float(np.dot(f.grid.weights, f.values * g.values))


def norm_E(V):
    """Norm on the differential space: sqrt(int u^2 + int v^2)."""
    return float(np.sqrt(l2_inner(V.u, V.u) + l2_inner(V.v, V.v)))


def bending_seminorm(w, ops):
    """sqrt(int w_xx^2) through the assembled bending form."""
    ops.grid.check_same(w.grid)
    return float(np.sqrt(max(ops.bending(w.w.values), 0.0)))


def norm_X(U, ops):
    """Hilbert norm of the full state: sqrt(int u^2 + int v^2 + int w_xx^2)."""
    ops.grid.check_same(U.grid)
    return float(np.sqrt(norm_E(U.V) ** 2 + max(ops.bending(U.w.w.values), 0.0)))


def norm_X_sum(U, ops):
    """Additive product norm ||V||_E + ||w||_S."""
    return norm_E(U.V) + bending_seminorm(U.w, ops)


def weighted_norm(grid, values):
    """Weighted L2 norm of raw node values; a stacked array is measured as one vector."""
    values = np.asarray(values)
    return float(np.sqrt(np.sum(grid.weights * values * values)))
