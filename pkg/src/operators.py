# operators.py
"""
Assembly of the discrete operators on a Grid1D:

- the generator A (second derivative, Neumann or Dirichlet), built in
  summation-by-parts form so that <Af, f>_W = -sum h (Df)^2 holds exactly;
- the clamped bending form B (w_xx^2 quadrature with ghost reflection);
- the constraint operator L = B + I on interior nodes;
- the weighted symmetric eigendecomposition of A, which gives e^{tA} and the
  phi-functions of exponential integrators exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy import sparse

from constants import (
    BOUNDARY_CONDITIONS,
    EIGENVALUE_TOLERANCE,
    MIN_CELLS_BIHARMONIC,
    MIN_CELLS_LAPLACIAN,
    PHI1_TAYLOR_CUTOFF,
    PHI2_TAYLOR_CUTOFF,
)
from grid import GridFn
from utils.errors import DomainError, NumericalError, SizeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """
    Square banded matrix in LAPACK diagonal-ordered storage:
    bands[bandwidth + i - j, j] == a[i, j].
    """

    bandwidth: int
    bands: np.ndarray
    name: str = ''

    def __post_init__(self):
        bands = np.array(self.bands, dtype=float)
        if bands.ndim != 2 or bands.shape[0] != 2 * self.bandwidth + 1:
            raise ValueError(f"band storage has shape {bands.shape} for bandwidth {self.bandwidth}")
        bands.flags.writeable = False
        object.__setattr__(self, 'bands', bands)

    @classmethod
    def from_sparse(cls, matrix, bandwidth, name=''):
        matrix = sparse.csr_matrix(matrix)
        n = matrix.shape[0]
        bands = np.zeros((2 * bandwidth + 1, n))
        for row, offset in enumerate(range(bandwidth, -bandwidth - 1, -1)):
            diagonal = matrix.diagonal(offset)
            if offset >= 0:
                bands[row, offset:] = diagonal
            else:
                bands[row, :n + offset] = diagonal
        return cls(bandwidth, bands, name)

    @property
    def size(self):
        return self.bands.shape[1]

    @property
    def offsets(self):
        return np.arange(self.bandwidth, -self.bandwidth - 1, -1)

    @cached_property
    def sparse(self):
        return sparse.dia_matrix((self.bands, self.offsets), shape=(self.size, self.size)).tocsr()

    def matvec(self, values):
        """Apply to a vector, or to each row of a 2-D array."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            return self.sparse @ values
        return (self.sparse @ values.T).T

    def to_dense(self):
        return self.sparse.toarray()

    def diagonal(self, offset=0):
        return self.sparse.diagonal(offset)

    def with_diagonal(self, offset, values):
        """Copy with one diagonal replaced (used for fault injection)."""
        matrix = self.sparse.tolil()
        matrix.setdiag(values, offset)
        return BandedOperator.from_sparse(matrix, self.bandwidth, self.name)


# --- phi-functions of exponential integrators ---

def phi1(z):
    """phi1(z) = (e^z - 1)/z, with phi1(0) = 1 and a Taylor branch near 0."""
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    far = np.abs(z) >= PHI1_TAYLOR_CUTOFF
    out[far] = np.expm1(z[far]) / z[far]
    near = ~far
    out[near] = 1.0 + 0.5 * z[near]
    return out.reshape(shape)


def phi2(z):
    """phi2(z) = (e^z - 1 - z)/z^2, with phi2(0) = 1/2."""
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    far = np.abs(z) >= PHI2_TAYLOR_CUTOFF
    zf = z[far]
    out[far] = (np.expm1(zf) - zf) / (zf * zf)
    zn = z[~far]
    out[~far] = 0.5 + zn / 6.0 + zn * zn / 24.0
    return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class SpectralDecomp:
    """
    A = Q diag(eigenvalues) Q^T W with Q orthonormal in the weighted inner
    product (Q^T W Q = I). Eigenvalues are sorted descending and are <= 0.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    grid: object

    @cached_property
    def _sqrt_weights(self):
        return np.sqrt(self.grid.weights)

    @cached_property
    def _basis(self):
        # Standard-orthonormal eigenvectors of W^{1/2} A W^{-1/2}.
        return self.eigenvectors * self._sqrt_weights[:, None]

    def apply_multipliers(self, multipliers, values):
        """Apply g(A) given g(eigenvalues), to a vector or each row of a 2-D array."""
        values = np.asarray(values, dtype=float)
        coefficients = (values * self._sqrt_weights) @ self._basis
        return ((coefficients * multipliers) @ self._basis.T) / self._sqrt_weights

    def expm(self, t, values):
        return self.apply_multipliers(np.exp(t * self.eigenvalues), values)

    def phi1(self, t, values):
        return self.apply_multipliers(phi1(t * self.eigenvalues), values)

    def phi2(self, t, values):
        return self.apply_multipliers(phi2(t * self.eigenvalues), values)


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Every operator the solver needs, assembled once on one grid."""

    A: BandedOperator
    L: BandedOperator
    B: BandedOperator
    decomp: SpectralDecomp
    grid: object
    bc: str = 'neumann'
    a_disabled: bool = False

    def project(self, values):
        """Restrict node values to the domain of A (zero boundary values for dirichlet)."""
        if self.bc != 'dirichlet' or self.a_disabled:
            return values
        values = np.array(values, dtype=float)
        values[..., 0] = 0.0
        values[..., -1] = 0.0
        return values

    def bending(self, w_values):
        """Quadrature of int w_xx^2 for a clamped field given at all nodes."""
        interior = np.asarray(w_values, dtype=float)[1:-1]
        return float(self.grid.h * np.dot(interior, self.B.matvec(interior)))

    def replace(self, **changes):
        return replace(self, **changes)


# --- Assembly ---

def _difference_matrix(grid):
    """Forward differences (f_{i+1} - f_i)/h, shape (n_cells, n_cells + 1)."""
    n = grid.n_cells
    return sparse.diags([-np.ones(n), np.ones(n)], [0, 1], shape=(n, n + 1)) / grid.h


def _laplacian_from_stiffness(grid, stiffness, name):
    # A = -W^{-1} K, so W A = -K is symmetric and negative semi-definite.
    matrix = -sparse.diags(1.0 / grid.weights) @ stiffness
    return BandedOperator.from_sparse(matrix, 1, name)


def assemble_laplacian_neumann(grid):
    """Second-derivative operator with u_x = 0 at both ends (mirror ghost nodes)."""
    if grid.n_cells < MIN_CELLS_LAPLACIAN:
        raise SizeError(f"Laplacian needs n_cells >= {MIN_CELLS_LAPLACIAN}, got {grid.n_cells}")
    D = _difference_matrix(grid)
    stiffness = grid.h * (D.T @ D)
    return _laplacian_from_stiffness(grid, stiffness, 'laplacian_neumann')


def assemble_laplacian_dirichlet(grid):
    """Second-derivative operator acting on fields with zero boundary values."""
    if grid.n_cells < MIN_CELLS_LAPLACIAN:
        raise SizeError(f"Laplacian needs n_cells >= {MIN_CELLS_LAPLACIAN}, got {grid.n_cells}")
    D = _difference_matrix(grid)
    mask = np.ones(grid.size)
    mask[0] = mask[-1] = 0.0
    P = sparse.diags(mask)
    stiffness = grid.h * (P @ D.T @ D @ P)
    return _laplacian_from_stiffness(grid, stiffness, 'laplacian_dirichlet')


def zero_generator(grid):
    return BandedOperator(1, np.zeros((3, grid.size)), 'zero')


def _second_difference_clamped(grid):
    """
    Map interior values w_1..w_{N-1} to w_xx at nodes 0..N, using w_0 = w_N = 0
    and the ghost reflection w_{-1} = w_1, w_{N+1} = w_{N-1}.
    """
    n, m = grid.n_cells, grid.n_cells - 1
    inv_h2 = 1.0 / grid.h ** 2
    S = sparse.lil_matrix((n + 1, m))
    S[0, 0] = 2.0 * inv_h2
    S[n, m - 1] = 2.0 * inv_h2
    for node in range(1, n):
        col = node - 1
        S[node, col] = -2.0 * inv_h2
        if col - 1 >= 0:
            S[node, col - 1] = inv_h2
        if col + 1 < m:
            S[node, col + 1] = inv_h2
    return S.tocsr()


def assemble_bending_form(grid):
    """B on interior nodes with h * w^T B w = trapezoid quadrature of w_xx^2."""
    if grid.n_cells < MIN_CELLS_BIHARMONIC:
        raise SizeError(f"bending form needs n_cells >= {MIN_CELLS_BIHARMONIC}, got {grid.n_cells}")
    S = _second_difference_clamped(grid)
    matrix = (S.T @ sparse.diags(grid.weights) @ S) / grid.h
    return BandedOperator.from_sparse(matrix, 2, 'bending')


def assemble_biharmonic_clamped(grid):
    """L = d^4/dx^4 + I on interior nodes, clamped; symmetric positive definite."""
    B = assemble_bending_form(grid)
    bands = np.array(B.bands)
    bands[B.bandwidth] += 1.0
    return BandedOperator(B.bandwidth, bands, 'biharmonic_clamped')


def eigendecompose(A, grid):
    """Full eigendecomposition of W^{1/2} A W^{-1/2}; eigenvalues sorted descending."""
    if A.size != grid.size:
        raise SizeError(f"operator of size {A.size} does not match grid with {grid.size} nodes")
    sqrt_w = np.sqrt(grid.weights)
    symmetric = (sqrt_w[:, None] * A.to_dense()) / sqrt_w[None, :]
    asymmetry = np.max(np.abs(symmetric - symmetric.T), initial=0.0)
    scale = max(1.0, np.max(np.abs(symmetric), initial=0.0))
    if asymmetry > 1e-10 * scale:
        logger.warning("Generator is not self-adjoint in the weighted product (asymmetry %.3e)", asymmetry)
    symmetric = 0.5 * (symmetric + symmetric.T)
    try:
        eigenvalues, basis = scipy.linalg.eigh(symmetric)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"symmetric eigensolver did not converge: {e}") from e

    eigenvalues = eigenvalues[::-1]
    basis = basis[:, ::-1]
    # Roundoff around the zero eigenvalue scales with the spectral radius.
    radius = max(1.0, float(np.max(np.abs(eigenvalues), initial=0.0)))
    if eigenvalues[0] > EIGENVALUE_TOLERANCE * radius:
        logger.warning("Generator has a positive eigenvalue %.3e; semigroup is not a contraction",
                       eigenvalues[0])
    else:
        eigenvalues = np.minimum(eigenvalues, 0.0)
    eigenvectors = basis / sqrt_w[:, None]
    eigenvalues.flags.writeable = False
    eigenvectors.flags.writeable = False
    return SpectralDecomp(eigenvalues, eigenvectors, grid)


def assemble_generator(grid, bc='neumann', a_disabled=False):
    if a_disabled:
        return zero_generator(grid)
    if bc == 'neumann':
        return assemble_laplacian_neumann(grid)
    if bc == 'dirichlet':
        return assemble_laplacian_dirichlet(grid)
    raise DomainError(f"unknown boundary condition {bc!r}; expected one of {BOUNDARY_CONDITIONS}")


def assemble_operators(grid, bc='neumann', a_disabled=False):
    """Assemble A, L, B and the eigendecomposition of A on one grid."""
    logger.debug("Assembling operators: n_cells=%d bc=%s a_disabled=%s", grid.n_cells, bc, a_disabled)
    A = assemble_generator(grid, bc, a_disabled)
    L = assemble_biharmonic_clamped(grid)
    B = assemble_bending_form(grid)
    decomp = eigendecompose(A, grid)
    return OperatorSet(A=A, L=L, B=B, decomp=decomp, grid=grid, bc=bc, a_disabled=a_disabled)


# --- Operator actions on grid functions ---

def semigroup_apply(decomp, t, f):
    """e^{tA} f."""
    if not t >= 0.0:
        raise DomainError(f"semigroup time must be non-negative, got {t}")
    f.grid.check_same(decomp.grid)
    return GridFn(f.grid, decomp.expm(t, f.values))


def phi1_apply(decomp, t, f):
    """phi1(tA) f, the exponential-Euler weight."""
    if not t > 0.0:
        raise DomainError(f"phi1 time must be positive, got {t}")
    f.grid.check_same(decomp.grid)
    return GridFn(f.grid, decomp.phi1(t, f.values))


def phi2_apply(decomp, t, f):
    if not t > 0.0:
        raise DomainError(f"phi2 time must be positive, got {t}")
    f.grid.check_same(decomp.grid)
    return GridFn(f.grid, decomp.phi2(t, f.values))


def shifted_solve(A, shift, rhs):
    """Solve (shift*I - A) f = rhs with a banded LU."""
    bw = A.bandwidth
    ab = -np.array(A.bands)
    ab[bw] += shift
    try:
        return scipy.linalg.solve_banded((bw, bw), ab, np.asarray(rhs, dtype=float))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"shifted solve failed: {e}") from e


def weighted_inner_values(grid, a, b):
    """Weighted inner product of raw node vectors."""
    return float(np.dot(grid.weights, np.asarray(a) * np.asarray(b)))
