# integrate.py
"""
Time integration of the reduced evolution V' = A V + K(V) as a mild solution:
exponential Euler and two-step ETD steppers, a Picard iteration on the
variation-of-constants formula, and blow-up detection with refinement.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from constants import (
    BLOWUP_REFINEMENT,
    DEFAULT_BLOWUP_THRESHOLD,
    DEFAULT_PICARD_MAX_ITERS,
    DEFAULT_PICARD_NODES,
    DEFAULT_PICARD_TOL,
    SCHEMES,
)
from grid import AlgState, DiffState, FullState, GridFn
from reduced_rhs import ReducedSystem
from utils.errors import DomainError, InputError, PicardNonContractionError, StepOverflowError

logger = logging.getLogger(__name__)

COMPLETED = 'completed'
BLOWUP_DETECTED = 'blowup_detected'


@dataclass(frozen=True)
class PicardConfig:
    max_iters: int = DEFAULT_PICARD_MAX_ITERS
    tol: float = DEFAULT_PICARD_TOL
    quadrature_nodes: int = DEFAULT_PICARD_NODES

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError(f"picard max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0.0:
            raise DomainError(f"picard tol must be positive, got {self.tol}")
        if self.quadrature_nodes < 2:
            raise DomainError(f"picard needs at least 2 quadrature nodes, got {self.quadrature_nodes}")


@dataclass(frozen=True)
class StepperConfig:
    scheme: str = 'etd2'
    dt: float = 1e-3
    t_end: float = 1.0
    blowup_norm_threshold: float = DEFAULT_BLOWUP_THRESHOLD
    output_every: int = 1
    picard: PicardConfig = field(default_factory=PicardConfig)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.dt > 0.0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0.0:
            raise DomainError(f"t_end must be non-negative, got {self.t_end}")
        if not self.blowup_norm_threshold > 1.0:
            raise DomainError(f"blow-up threshold must exceed 1, got {self.blowup_norm_threshold}")
        if self.output_every < 1:
            raise DomainError(f"output_every must be >= 1, got {self.output_every}")


@dataclass
class Trajectory:
    """Recorded states of one run, with the blow-up verdict."""

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    constraint_residuals: list = field(default_factory=list)
    verdict: str = COMPLETED
    t_max_estimate: float | None = None
    steps_taken: int = 0
    iterations: int | None = None
    defect_history: list = field(default_factory=list)

    def record(self, state, residual):
        self.times.append(float(state.t))
        self.states.append(state)
        self.constraint_residuals.append(float(residual))

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def max_constraint_residual(self):
        return max(self.constraint_residuals, default=0.0)


# --- Array-level steppers ---

def _require_finite(values, t):
    if not np.all(np.isfinite(values)):
        raise StepOverflowError(f"non-finite values produced at t={t:.6g}", t=t)
    return values


def _exp_euler_values(ops, uv, k, dt):
    decomp = ops.decomp
    with np.errstate(over='ignore', invalid='ignore'):
        out = decomp.expm(dt, uv) + dt * decomp.phi1(dt, k)
    return ops.project(out)


def _etd2_values(ops, uv, k, k_prev, dt):
    decomp = ops.decomp
    with np.errstate(over='ignore', invalid='ignore'):
        out = (decomp.expm(dt, uv) + dt * decomp.phi1(dt, k)
               + dt * decomp.phi2(dt, k - k_prev))
    return ops.project(out)


def _norm_x_values(ops, uv, w):
    with np.errstate(over='ignore', invalid='ignore'):
        squared = np.sum(ops.grid.weights * uv * uv) + ops.bending(w)
    return float(np.sqrt(squared)) if np.isfinite(squared) else math.inf


def _full_state(grid, uv, w, t):
    return FullState(DiffState.from_array(grid, uv), AlgState(GridFn(grid, w)), t)


# --- Public steppers ---

def step_exp_euler(V, dt, ops, solver, nonlinearity='paper'):
    """V+ = e^{dt A} V + dt phi1(dt A) K(V)."""
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    system = ReducedSystem(ops, solver, nonlinearity)
    uv = V.as_array()
    k, _ = system.k_values(uv)
    out = _require_finite(_exp_euler_values(ops, uv, k, dt), dt)
    return DiffState.from_array(V.grid, out)


def step_etd2(V, V_prev_K, dt, ops, solver, nonlinearity='paper'):
    """
    Two-step exponential time differencing:
    V+ = e^{dt A} V + dt phi1(dt A) K_n + dt phi2(dt A) (K_n - K_{n-1}).

    Without a previous K the step is exponential Euler.
    """
    if V_prev_K is None:
        return step_exp_euler(V, dt, ops, solver, nonlinearity)
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    system = ReducedSystem(ops, solver, nonlinearity)
    uv = V.as_array()
    k, _ = system.k_values(uv)
    out = _require_finite(_etd2_values(ops, uv, k, V_prev_K.as_array(), dt), dt)
    return DiffState.from_array(V.grid, out)


class _Marcher:
    """Fixed-step march of one trajectory; holds the multistep history."""

    def __init__(self, system, scheme):
        self.system = system
        self.ops = system.ops
        self.scheme = scheme

    def start(self, uv):
        self.uv = uv
        self.k, self.w = self.system.k_values(uv)
        self.k_prev = None
        self.last_dt = None

    def advance(self, dt, t_new):
        """Take one step; return the proposed (uv, k, w) without committing."""
        if self.scheme == 'etd2' and self.k_prev is not None and self.last_dt == dt:
            uv = _etd2_values(self.ops, self.uv, self.k, self.k_prev, dt)
        else:
            uv = _exp_euler_values(self.ops, self.uv, self.k, dt)
        _require_finite(uv, t_new)
        with np.errstate(over='ignore', invalid='ignore'):
            k, w = self.system.k_values(uv)
        return uv, k, w

    def commit(self, uv, k, w, dt):
        self.k_prev = self.k
        self.uv, self.k, self.w = uv, k, w
        self.last_dt = dt


def _refine_blowup(system, scheme, uv, t_start, dt, threshold):
    """
    Re-integrate [t_start, t_start + dt] with dt / BLOWUP_REFINEMENT substeps.

    Returns (t_cross, tail). t_cross is the first substep time whose norm
    reaches the threshold or is not finite, None if no substep crosses.
    tail is (t, uv, w) of the crossing substep when it is finite, otherwise
    of the last finite substep.
    """
    marcher = _Marcher(system, scheme)
    marcher.start(uv)
    sub = dt / BLOWUP_REFINEMENT
    tail = (t_start, marcher.uv, marcher.w)
    for index in range(1, BLOWUP_REFINEMENT + 1):
        t_sub = t_start + index * sub
        try:
            uv_new, k_new, w_new = marcher.advance(sub, t_sub)
        except (StepOverflowError, InputError, ArithmeticError):
            return t_sub, tail
        norm = _norm_x_values(system.ops, uv_new, w_new)
        if not np.isfinite(norm) or not np.all(np.isfinite(w_new)):
            return t_sub, tail
        if norm >= threshold:
            return t_sub, (t_sub, uv_new, w_new)
        marcher.commit(uv_new, k_new, w_new, sub)
        tail = (t_sub, uv_new, w_new)
    return None, tail


def integrate(V0, cfg, ops, solver, nonlinearity='paper'):
    """
    March the configured scheme from V0 to cfg.t_end, recording (V, w, residual)
    every cfg.output_every steps. A norm reaching the blow-up threshold, or a
    non-finite value, stops the run with verdict 'blowup_detected' and a t_max
    estimate refined on the last interval.
    """
    if not isinstance(cfg, StepperConfig):
        raise DomainError("integrate needs a StepperConfig")
    system = ReducedSystem(ops, solver, nonlinearity)
    grid = ops.grid
    threshold = cfg.blowup_norm_threshold
    trajectory = Trajectory()

    marcher = _Marcher(system, cfg.scheme)
    marcher.start(ops.project(V0.as_array()))

    def record(t):
        _, g = system.constraint_values(marcher.uv)
        trajectory.record(_full_state(grid, marcher.uv, marcher.w, t),
                          solver.residual(marcher.w, g))

    record(0.0)
    if _norm_x_values(ops, marcher.uv, marcher.w) >= threshold:
        trajectory.verdict = BLOWUP_DETECTED
        trajectory.t_max_estimate = 0.0
        return trajectory

    n_steps = max(0, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    t = 0.0
    for step in range(1, n_steps + 1):
        dt = min(cfg.dt, cfg.t_end - t) if step == n_steps else cfg.dt
        t_new = cfg.t_end if step == n_steps else step * cfg.dt
        try:
            uv, k, w = marcher.advance(dt, t_new)
            norm = _norm_x_values(ops, uv, w)
            crossed = not np.isfinite(norm) or norm >= threshold
        except (StepOverflowError, InputError, ArithmeticError):
            uv = k = w = None
            crossed = True

        if crossed:
            logger.info("Norm threshold %.3g crossed in (%.6g, %.6g]; refining", threshold, t, t_new)
            t_cross, tail = _refine_blowup(system, cfg.scheme, marcher.uv, t, dt, threshold)
            if t_cross is None:
                t_cross = t_new
                if uv is not None:
                    tail = (t_new, uv, w)
            # Past an overflow the last finite substep is the final record.
            t_tail, uv_tail, w_tail = tail
            if (t_tail > trajectory.times[-1]
                    and np.all(np.isfinite(uv_tail)) and np.all(np.isfinite(w_tail))):
                with np.errstate(over='ignore', invalid='ignore'):
                    _, g = system.constraint_values(uv_tail)
                    residual = solver.residual(w_tail, g)
                trajectory.record(_full_state(grid, uv_tail, w_tail, t_tail), residual)
            trajectory.verdict = BLOWUP_DETECTED
            trajectory.t_max_estimate = float(t_cross)
            trajectory.steps_taken = step
            logger.info("Blow-up detected, t_max estimate %.6g", t_cross)
            return trajectory

        marcher.commit(uv, k, w, dt)
        t = t_new
        trajectory.steps_taken = step
        if step % cfg.output_every == 0 or step == n_steps:
            record(t)

    return trajectory


# --- Picard iteration on the variation-of-constants formula ---

def _product_trapezoid_march(ops, uv0, times, k):
    """
    V(t_{j+1}) = e^{d A} V(t_j) + d [phi1(d A) K_j + phi2(d A)(K_{j+1} - K_j)],
    the exact integral of e^{(t-s)A} K(s) for K linear on each subinterval.
    """
    decomp = ops.decomp
    out = np.empty((len(times),) + uv0.shape)
    out[0] = uv0
    for j in range(len(times) - 1):
        d = times[j + 1] - times[j]
        with np.errstate(over='ignore', invalid='ignore'):
            out[j + 1] = ops.project(decomp.expm(d, out[j])
                                     + d * decomp.phi1(d, k[j])
                                     + d * decomp.phi2(d, k[j + 1] - k[j]))
    return out


def picard_solve(V0, t_end, cfg, ops, solver, nonlinearity='paper'):
    """
    Successive approximation V^{m+1}(t) = e^{tA} V0 + int_0^t e^{(t-s)A} K(V^m(s)) ds
    on a uniform time grid, starting from the free evolution e^{tA} V0.

    Raises:
        PicardNonContractionError: max_iters reached; carries the defect history.
    """
    if not t_end >= 0.0:
        raise DomainError(f"t_end must be non-negative, got {t_end}")
    picard = cfg.picard
    system = ReducedSystem(ops, solver, nonlinearity)
    grid = ops.grid
    uv0 = ops.project(V0.as_array())
    if t_end == 0.0:
        trajectory = Trajectory(iterations=1, defect_history=[0.0])
        w, g = system.constraint_values(uv0)
        trajectory.record(_full_state(grid, uv0, w, 0.0), solver.residual(w, g))
        return trajectory
    times = np.linspace(0.0, t_end, picard.quadrature_nodes)
    iterate = np.stack([ops.decomp.expm(t, uv0) for t in times])

    defects = []
    for iteration in range(1, picard.max_iters + 1):
        with np.errstate(over='ignore', invalid='ignore'):
            k, _ = system.k_values(iterate)
        new = _product_trapezoid_march(ops, uv0, times, k)
        if not np.all(np.isfinite(new)):
            raise PicardNonContractionError(
                f"successive approximation diverged at iteration {iteration}", defects)
        defect = float(np.max(np.abs(new - iterate)))
        defects.append(defect)
        iterate = new
        logger.debug("Picard iteration %d: sup-norm change %.3e", iteration, defect)
        if defect <= picard.tol:
            break
    else:
        raise PicardNonContractionError(
            f"no contraction after {picard.max_iters} iterations (last change {defects[-1]:.3e})",
            defects)

    trajectory = Trajectory(iterations=iteration, defect_history=defects,
                            steps_taken=len(times) - 1)
    w_all, g_all = system.constraint_values(iterate)
    for t, uv, w, g in zip(times, iterate, w_all, g_all):
        trajectory.record(_full_state(grid, uv, w, float(t)), solver.residual(w, g))
    return trajectory


def mild_defect(trajectory, ops, solver, nonlinearity='paper'):
    """
    Weighted E-norm distance between the last stored state and the
    variation-of-constants formula evaluated from the stored states
    (product trapezoid quadrature on the stored times).
    """
    system = ReducedSystem(ops, solver, nonlinearity)
    times = np.asarray(trajectory.times)
    uvs = np.stack([state.V.as_array() for state in trajectory.states])
    k, _ = system.k_values(uvs)
    rebuilt = _product_trapezoid_march(ops, uvs[0], times, k)
    diff = rebuilt[-1] - uvs[-1]
    return float(np.sqrt(np.sum(ops.grid.weights * diff * diff)))
