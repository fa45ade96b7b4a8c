"""Closed-loop simulation and cost evaluation.

Trajectories come from classical fixed-step fourth-order Runge-Kutta.  The
infinite-horizon quadratic cost is evaluated exactly through a Lyapunov
solve (``J = x0^T X x0`` with ``A_cl^T X + X A_cl + W = 0``); quadrature
over a simulated trajectory exists as an independent cross-check, not as
the primary route.  Unstable closed loops get an infinite cost sentinel
rather than an exception, so searches can keep moving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .errors import ShapeError
from .matkit import is_hurwitz, require_matrix, require_square
from .riccati import solve_lyapunov
from .rsm import CompositeSystem

# A state beyond this magnitude means the loop is blowing up; integrating
# further only manufactures overflow.
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled state history.  ``diverged`` marks truncation by
    the overflow guard; all stored samples are finite either way."""

    times: np.ndarray
    states: np.ndarray
    diverged: bool = False


@dataclass(frozen=True)
class CostResult:
    """Infinite-horizon cost.  ``value`` is ``inf`` and ``gram`` is None
    when the closed loop is not Hurwitz."""

    value: float
    gram: np.ndarray | None
    stable: bool


@dataclass(frozen=True)
class GapResult:
    J_composed: float
    J_direct: float
    gap: float
    stable_composed: bool
    stable_direct: bool


def _state_vector(x0, n: int) -> np.ndarray:
    arr = np.asarray(x0, dtype=float).reshape(-1)
    if arr.shape[0] != n:
        raise ShapeError(f"initial state has length {arr.shape[0]}, expected {n}")
    if not np.isfinite(arr).all():
        raise ShapeError("initial state contains non-finite entries")
    return arr


def simulate(a_cl, x0, horizon: float, step: float) -> Trajectory:
    """Integrate ``xdot = A_cl x`` from ``x0`` over ``[0, horizon]``.

    The step is adjusted to the nearest value that divides the horizon
    evenly, so the grid is uniform and the last sample lands exactly on the
    horizon.  Classical RK4: global error is O(step^4).
    """
    a_arr = require_square(a_cl, "closed-loop matrix")
    x = _state_vector(x0, a_arr.shape[0])
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise ValueError(f"horizon must be positive and finite, got {horizon}")
    if not (math.isfinite(step) and step > 0.0):
        raise ValueError(f"step must be positive and finite, got {step}")
    n_steps = max(1, round(horizon / step))
    h = horizon / n_steps
    states = np.empty((n_steps + 1, x.shape[0]))
    states[0] = x
    for i in range(1, n_steps + 1):
        k1 = a_arr @ x
        k2 = a_arr @ (x + 0.5 * h * k1)
        k3 = a_arr @ (x + 0.5 * h * k2)
        k4 = a_arr @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if float(np.abs(x).max(initial=0.0)) > DIVERGENCE_LIMIT:
            times = np.arange(i) * h
            return Trajectory(times, states[:i].copy(), diverged=True)
        states[i] = x
    times = np.arange(n_steps + 1) * h
    return Trajectory(times, states, diverged=False)


def closed_loop_cost(a, b, f, q, r, x0) -> CostResult:
    """Exact infinite-horizon cost of ``u = F x`` from ``x0``.

    For Hurwitz ``A + B F`` the integral of ``x^T (Q + F^T R F) x`` equals
    ``x0^T X x0`` with ``X`` the Lyapunov solution, so no integration error
    enters.  A non-Hurwitz loop returns the infinite sentinel.
    """
    a_arr = require_square(a, "A")
    b_arr = require_matrix(b, "B")
    f_arr = require_matrix(f, "F")
    q_arr = require_square(q, "Q")
    r_arr = require_square(r, "R")
    if b_arr.shape[0] != a_arr.shape[0]:
        raise ShapeError("A and B must share their row dimension")
    if f_arr.shape != (b_arr.shape[1], a_arr.shape[0]):
        raise ShapeError(
            f"F is {f_arr.shape}, expected {(b_arr.shape[1], a_arr.shape[0])}"
        )
    x = _state_vector(x0, a_arr.shape[0])
    a_cl = a_arr + b_arr @ f_arr
    if not is_hurwitz(a_cl).hurwitz:
        return CostResult(math.inf, None, False)
    w = q_arr + f_arr.T @ r_arr @ f_arr
    gram = solve_lyapunov(a_cl, 0.5 * (w + w.T))
    value = float(x @ gram @ x)
    return CostResult(max(value, 0.0), gram, True)


def optimality_gap(
    composite: CompositeSystem, q, r, f_composed, f_direct, x0
) -> GapResult:
    """Cost of the composed block design minus the cost of the direct
    composite design, from the same initial state.

    When exactly one loop is stable the gap is ``+/-inf`` (composed
    unstable gives ``+inf``); when neither is, it is NaN.
    """
    composed = closed_loop_cost(composite.A, composite.B, f_composed, q, r, x0)
    direct = closed_loop_cost(composite.A, composite.B, f_direct, q, r, x0)
    if composed.stable and direct.stable:
        gap = composed.value - direct.value
    elif composed.stable:
        gap = -math.inf
    elif direct.stable:
        gap = math.inf
    else:
        gap = math.nan
    return GapResult(
        J_composed=composed.value,
        J_direct=direct.value,
        gap=gap,
        stable_composed=composed.stable,
        stable_direct=direct.stable,
    )


def quadrature_cost(trajectory: Trajectory, weight) -> float:
    """Simpson quadrature of ``x(t)^T W x(t)`` over a sampled trajectory.

    Cross-check only: it inherits both integration and horizon-truncation
    error, so expect agreement with the exact cost at the 1e-4 level for
    well-resolved, long-enough runs.
    """
    w_arr = require_square(weight, "weight")
    states = trajectory.states
    if states.ndim != 2 or states.shape[1] != w_arr.shape[0]:
        raise ShapeError(
            f"trajectory states have shape {states.shape}, incompatible with "
            f"weight of shape {w_arr.shape}"
        )
    if states.shape[0] < 3:
        raise ValueError("need at least three samples for Simpson quadrature")
    integrand = np.einsum("ti,ij,tj->t", states, w_arr, states)
    return float(scipy.integrate.simpson(integrand, x=trajectory.times))
