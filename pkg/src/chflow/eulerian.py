"""Reference method-of-lines solver for the Eulerian form of the equation.

Discretizes

    u_t = -u u_x - L( u^2 + u_x^2 / 2 ),      L = d_x (1 - d_xx)^(-1),

directly on the grid: u_x by fourth-order centered differences (with the
zero continuation outside the domain supplying the boundary stencils, which
is consistent with the decay convention), the nonlocal term by the same
kernel scans as the flow-map solver, and classical RK4 in time.  The two
solvers share only the kernel code, so comparing them isolates the
formulation (flow map versus fixed grid), not the kernel.

This is a cross-validation oracle, not a production solver: it has no shock
capturing and simply halts when a value stops being finite (an Eulerian
discretization blows up rather than hitting a chart boundary).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, GridMismatch, TimeMismatch
from .fields import (
    DEFAULT_TAIL_TOL,
    Grid,
    ScalarField0,
    ScalarField1,
    _trapz,
    check_membership,
)
from .lagrangian import Trajectory, reconstruct_u
from .operators import OperatorWorkspace, l_op

__all__ = [
    "EulerianState",
    "euler_rhs",
    "integrate_eulerian",
    "ComparisonReport",
    "compare",
    "fourth_order_dx",
]


@dataclass
class EulerianState:
    """Velocity samples on the grid at one time."""

    t: float
    grid: Grid
    u: np.ndarray

    def __post_init__(self):
        self.u = np.array(self.u, dtype=float, copy=True).reshape(-1)
        if self.u.shape != (self.grid.n,):
            raise ValueError("velocity samples do not match the grid")
        if not np.isfinite(self.u).all():
            raise ValueError("velocity samples contain non-finite entries")

    def energy_momentum(self) -> tuple[float, float]:
        ux = fourth_order_dx(self.u, self.grid.h)
        return (float(_trapz(self.u ** 2 + ux ** 2, self.grid.h)),
                float(_trapz(self.u, self.grid.h)))


def fourth_order_dx(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order centered derivative with zero continuation off the ends."""
    up = np.zeros(u.shape[0] + 4)
    up[2:-2] = u
    return (-up[4:] + 8.0 * up[3:-1] - 8.0 * up[1:-3] + up[:-4]) / (12.0 * h)


def euler_rhs(state: EulerianState, *, order: int = 2,
              workspace: OperatorWorkspace | None = None) -> np.ndarray:
    """u_t = -u u_x - L(u^2 + u_x^2 / 2) on the grid."""
    u = state.u
    ux = fourth_order_dx(u, state.grid.h)
    phi = ScalarField0(state.grid, u * u + 0.5 * ux * ux)
    return -u * ux - l_op(phi, order=order, workspace=workspace).u


def integrate_eulerian(u0: ScalarField1, t_end: float, dt: float,
                       record_every: int = 100, *, order: int = 2,
                       tail_tol: float = DEFAULT_TAIL_TOL) -> list[EulerianState]:
    """RK4 time stepping of the Eulerian form from u0 to t_end.

    Records the state at t = 0, every record_every steps, and at the final
    time.  If any value stops being finite the run halts and the states
    collected so far are returned (the last recorded state is always finite).
    """
    report = check_membership(u0, tail_tol)
    if not report.ok:
        raise AdmissibilityError(
            "initial data is not admissible: failed " + ", ".join(report.failures()))
    if not (np.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    grid = u0.grid
    workspace = OperatorWorkspace(grid)
    h = grid.h

    def f(u: np.ndarray, t: float) -> np.ndarray:
        ux = fourth_order_dx(u, h)
        phi = ScalarField0(grid, u * u + 0.5 * ux * ux)
        return -u * ux - l_op(phi, order=order, workspace=workspace).u

    u = u0.u.copy()
    t = 0.0
    states = [EulerianState(t, grid, u)]
    step_no = 0
    while t < t_end - 1e-12 * max(1.0, t_end):
        step = min(dt, t_end - t)
        try:
            k1 = f(u, t)
            k2 = f(u + 0.5 * step * k1, t + 0.5 * step)
            k3 = f(u + 0.5 * step * k2, t + 0.5 * step)
            k4 = f(u + step * k3, t + step)
            u_new = u + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except ValueError:
            break
        if not np.isfinite(u_new).all():
            break
        u = u_new
        t += step
        step_no += 1
        if step_no % record_every == 0:
            states.append(EulerianState(t, grid, u))
    if states[-1].t != t:
        states.append(EulerianState(t, grid, u))
    return states


@dataclass
class ComparisonReport:
    """Per-time sup and L2 gaps between the two formulations' velocities."""

    times: list[float]
    sup_diff: list[float]
    l2_diff: list[float]

    def rows(self):
        return list(zip(self.times, self.sup_diff, self.l2_diff))


def _match_time(times: np.ndarray, t: float) -> int:
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-9 * max(1.0, abs(t)):
        raise TimeMismatch(
            f"time {t:.9g} is not recorded (nearest is {times[k]:.9g})")
    return k


def compare(traj: Trajectory, eulerian_states: list[EulerianState],
            times: list[float], *, inv_tol: float = 1e-12) -> ComparisonReport:
    """Gaps between the reconstructed flow-map velocity and the Eulerian one.

    Every requested time must be recorded in both inputs; the report carries
    |.| sup and trapezoidal L2 differences per time and is symmetric in the
    two solutions.
    """
    lag_times = np.array([s.t for s in traj.states])
    eul_times = np.array([s.t for s in eulerian_states])
    sup, l2 = [], []
    for t in times:
        sl = traj.states[_match_time(lag_times, t)]
        se = eulerian_states[_match_time(eul_times, t)]
        if sl.grid != se.grid:
            raise GridMismatch("trajectories live on different grids")
        u_lag = reconstruct_u(sl, inv_tol=inv_tol)
        diff = u_lag.u - se.u
        sup.append(float(np.abs(diff).max()))
        l2.append(float(np.sqrt(_trapz(diff * diff, sl.grid.h))))
    return ComparisonReport(times=list(times), sup_diff=sup, l2_diff=l2)
