"""Time integration: explicit SSP-RK2 (Heun) and IMEX with backward-Euler diffusion.

The semidiscrete system on the staggered grid is

    dv/dt     = cell_diff(u)
    du/dt     = node_diff(-P + mu*u_x/v)          (cells -> nodes)
    dtheta/dt = (-theta*u_x/v + cell_diff(kappa/v * theta_x) + mu*u_x^2/v) / cv

with u_x = cell_diff(u), kappa/v face-averaged to nodes, and ghost entries
pinned to the far field after every stage.  All reductions keep a fixed
summation order, so trajectories are bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .constitutive import GasModel, transport, transport_derivatives
from .errors import ArgumentError, NewtonDivergenceError, PositivityError, PositivityExhaustedError
from .grid import Grid, State, apply_farfield

__all__ = [
    "SolverConfig", "StepStats", "AdvanceStats",
    "rhs", "stable_dt", "advective_dt", "step_explicit", "step_imex", "advance",
    "backward_euler_velocity", "backward_euler_theta",
]

# source callback: t -> (S_v on cells, S_u on nodes, S_theta on cells)
Sources = Optional[Callable[[float], tuple]]


@dataclass(frozen=True)
class SolverConfig:
    integrator: str = "explicit"          # "explicit" | "imex"
    cfl_advective: float = 0.4
    cfl_parabolic: float = 0.4
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    positivity_floor: float = 1e-8
    max_dt_halvings: int = 20
    dt_max: float = 0.0                   # 0 disables the cap

    def __post_init__(self):
        if not (0.0 < self.cfl_advective <= 1.0 and 0.0 < self.cfl_parabolic <= 1.0):
            raise ArgumentError("CFL factors must lie in (0, 1]")
        if self.newton_tol <= 0:
            raise ArgumentError("newton_tol must be positive")
        if not (0.0 < self.positivity_floor < 1.0):
            raise ArgumentError("positivity_floor must lie in (0, 1)")


@dataclass
class StepStats:
    dt_used: float
    newton_iters: int = 0
    rejected_substeps: int = 0
    max_residual: float = 0.0


@dataclass
class AdvanceStats:
    steps: int = 0
    rejected_substeps: int = 0
    max_newton_iters: int = 0
    max_residual: float = 0.0


def _check_state_positive(state: State, floor: float = 0.0):
    if not (np.all(state.v > floor) and np.all(state.theta > floor)):
        raise PositivityError(
            f"state at t={state.t} has min v={state.v.min():.3e}, "
            f"min theta={state.theta.min():.3e} (floor {floor:.1e})")


def rhs(state: State, model: GasModel, grid: Grid, sources: Sources = None):
    """Semidiscrete rates (dv_dt cells, du_dt nodes, dtheta_dt cells)."""
    _check_state_positive(state)
    v, u, theta = state.v, state.u, state.theta
    ux = grid.cell_diff(u)                      # cells
    mu, kappa = transport(model, v, theta)
    P = theta / v

    dv_dt = ux.copy()
    stress = -P + mu * ux / v
    du_dt = grid.node_diff(stress)
    heat_flux = grid.face_average(kappa / v) * grid.node_diff(theta)
    dtheta_dt = (-theta * ux / v + grid.cell_diff(heat_flux) + mu * ux * ux / v) / model.cv

    if sources is not None:
        sv, su, sth = sources(state.t)
        dv_dt = dv_dt + sv
        du_dt = du_dt + su
        dtheta_dt = dtheta_dt + sth / model.cv
    return dv_dt, du_dt, dtheta_dt


def stable_dt(state: State, model: GasModel, grid: Grid, config: SolverConfig) -> float:
    """min(cfl_a*dx/max(c), cfl_p*dx^2/(2*max(D))) with c = sqrt(gamma*theta)/v
    and D = max(mu/v, kappa/(cv*v)) per cell."""
    _check_state_positive(state)
    v, theta = state.v, state.theta
    mu, kappa = transport(model, v, theta)
    c = np.sqrt(model.gamma * theta) / v
    diff_rate = np.maximum(mu / v, kappa / (model.cv * v))
    dt_adv = config.cfl_advective * grid.dx / float(c.max())
    dt_par = config.cfl_parabolic * grid.dx ** 2 / (2.0 * float(diff_rate.max()))
    dt = min(dt_adv, dt_par)
    if config.dt_max > 0.0:
        dt = min(dt, config.dt_max)
    return dt


def advective_dt(state: State, model: GasModel, grid: Grid, config: SolverConfig) -> float:
    """Advective CFL limit only; the IMEX integrator is free of the parabolic one."""
    _check_state_positive(state)
    c = np.sqrt(model.gamma * state.theta) / state.v
    dt = config.cfl_advective * grid.dx / float(c.max())
    if config.dt_max > 0.0:
        dt = min(dt, config.dt_max)
    return dt


def _attempt_heun(state: State, model: GasModel, grid: Grid, config: SolverConfig,
                  dt: float, sources: Sources) -> State:
    floor = config.positivity_floor
    k1 = rhs(state, model, grid, sources)
    s1 = State(state.t + dt,
               state.v + dt * k1[0], state.u + dt * k1[1], state.theta + dt * k1[2])
    apply_farfield(s1, grid)
    _check_state_positive(s1, floor)
    k2 = rhs(s1, model, grid, sources)
    out = State(state.t + dt,
                state.v + 0.5 * dt * (k1[0] + k2[0]),
                state.u + 0.5 * dt * (k1[1] + k2[1]),
                state.theta + 0.5 * dt * (k1[2] + k2[2]))
    apply_farfield(out, grid)
    _check_state_positive(out, floor)
    return out


def step_explicit(state: State, model: GasModel, grid: Grid, config: SolverConfig,
                  dt: float, sources: Sources = None):
    """One SSP-RK2 step; on positivity violation retries with dt/2.

    Returns (new_state, StepStats); stats.dt_used is the step actually taken.
    """
    rejected = 0
    dt_try = dt
    for _ in range(config.max_dt_halvings + 1):
        try:
            out = _attempt_heun(state, model, grid, config, dt_try, sources)
            return out, StepStats(dt_used=dt_try, rejected_substeps=rejected)
        except PositivityError:
            rejected += 1
            dt_try *= 0.5
    raise PositivityExhaustedError(
        f"positivity still violated after {config.max_dt_halvings} dt halvings at t={state.t}")


# ---------------------------------------------------------------------------
# IMEX: explicit advection/pressure/heating, backward-Euler diffusion
# ---------------------------------------------------------------------------

def _solve_tridiag(lower, diag, upper, b):
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, b)


def backward_euler_velocity(u_exp: np.ndarray, v: np.ndarray, theta: np.ndarray,
                            model: GasModel, grid: Grid, config: SolverConfig, dt: float):
    """Solve u = u_exp + dt*node_diff(mu*cell_diff(u)/v) with mu frozen at (v, theta).

    mu does not depend on u, so Newton converges after one linear solve; the
    loop still measures the residual against newton_tol.
    """
    mu, _ = transport(model, v, theta)
    a = mu / v                              # cell diffusivity for u
    g = grid.ghost_depth
    lo, hi = g, g + grid.N + 1              # interior node unknowns [lo, hi)
    u = u_exp.copy()
    r = dt / grid.dx ** 2
    iters = 0
    max_res = math.inf
    for iters in range(1, config.newton_max_iter + 1):
        flux_div = grid.node_diff(a * grid.cell_diff(u))
        res = u[lo:hi] - u_exp[lo:hi] - dt * flux_div[lo:hi]
        max_res = float(np.max(np.abs(res)))
        if max_res <= config.newton_tol:
            return u, iters, max_res
        # tridiagonal Jacobian: dF_j/du_j = 1 + r*(a_j + a_{j-1}), off-diag -r*a
        diag = 1.0 + r * (a[lo:hi] + a[lo - 1:hi - 1])
        lower = -r * a[lo - 1:hi - 1]
        upper = -r * a[lo:hi]
        du = _solve_tridiag(lower, diag, upper, -res)
        u[lo:hi] += du
    raise NewtonDivergenceError(
        f"velocity diffusion Newton stalled at residual {max_res:.3e} "
        f"after {config.newton_max_iter} iterations")


def backward_euler_theta(theta_exp: np.ndarray, v: np.ndarray, model: GasModel,
                         grid: Grid, config: SolverConfig, dt: float):
    """Solve cv*(theta - theta_exp) = dt*cell_diff(face(kappa(v,theta)/v)*node_diff(theta)).

    Nonlinear when alpha != 0; Newton with an analytic tridiagonal Jacobian
    re-linearized through the kappa_theta derivative each iteration.
    """
    g = grid.ghost_depth
    lo, hi = g, g + grid.N                  # interior cell unknowns [lo, hi)
    cv = model.cv
    theta = theta_exp.copy()
    dx = grid.dx
    iters = 0
    max_res = math.inf
    for iters in range(1, config.newton_max_iter + 1):
        if np.any(theta <= 0):
            raise PositivityError("theta went nonpositive inside Newton iteration")
        _, kappa = transport(model, v, theta)
        b = kappa / v                       # cell conductivity
        b_face = grid.face_average(b)
        grad = grid.node_diff(theta)
        flux = b_face * grad
        res = cv * (theta[lo:hi] - theta_exp[lo:hi]) - dt * grid.cell_diff(flux)[lo:hi]
        max_res = float(np.max(np.abs(res)))
        if max_res <= config.newton_tol:
            return theta, iters, max_res
        _, _, _, dk_dth = transport_derivatives(model, v, theta)
        db = dk_dth / v                     # d(kappa/v)/dtheta at cells
        # flux at node j: 0.5*(b_{j-1}+b_j)*(th_j - th_{j-1})/dx
        # dflux_j/dth_j   =  b_face_j/dx + 0.5*db_j*grad_j
        # dflux_j/dth_{j-1} = -b_face_j/dx + 0.5*db_{j-1}*grad_j
        nodes = slice(lo, hi + 1)           # nodes bounding interior cells
        dfl_dright = b_face[nodes] / dx + 0.5 * db[lo:hi + 1] * grad[nodes]
        dfl_dleft = -b_face[nodes] / dx + 0.5 * db[lo - 1:hi] * grad[nodes]
        # F_i = cv*(th_i - exp_i) - dt/dx*(flux_{i+1} - flux_i)
        diag = cv - dt / dx * (dfl_dleft[1:] - dfl_dright[:-1])
        upper = -dt / dx * dfl_dright[1:]
        lower = dt / dx * dfl_dleft[:-1]
        dtheta = _solve_tridiag(lower, diag, upper, -res)
        theta[lo:hi] += dtheta
    raise NewtonDivergenceError(
        f"temperature diffusion Newton stalled at residual {max_res:.3e} "
        f"after {config.newton_max_iter} iterations")


def _attempt_imex(state: State, model: GasModel, grid: Grid, config: SolverConfig,
                  dt: float, sources: Sources):
    floor = config.positivity_floor
    v, u, theta = state.v, state.u, state.theta
    ux = grid.cell_diff(u)
    mu, _ = transport(model, v, theta)
    P = theta / v

    v_new = v + dt * ux
    u_exp = u + dt * grid.node_diff(-P)
    theta_exp = theta + dt / model.cv * (-theta * ux / v + mu * ux * ux / v)
    if sources is not None:
        sv, su, sth = sources(state.t)
        v_new = v_new + dt * sv
        u_exp = u_exp + dt * su
        theta_exp = theta_exp + dt * sth / model.cv

    half = State(state.t + dt, v_new, u_exp, theta_exp)
    apply_farfield(half, grid)
    _check_state_positive(half, floor)

    u_new, it_u, res_u = backward_euler_velocity(
        half.u, half.v, half.theta, model, grid, config, dt)
    theta_new, it_th, res_th = backward_euler_theta(
        half.theta, half.v, model, grid, config, dt)

    out = State(state.t + dt, half.v, u_new, theta_new)
    apply_farfield(out, grid)
    _check_state_positive(out, floor)
    return out, max(it_u, it_th), max(res_u, res_th)


def step_imex(state: State, model: GasModel, grid: Grid, config: SolverConfig,
              dt: float, sources: Sources = None):
    """One IMEX step: explicit transport/pressure/heating, implicit diffusion."""
    rejected = 0
    dt_try = dt
    for _ in range(config.max_dt_halvings + 1):
        try:
            out, iters, res = _attempt_imex(state, model, grid, config, dt_try, sources)
            return out, StepStats(dt_used=dt_try, newton_iters=iters,
                                  rejected_substeps=rejected, max_residual=res)
        except PositivityError:
            rejected += 1
            dt_try *= 0.5
    raise PositivityExhaustedError(
        f"positivity still violated after {config.max_dt_halvings} dt halvings at t={state.t}")


def advance(state: State, model: GasModel, grid: Grid, config: SolverConfig,
            t_end: float, observer=None, output_every: Optional[float] = None,
            on_step=None, sources: Sources = None):
    """March state to t_end, landing exactly on output times and on t_end.

    observer(state_copy) fires at the start time and at each output time;
    on_step(state, StepStats) fires after every accepted step.  Deterministic:
    identical inputs give bitwise identical trajectories.
    """
    if t_end < state.t:
        raise ArgumentError(f"t_end {t_end} precedes state time {state.t}")
    if config.integrator == "imex":
        step, dt_fn = step_imex, advective_dt
    else:
        step, dt_fn = step_explicit, stable_dt
    stats = AdvanceStats()
    t0 = state.t
    eps = 1e-12 * max(1.0, abs(t_end))

    # schedule of exact landing times
    targets = []
    if output_every is not None and output_every > 0:
        k = 1
        while t0 + k * output_every < t_end - eps:
            targets.append(t0 + k * output_every)
            k += 1
    if t_end > t0:
        targets.append(t_end)

    if observer is not None:
        observer(state.copy())
    for target in targets:
        while state.t < target - eps:
            dt = min(dt_fn(state, model, grid, config), target - state.t)
            state, sstats = step(state, model, grid, config, dt, sources)
            stats.steps += 1
            stats.rejected_substeps += sstats.rejected_substeps
            stats.max_newton_iters = max(stats.max_newton_iters, sstats.newton_iters)
            stats.max_residual = max(stats.max_residual, sstats.max_residual)
            if on_step is not None:
                on_step(state, sstats)
        state.t = target  # kill accumulated roundoff at landing times
        if observer is not None:
            observer(state.copy())
    return state, stats
