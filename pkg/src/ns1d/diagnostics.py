"""Monitored functionals: conserved totals, energy-entropy balance, Kanel' pair,
temperature floor fit, and decay metrics.

Sup-type quantities are taken over interior cells only; ghosts sit at the far
field by construction.  The accumulated dissipation is integrated in time with
the trapezoid rule at every accepted step, so the quadrature error tracks the
scheme's own O(dt^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .constitutive import (GasModel, HProfile, adaptive_simpson,
                           kanel_potential, phi, transport)
from .errors import ArgumentError, PositivityError
from .grid import Grid, State

__all__ = [
    "DiagnosticsRecord", "InitialDataReport", "DecayReport", "DiagnosticsCollector",
    "KanelEvaluator", "conserved_totals", "energy_identity_residual",
    "dissipation_rate", "kanel_bound_pair", "theta_floor_fit", "decay_metrics",
    "initial_data_report", "cell_kinetic_energy",
]


@dataclass
class DiagnosticsRecord:
    t: float
    mass_dev: float
    momentum: float
    energy_dev: float
    eta_total: float
    dissipation_accum: float
    identity_residual: float
    sup_dev: float
    min_v: float
    max_v: float
    min_theta: float
    max_theta: float
    mu_vx_norm: float
    kanel_lhs: float
    kanel_rhs: float
    h1_dev: float
    h2_dev: float

    CSV_COLUMNS = ("t", "mass_dev", "momentum", "energy_dev", "eta_total",
                   "dissipation_accum", "identity_residual", "sup_dev",
                   "min_v", "max_v", "min_theta", "max_theta",
                   "mu_vx_norm", "kanel_lhs", "kanel_rhs", "h1_dev", "h2_dev")

    def csv_row(self) -> list:
        return [getattr(self, c) for c in self.CSV_COLUMNS]


@dataclass
class InitialDataReport:
    """Discrete counterparts of the initial size and positivity bounds."""

    pi0_discrete: float       # H2-discrete norm of (v0-1, u0, theta0-1)
    min_v0: float
    max_v0: float
    min_theta0: float

    def to_dict(self) -> dict:
        return {"pi0_discrete": self.pi0_discrete, "min_v0": self.min_v0,
                "max_v0": self.max_v0, "min_theta0": self.min_theta0}


@dataclass
class DecayReport:
    times: List[float]
    sup_devs: List[float]
    half_time: Optional[float]
    quarter_time: Optional[float]
    tenth_time: Optional[float]

    def to_dict(self) -> dict:
        return {"times": self.times, "sup_devs": self.sup_devs,
                "half_time": self.half_time, "quarter_time": self.quarter_time,
                "tenth_time": self.tenth_time}


# ---------------------------------------------------------------------------
# field helpers (interior views, compatible gradients)
# ---------------------------------------------------------------------------

def _interior(state: State, grid: Grid):
    ci, ni = grid.cell_interior, grid.node_interior
    return state.v[ci], state.u[ni], state.theta[ci]


def cell_kinetic_energy(state: State, grid: Grid) -> np.ndarray:
    """Node kinetic energy attributed to cells: (u_left^2 + u_right^2)/4."""
    u = state.u
    return 0.25 * (u[:-1] ** 2 + u[1:] ** 2)


def _cell_gradient(grid: Grid, cell_field: np.ndarray) -> np.ndarray:
    """Node differences averaged back to cells (centered on the interior)."""
    return grid.cell_average_of_nodes(grid.node_diff(cell_field))


def conserved_totals(state: State, grid: Grid, model: GasModel):
    """(mass_dev, momentum, energy_dev) over the interior."""
    v, u, theta = _interior(state, grid)
    dx = grid.dx
    mass_dev = float(np.sum(v - 1.0) * dx)
    momentum = float(np.sum(u) * dx)
    k = cell_kinetic_energy(state, grid)[grid.cell_interior]
    energy_dev = float(np.sum(model.cv * theta + k - model.cv) * dx)
    return mass_dev, momentum, energy_dev


def dissipation_rate(state: State, model: GasModel, grid: Grid) -> float:
    """Sum over interior cells of [mu*u_x^2/(v*theta) + kappa*theta_x^2/(v*theta^2)]*dx.

    u_x is the same cell difference the solver's heating term uses.
    """
    if not (np.all(state.v > 0) and np.all(state.theta > 0)):
        raise PositivityError("dissipation_rate requires positive v and theta")
    ci = grid.cell_interior
    v, theta = state.v, state.theta
    ux = grid.cell_diff(state.u)
    thx = _cell_gradient(grid, theta)
    mu, kappa = transport(model, v, theta)
    integrand = mu * ux * ux / (v * theta) + kappa * thx * thx / (v * theta * theta)
    return float(np.sum(integrand[ci]) * grid.dx)


def eta_total(state: State, model: GasModel, grid: Grid) -> float:
    """Integral of phi(v) + k + cv*phi(theta) over interior cells, with the
    node kinetic energy attributed to cells."""
    ci = grid.cell_interior
    k = cell_kinetic_energy(state, grid)
    dens = phi(state.v) + k + model.cv * phi(state.theta)
    return float(np.sum(dens[ci]) * grid.dx)


def energy_identity_residual(record_now: DiagnosticsRecord,
                             record_initial: DiagnosticsRecord) -> float:
    """eta_total(t) + dissipation_accum(t) - eta_total(0); zero in the continuum."""
    return record_now.eta_total + record_now.dissipation_accum - record_initial.eta_total


# ---------------------------------------------------------------------------
# Kanel' potential evaluation, memoized over a v-grid
# ---------------------------------------------------------------------------

class KanelEvaluator:
    """Vectorized Phi(v) via exact quadrature at spline knots.

    Knots are cumulative adaptive-Simpson values on a grid that always
    contains v = 1 (where the integrand has its kink) and is refined around
    it.  The table is rebuilt whenever a query leaves the cached range.
    """

    def __init__(self, h: HProfile, v_lo: float = 0.5, v_hi: float = 2.0,
                 knot_spacing: float = 0.01):
        self.h = h
        self.knot_spacing = knot_spacing
        self._build(v_lo, v_hi)

    def _build(self, v_lo: float, v_hi: float):
        v_lo = min(v_lo, 0.97)
        v_hi = max(v_hi, 1.03)
        n_lo = max(4, int(np.ceil((1.0 - v_lo) / self.knot_spacing)))
        n_hi = max(4, int(np.ceil((v_hi - 1.0) / self.knot_spacing)))
        knots = np.unique(np.concatenate([
            np.linspace(v_lo, 1.0, n_lo + 1),
            np.linspace(1.0, v_hi, n_hi + 1),
            1.0 + np.array([-0.02, -0.01, -0.005, -0.0025, 0.0025, 0.005, 0.01, 0.02]),
        ]))
        knots = knots[(knots >= v_lo) & (knots <= v_hi)]

        def f(z):
            return np.sqrt(z - np.log(z) - 1.0) * float(self.h.h(z)) / z

        vals = np.empty_like(knots)
        i1 = int(np.searchsorted(knots, 1.0))
        vals[i1] = 0.0
        for i in range(i1 + 1, knots.size):
            vals[i] = vals[i - 1] + adaptive_simpson(f, knots[i - 1], knots[i], tol=1e-12)
        for i in range(i1 - 1, -1, -1):
            vals[i] = vals[i + 1] - adaptive_simpson(f, knots[i], knots[i + 1], tol=1e-12)
        self.v_lo, self.v_hi = float(knots[0]), float(knots[-1])
        self._spline = CubicSpline(knots, vals)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        vmin, vmax = float(v.min()), float(v.max())
        if vmin < self.v_lo or vmax > self.v_hi:
            self._build(min(vmin * 0.8, self.v_lo), max(vmax * 1.25, self.v_hi))
        return self._spline(v)


def kanel_bound_pair(state: State, model: GasModel, grid: Grid,
                     evaluator: Optional[KanelEvaluator] = None):
    """(max_x |Phi(v)|, ||sqrt(phi(v))|| * ||h(v)*v_x/v||), the Cauchy-Schwarz pair."""
    if not (np.all(state.v > 0) and np.all(state.theta > 0)):
        raise PositivityError("kanel_bound_pair requires a positive state")
    ci = grid.cell_interior
    v = state.v
    if evaluator is None:
        evaluator = KanelEvaluator(model.h, float(v.min()), float(v.max()))
    per_cell = np.abs(evaluator(v[ci]))
    # sharpen the interpolated max by exact quadrature at the argmax cell
    lhs = abs(kanel_potential(model.h, float(v[ci][np.argmax(per_cell)])))
    sqrt_phi = np.sqrt(phi(v[ci]))
    vx = _cell_gradient(grid, v)[ci]
    hv = np.asarray(model.h(v[ci]), dtype=float)
    rhs_val = (grid.discrete_norm(sqrt_phi, "L2")
               * grid.discrete_norm(hv * vx / v[ci], "L2"))
    return lhs, rhs_val


# ---------------------------------------------------------------------------
# record-series functionals
# ---------------------------------------------------------------------------

def theta_floor_fit(records: List[DiagnosticsRecord]) -> float:
    """Smallest C with 1/min_theta(t) - 1/min_theta(s) <= C*(t-s) over all pairs.

    Equals the max difference quotient of 1/min_theta, clamped at 0.
    """
    if len(records) < 3:
        raise ArgumentError("theta_floor_fit needs at least 3 records")
    t = np.array([r.t for r in records])
    inv = np.array([1.0 / r.min_theta for r in records])
    best = 0.0
    for i in range(len(records)):
        dt = t[i + 1:] - t[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (inv[i + 1:] - inv[i]) / dt
        q = q[dt > 0]
        if q.size:
            best = max(best, float(q.max()))
    return max(best, 0.0)


def decay_metrics(records: List[DiagnosticsRecord]) -> DecayReport:
    """Time series of sup_dev and first passage below {1/2, 1/4, 1/10} of start."""
    if len(records) < 2:
        raise ArgumentError("decay_metrics needs at least 2 records")
    times = [r.t for r in records]
    sups = [r.sup_dev for r in records]
    s0 = sups[0]

    def first_below(frac):
        thresh = frac * s0
        for t, s in zip(times, sups):
            if s <= thresh:
                return t
        return None

    return DecayReport(times, sups, first_below(0.5), first_below(0.25), first_below(0.1))


def initial_data_report(state: State, grid: Grid) -> InitialDataReport:
    v, u, theta = _interior(state, grid)
    pi0 = float(np.sqrt(grid.discrete_norm(v - 1.0, "H2") ** 2
                        + grid.discrete_norm(u, "H2") ** 2
                        + grid.discrete_norm(theta - 1.0, "H2") ** 2))
    return InitialDataReport(pi0, float(v.min()), float(v.max()), float(theta.min()))


# ---------------------------------------------------------------------------
# collector wired into solver.advance
# ---------------------------------------------------------------------------

class DiagnosticsCollector:
    """Accumulates dissipation per accepted step and emits records at cadence.

    Use ``collector.on_step`` as the solver's per-step hook and
    ``collector.observe`` as its observer.
    """

    def __init__(self, model: GasModel, grid: Grid):
        self.model = model
        self.grid = grid
        self.records: List[DiagnosticsRecord] = []
        self.evaluator = KanelEvaluator(model.h)
        self._accum = 0.0
        self._prev_rate: Optional[float] = None
        self._prev_t: Optional[float] = None
        self._eta0: Optional[float] = None

    def _accumulate(self, state: State):
        rate = dissipation_rate(state, self.model, self.grid)
        if self._prev_rate is not None:
            self._accum += 0.5 * (rate + self._prev_rate) * (state.t - self._prev_t)
        self._prev_rate = rate
        self._prev_t = state.t

    def on_step(self, state: State, stats) -> None:
        self._accumulate(state)

    def observe(self, state: State) -> None:
        if self._prev_rate is None:
            self._accumulate(state)
        self.records.append(self.make_record(state))

    def make_record(self, state: State) -> DiagnosticsRecord:
        grid, model = self.grid, self.model
        v, u, theta = _interior(state, grid)
        mass_dev, momentum, energy_dev = conserved_totals(state, grid, model)
        et = eta_total(state, model, grid)
        if self._eta0 is None:
            self._eta0 = et
        sup_dev = max(float(np.max(np.abs(v - 1.0))),
                      float(np.max(np.abs(u))),
                      float(np.max(np.abs(theta - 1.0))))
        mu, _ = transport(model, state.v, state.theta)
        vx = _cell_gradient(grid, state.v)
        ci = grid.cell_interior
        mu_vx_norm = grid.discrete_norm((mu * vx / state.v)[ci], "L2")
        lhs, rhs_val = kanel_bound_pair(state, model, grid, self.evaluator)
        h1 = float(np.sqrt(grid.discrete_norm(v - 1.0, "H1") ** 2
                           + grid.discrete_norm(u, "H1") ** 2
                           + grid.discrete_norm(theta - 1.0, "H1") ** 2))
        h2 = float(np.sqrt(grid.discrete_norm(v - 1.0, "H2") ** 2
                           + grid.discrete_norm(u, "H2") ** 2
                           + grid.discrete_norm(theta - 1.0, "H2") ** 2))
        return DiagnosticsRecord(
            t=state.t, mass_dev=mass_dev, momentum=momentum, energy_dev=energy_dev,
            eta_total=et, dissipation_accum=self._accum,
            identity_residual=et + self._accum - self._eta0,
            sup_dev=sup_dev,
            min_v=float(v.min()), max_v=float(v.max()),
            min_theta=float(theta.min()), max_theta=float(theta.max()),
            mu_vx_norm=mu_vx_norm, kanel_lhs=lhs, kanel_rhs=rhs_val,
            h1_dev=h1, h2_dev=h2)
