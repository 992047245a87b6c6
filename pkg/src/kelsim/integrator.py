"""Time advancement: adaptive forward Euler, blow-up detection, trajectories.

The step size obeys, with safety factor s and h the smallest spacing,

    dt = s * min( h^2 / (2 d Dmax),      u-diffusion, Dmax = max face D
                  h^2 / (2 d),           v-diffusion
                  h / (d Wmax),          chemotactic advection (skip if 0)
                  1 / (mu (2 umax + 1)) )  logistic stiffness (skip if mu = 0)

clamped to [dt_min, dt_max] and to not overshoot t_end. Numerical blow-up
is declared when either the stability step collapses below dt_min or the
sup norm of u exceeds blowup_factor * max(1, sup u0); both are proxies for
finite-time blow-up of the continuous system, where the sup norm diverges
as t approaches the maximal existence time.

``run`` is a pure function of its arguments: summation orders are fixed
and identical inputs produce bit-identical outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .core import TOL_NEG, ConfigurationError, Field, Grid, ModelParams, State, \
    StateCorruptionError
from .diagnostics import DiagnosticsRecord, make_record, u2_window_integral
from .operators import _compute_faces, _face_shapes


@dataclass(frozen=True)
class StepControl:
    """Stepping and detection controls for one trajectory."""

    t_end: float
    safety: float = 0.25
    dt_min: float = 1e-12
    dt_max: float = 0.1
    blowup_factor: float = 1e6

    def __post_init__(self) -> None:
        if not (self.t_end > 0.0):
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if not (0.0 < self.safety <= 1.0):
            raise ConfigurationError(f"safety must be in (0, 1], got {self.safety}")
        if not (0.0 < self.dt_min < self.dt_max):
            raise ConfigurationError(
                f"need 0 < dt_min < dt_max, got {self.dt_min}, {self.dt_max}")
        if not (self.blowup_factor > 0.0):
            raise ConfigurationError("blowup_factor must be positive")


class Verdict(Enum):
    COMPLETED_BOUNDED = "completed-bounded"
    NUMERICAL_BLOWUP = "numerical-blowup"
    ABORTED = "aborted"


@dataclass
class RunOutcome:
    verdict: Verdict
    final_state: State
    records: list[DiagnosticsRecord] = field(default_factory=list)
    t_detect: float | None = None
    reason: str | None = None


def _stability_dt(dmax: float, wmax: float, umax: float, params: ModelParams,
                  grid: Grid, control: StepControl) -> float:
    """safety * min of the stability constraints, before any clamping."""
    h = min(grid.spacing)
    d = float(grid.dim)
    dt = h * h / (2.0 * d * dmax)
    dt = min(dt, h * h / (2.0 * d))
    if wmax > 0.0:
        dt = min(dt, h / (d * wmax))
    if params.mu > 0.0:
        dt = min(dt, 1.0 / (params.mu * (2.0 * umax + 1.0)))
    return control.safety * dt


def stable_dt(state: State, params: ModelParams, grid: Grid,
              control: StepControl) -> float:
    """Adaptive stable step for the current state, clamped to
    [dt_min, dt_max] and to not overshoot t_end."""
    _, _, dmax, wmax = _compute_faces(state.u, state.v, params, grid)
    umax = _kernels.max_value(state.u) if params.mu > 0.0 else 0.0
    dt = _stability_dt(dmax, wmax, umax, params, grid, control)
    dt = min(max(dt, control.dt_min), control.dt_max)
    remaining = control.t_end - state.t
    if 0.0 < remaining < dt:
        dt = remaining
    return dt


def _apply_update(u: Field, v: Field, flux, grad, grid: Grid,
                  params: ModelParams, dt: float, out=None):
    un, vn = (np.empty_like(u), np.empty_like(v)) if out is None else out
    if grid.dim == 1:
        res = _kernels.update_1d(u, v, flux[0], grad[0], un, vn,
                                 grid.spacing[0], params.mu, dt)
    else:
        res = _kernels.update_2d(u, v, flux[0], flux[1], grad[0], grad[1],
                                 un, vn, grid.spacing[0], grid.spacing[1],
                                 params.mu, dt)
    umin, umax, vmin, vmax, finite_ok = res
    return un, vn, umin, umax, vmin, vmax, finite_ok


def _update_error(umin: float, vmin: float, finite_ok: bool) -> str | None:
    if not finite_ok:
        return "non-finite values after update"
    if umin < -TOL_NEG:
        return f"min u = {umin} below -{TOL_NEG}"
    if vmin < -TOL_NEG:
        return f"min v = {vmin} below -{TOL_NEG}"
    return None


def step(state: State, params: ModelParams, grid: Grid, dt: float) -> State:
    """One forward-Euler update by dt; raises StateCorruptionError when the
    result loses finiteness or positivity beyond TOL_NEG."""
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ConfigurationError(f"dt must be positive and finite, got {dt}")
    flux, grad, _, _ = _compute_faces(state.u, state.v, params, grid)
    un, vn, umin, umax, vmin, vmax, ok = _apply_update(
        state.u, state.v, flux, grad, grid, params, dt)
    err = _update_error(umin, vmin, ok)
    if err is not None:
        raise StateCorruptionError(err)
    return State(u=un, v=vn, t=state.t + dt, step=state.step + 1, last_dt=dt)


# Relative slack when deciding whether the trajectory has reached t_end or
# a record mark; avoids denormal final micro-steps.
_T_EPS = 1e-12


def run(initial: State, params: ModelParams, grid: Grid, control: StepControl,
        record_every: float, lp_track: tuple[float, ...] = (2.0,)) -> RunOutcome:
    """Advance the state until t_end, recording diagnostics at the given
    simulation-time cadence (first and last states always recorded).

    Returns COMPLETED_BOUNDED at t_end, NUMERICAL_BLOWUP when the detector
    fires, ABORTED on numeric corruption. When mu > 0 the records gain the
    forward window integral of the squared L^2 norm of u with window
    width min(1, t_end / 6).
    """
    if not (record_every > 0.0):
        raise ConfigurationError(f"record_every must be positive, got {record_every}")
    initial.validate(grid)
    track = tuple(sorted(set(float(p) for p in lp_track) | {2.0}))

    u = initial.u.astype(np.float64, copy=True)
    v = initial.v.astype(np.float64, copy=True)
    u2 = np.empty_like(u)
    v2 = np.empty_like(v)
    t = float(initial.t)
    n_step = int(initial.step)
    t_end = control.t_end
    bar = control.blowup_factor * max(1.0, float(np.max(u)))

    records = [make_record(u, v, t, initial.last_dt, grid, track)]
    next_mark = t + record_every

    face_shapes = _face_shapes(grid)
    flux = tuple(np.zeros(s) for s in face_shapes)
    grad = tuple(np.zeros(s) for s in face_shapes)

    me = params.m_exp - 1.0
    dt = float(initial.last_dt)
    parity = 0

    def finish(cu: Field, cv: Field, verdict: Verdict, dt_last: float,
               t_detect=None, reason=None) -> RunOutcome:
        if records[-1].t != t:
            records.append(make_record(cu, cv, t, dt_last, grid, track))
        if params.mu > 0.0 and len(records) >= 2:
            tau = min(1.0, t_end / 6.0)
            for rec, sample in zip(records, u2_window_integral(records, tau)):
                rec.u2_window = None if sample.truncated else sample.value
        final = State(u=cu, v=cv, t=t, step=n_step, last_dt=dt_last)
        return RunOutcome(verdict=verdict, final_state=final, records=records,
                          t_detect=t_detect, reason=reason)

    while True:
        if grid.dim == 1:
            status, parity, t, n_step, dt, aux1, aux2 = _kernels.drive_1d(
                u, v, u2, v2, flux[0], grad[0], grid.spacing[0],
                params.chi, params.c_d, me, params.mu,
                control.safety, control.dt_min, control.dt_max,
                t_end, next_mark, bar, t, n_step, dt, parity, _T_EPS, TOL_NEG)
        else:
            status, parity, t, n_step, dt, aux1, aux2 = _kernels.drive_2d(
                u, v, u2, v2, flux[0], flux[1], grad[0], grad[1],
                grid.spacing[0], grid.spacing[1],
                params.chi, params.c_d, me, params.mu,
                control.safety, control.dt_min, control.dt_max,
                t_end, next_mark, bar, t, n_step, dt, parity, _T_EPS, TOL_NEG)
        cu, cv = (u, v) if parity == 0 else (u2, v2)
        if status == _kernels.DT_COLLAPSE:
            return finish(cu, cv, Verdict.NUMERICAL_BLOWUP, dt, t_detect=t,
                          reason=f"stability step {aux1} collapsed below dt_min")
        if status == _kernels.CORRUPTED:
            if math.isnan(aux1):
                reason = "non-finite values after update"
            elif aux1 < -TOL_NEG:
                reason = f"min u = {aux1} below -{TOL_NEG}"
            else:
                reason = f"min v = {aux2} below -{TOL_NEG}"
            return finish(cu, cv, Verdict.ABORTED, dt, reason=reason)
        if status == _kernels.AMPLITUDE:
            return finish(cu, cv, Verdict.NUMERICAL_BLOWUP, dt, t_detect=t,
                          reason=f"sup u = {aux1} exceeded {bar}")
        if t_end - t <= _T_EPS * t_end:
            return finish(cu, cv, Verdict.COMPLETED_BOUNDED, dt)
        records.append(make_record(cu, cv, t, dt, grid, track))
        while next_mark <= t + _T_EPS * max(t, 1.0):
            next_mark += record_every
