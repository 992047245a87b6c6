"""Jitted stencil kernels shared by operators and integrator.

Every numerical path in the package goes through these kernels, so all
public entry points produce bit-identical values for identical inputs.

Face arrays are padded: along axis a they carry n_a + 1 entries, and the
first and last entries are the boundary faces, which stay exactly zero
(no-flux boundaries). ``fx``/``fy`` hold the combined diffusive plus
chemotactic flux per face, signed as the flow INTO the low-index cell;
``gx``/``gy`` hold the face gradients of v used for the Neumann Laplacian.

The diffusion exponent enters as me = m_exp - 1 and is special-cased for
me in {0, 1/4, 1/2, 1, 2} so the hot loops avoid libm pow where sqrt or
multiplication suffices.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(inline="always")
def _dcoef(ub: float, c_d: float, me: float) -> float:
    # Clamp roundoff-negative face averages to 0; true negatives never
    # reach here because states are validated every step.
    base = (ub if ub > 0.0 else 0.0) + 1.0
    if me == 0.0:
        return c_d
    if me == 1.0:
        return c_d * base
    if me == 0.5:
        return c_d * np.sqrt(base)
    if me == 0.25:
        return c_d * np.sqrt(np.sqrt(base))
    if me == 2.0:
        return c_d * base * base
    return c_d * base ** me


@numba.njit(cache=True)
def diffusivity_values(u: np.ndarray, out: np.ndarray, c_d: float, me: float) -> None:
    for k in range(u.size):
        out[k] = _dcoef(u[k], c_d, me)


@numba.njit(cache=True)
def faces_1d(u, v, fx, gx, hx, chi, c_d, me):
    """Fill padded flux/gradient faces; return (max face D, max |face velocity|)."""
    n = u.shape[0]
    rhx = 1.0 / hx
    dmax = 0.0
    wmax = 0.0
    for i in range(n - 1):
        du = u[i + 1] - u[i]
        g = (v[i + 1] - v[i]) * rhx
        d = _dcoef(u[i] + 0.5 * du, c_d, me)
        w = chi * g
        uup = u[i] if w > 0.0 else u[i + 1]
        fx[i + 1] = d * du * rhx - w * uup
        gx[i + 1] = g
        dmax = max(dmax, d)
        wmax = max(wmax, abs(w))
    fx[0] = 0.0
    fx[n] = 0.0
    gx[0] = 0.0
    gx[n] = 0.0
    return dmax, wmax


@numba.njit(cache=True)
def faces_2d(u, v, fx, fy, gx, gy, hx, hy, chi, c_d, me):
    nx, ny = u.shape
    rhx = 1.0 / hx
    rhy = 1.0 / hy
    dmax = 0.0
    wmax = 0.0
    for i in range(nx - 1):
        for j in range(ny):
            du = u[i + 1, j] - u[i, j]
            g = (v[i + 1, j] - v[i, j]) * rhx
            d = _dcoef(u[i, j] + 0.5 * du, c_d, me)
            w = chi * g
            uup = u[i, j] if w > 0.0 else u[i + 1, j]
            fx[i + 1, j] = d * du * rhx - w * uup
            gx[i + 1, j] = g
            dmax = max(dmax, d)
            wmax = max(wmax, abs(w))
    for i in range(nx):
        for j in range(ny - 1):
            du = u[i, j + 1] - u[i, j]
            g = (v[i, j + 1] - v[i, j]) * rhy
            d = _dcoef(u[i, j] + 0.5 * du, c_d, me)
            w = chi * g
            uup = u[i, j] if w > 0.0 else u[i, j + 1]
            fy[i, j + 1] = d * du * rhy - w * uup
            gy[i, j + 1] = g
            dmax = max(dmax, d)
            wmax = max(wmax, abs(w))
    for j in range(ny):
        fx[0, j] = 0.0
        fx[nx, j] = 0.0
        gx[0, j] = 0.0
        gx[nx, j] = 0.0
    for i in range(nx):
        fy[i, 0] = 0.0
        fy[i, ny] = 0.0
        gy[i, 0] = 0.0
        gy[i, ny] = 0.0
    return dmax, wmax


@numba.njit(cache=True)
def max_value(a: np.ndarray) -> float:
    m = a.flat[0]
    for x in a.flat:
        if x > m:
            m = x
    return m


@numba.njit(cache=True)
def update_1d(u, v, fx, gx, un, vn, hx, mu, dt):
    """Forward-Euler update from padded faces.

    Returns (umin, umax, vmin, vmax, finite_ok); the finite flag uses the
    x - x == 0 trick so NaN and +-inf are both caught exactly.
    """
    n = u.shape[0]
    rhx = 1.0 / hx
    umin = u[0]
    umax = u[0]
    vmin = v[0]
    vmax = v[0]
    bad = 0.0
    for i in range(n):
        uij = u[i]
        vij = v[i]
        div = (fx[i + 1] - fx[i]) * rhx
        lap = (gx[i + 1] - gx[i]) * rhx
        nu = uij + dt * (div + mu * (uij - uij * uij))
        nv = vij + dt * (lap - vij + uij)
        un[i] = nu
        vn[i] = nv
        if nu < umin:
            umin = nu
        if nu > umax:
            umax = nu
        if nv < vmin:
            vmin = nv
        if nv > vmax:
            vmax = nv
        bad += (nu - nu) + (nv - nv)
    return umin, umax, vmin, vmax, bad == 0.0


# Trajectory driver status codes.
OK = 0
DT_COLLAPSE = 1
CORRUPTED = 2
AMPLITUDE = 3


@numba.njit(cache=True)
def drive_1d(u, v, u2, v2, fx, gx, hx, chi, c_d, me, mu,
             safety, dt_min, dt_max, t_end, stop_t, bar,
             t0, step0, dt0, parity0, teps, tol_neg):
    """Advance until the next record mark, t_end, or a detector fires.

    Buffers alternate by parity; the returned parity says which of
    (u, v)/(u2, v2) holds the current state. aux1/aux2 carry the values
    quoted in the failure reason for non-OK statuses.
    """
    t = t0
    n = step0
    dt = dt0
    parity = parity0
    status = OK
    aux1 = 0.0
    aux2 = 0.0
    while t_end - t > teps * t_end:
        if parity == 0:
            cu, cv, nu, nv = u, v, u2, v2
        else:
            cu, cv, nu, nv = u2, v2, u, v
        dmax, wmax = faces_1d(cu, cv, fx, gx, hx, chi, c_d, me)
        umax = 0.0
        if mu > 0.0:
            umax = max_value(cu)
        h = hx
        d = 1.0
        raw = h * h / (2.0 * d * dmax)
        raw = min(raw, h * h / (2.0 * d))
        if wmax > 0.0:
            raw = min(raw, h / (d * wmax))
        if mu > 0.0:
            raw = min(raw, 1.0 / (mu * (2.0 * umax + 1.0)))
        raw = safety * raw
        if raw < dt_min:
            status = DT_COLLAPSE
            aux1 = raw
            break
        dt_try = min(raw, dt_max)
        remaining = t_end - t
        hit_end = dt_try >= remaining
        if hit_end:
            dt_try = remaining
        umin, umax_new, vmin, vmax, ok = update_1d(
            cu, cv, fx, gx, nu, nv, hx, mu, dt_try)
        if (not ok) or umin < -tol_neg or vmin < -tol_neg:
            status = CORRUPTED
            aux1 = umin
            aux2 = vmin
            if not ok:
                aux1 = np.nan
            dt = dt_try
            break
        parity = 1 - parity
        dt = dt_try
        t = t_end if hit_end else t + dt
        n += 1
        if umax_new > bar:
            status = AMPLITUDE
            aux1 = umax_new
            break
        if (not hit_end) and t + teps * max(t, 1.0) >= stop_t:
            break
    return status, parity, t, n, dt, aux1, aux2


@numba.njit(cache=True)
def drive_2d(u, v, u2, v2, fx, fy, gx, gy, hx, hy, chi, c_d, me, mu,
             safety, dt_min, dt_max, t_end, stop_t, bar,
             t0, step0, dt0, parity0, teps, tol_neg):
    t = t0
    n = step0
    dt = dt0
    parity = parity0
    status = OK
    aux1 = 0.0
    aux2 = 0.0
    while t_end - t > teps * t_end:
        if parity == 0:
            cu, cv, nu, nv = u, v, u2, v2
        else:
            cu, cv, nu, nv = u2, v2, u, v
        dmax, wmax = faces_2d(cu, cv, fx, fy, gx, gy, hx, hy, chi, c_d, me)
        umax = 0.0
        if mu > 0.0:
            umax = max_value(cu)
        h = min(hx, hy)
        d = 2.0
        raw = h * h / (2.0 * d * dmax)
        raw = min(raw, h * h / (2.0 * d))
        if wmax > 0.0:
            raw = min(raw, h / (d * wmax))
        if mu > 0.0:
            raw = min(raw, 1.0 / (mu * (2.0 * umax + 1.0)))
        raw = safety * raw
        if raw < dt_min:
            status = DT_COLLAPSE
            aux1 = raw
            break
        dt_try = min(raw, dt_max)
        remaining = t_end - t
        hit_end = dt_try >= remaining
        if hit_end:
            dt_try = remaining
        umin, umax_new, vmin, vmax, ok = update_2d(
            cu, cv, fx, fy, gx, gy, nu, nv, hx, hy, mu, dt_try)
        if (not ok) or umin < -tol_neg or vmin < -tol_neg:
            status = CORRUPTED
            aux1 = umin
            aux2 = vmin
            if not ok:
                aux1 = np.nan
            dt = dt_try
            break
        parity = 1 - parity
        dt = dt_try
        t = t_end if hit_end else t + dt
        n += 1
        if umax_new > bar:
            status = AMPLITUDE
            aux1 = umax_new
            break
        if (not hit_end) and t + teps * max(t, 1.0) >= stop_t:
            break
    return status, parity, t, n, dt, aux1, aux2


@numba.njit(cache=True)
def update_2d(u, v, fx, fy, gx, gy, un, vn, hx, hy, mu, dt):
    nx, ny = u.shape
    rhx = 1.0 / hx
    rhy = 1.0 / hy
    umin = u[0, 0]
    umax = u[0, 0]
    vmin = v[0, 0]
    vmax = v[0, 0]
    bad = 0.0
    for i in range(nx):
        for j in range(ny):
            uij = u[i, j]
            vij = v[i, j]
            div = (fx[i + 1, j] - fx[i, j]) * rhx + (fy[i, j + 1] - fy[i, j]) * rhy
            lap = (gx[i + 1, j] - gx[i, j]) * rhx + (gy[i, j + 1] - gy[i, j]) * rhy
            nu = uij + dt * (div + mu * (uij - uij * uij))
            nv = vij + dt * (lap - vij + uij)
            un[i, j] = nu
            vn[i, j] = nv
            if nu < umin:
                umin = nu
            if nu > umax:
                umax = nu
            if nv < vmin:
                vmin = nv
            if nv > vmax:
                vmax = nv
            bad += (nu - nu) + (nv - nv)
    return umin, umax, vmin, vmax, bad == 0.0
