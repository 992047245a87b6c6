"""Spatial discretization: conservative fluxes, upwind chemotaxis, Laplacian.

Conventions (identical in 1D and 2D):

* Interior face between cells i (low side) and j = i+1 (high side) along an
  axis with spacing h carries the combined flux

      F = D(ubar) (u_j - u_i)/h - w u_up,
      ubar = (u_i + u_j)/2,  w = chi (v_j - v_i)/h,
      u_up = u_i if w > 0 else u_j        (first-order upwind),

  signed as the flow INTO cell i per unit face area. Boundary faces carry
  exactly zero flux (no-flux boundaries); face arrays are padded so the
  zero boundary entries are stored explicitly.

* The discrete divergence is the exact adjoint of that face assignment:
  cell i gains F_high/h and loses F_low/h, so the flux contribution to the
  total mass telescopes to zero up to roundoff.

* The Laplacian of v uses the same padded-face machinery on the face
  gradients of v, i.e. reflected ghost cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import TOL_NEG, Field, Grid, ModelParams, State, StateCorruptionError


@dataclass(frozen=True)
class FaceFluxes:
    """Padded per-axis face fluxes; entry 0 and n_a along axis a are the
    (zero) boundary faces."""

    axis: tuple[np.ndarray, ...]

    def interior(self, a: int) -> np.ndarray:
        """View of the interior faces along axis a."""
        sl = [slice(None)] * len(self.axis[a].shape)
        sl[a] = slice(1, -1)
        return self.axis[a][tuple(sl)]


def diffusivity(u_value, params: ModelParams):
    """D(u) = c_d (u + 1)^(m_exp - 1), elementwise on scalars or arrays.

    Values in [-TOL_NEG, 0) are clamped to 0 (roundoff dust); anything
    below -TOL_NEG raises StateCorruptionError.
    """
    arr = np.asarray(u_value, dtype=np.float64)
    lo = float(np.min(arr)) if arr.size else 0.0
    if not math.isfinite(lo) or not math.isfinite(float(np.max(arr)) if arr.size else 0.0):
        raise StateCorruptionError("diffusivity input contains non-finite values")
    if lo < -TOL_NEG:
        raise StateCorruptionError(f"density {lo} below -{TOL_NEG} in diffusivity")
    flat = np.ascontiguousarray(arr).ravel()
    out = np.empty_like(flat)
    _kernels.diffusivity_values(flat, out, params.c_d, params.m_exp - 1.0)
    if np.isscalar(u_value) or arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def _face_shapes(grid: Grid) -> tuple[tuple[int, ...], ...]:
    shapes = []
    for a in range(grid.dim):
        s = list(grid.shape)
        s[a] += 1
        shapes.append(tuple(s))
    return tuple(shapes)


def _compute_faces(u: Field, v: Field, params: ModelParams, grid: Grid):
    """Run the face kernel; returns (flux arrays, gradient arrays, dmax, wmax)."""
    shapes = _face_shapes(grid)
    if grid.dim == 1:
        fx = np.empty(shapes[0])
        gx = np.empty(shapes[0])
        dmax, wmax = _kernels.faces_1d(u, v, fx, gx, grid.spacing[0],
                                       params.chi, params.c_d, params.m_exp - 1.0)
        return (fx,), (gx,), dmax, wmax
    fx = np.empty(shapes[0])
    fy = np.empty(shapes[1])
    gx = np.empty(shapes[0])
    gy = np.empty(shapes[1])
    dmax, wmax = _kernels.faces_2d(u, v, fx, fy, gx, gy,
                                   grid.spacing[0], grid.spacing[1],
                                   params.chi, params.c_d, params.m_exp - 1.0)
    return (fx, fy), (gx, gy), dmax, wmax


def _check_finite(state: State) -> None:
    for name, f in (("u", state.u), ("v", state.v)):
        lo = float(np.min(f))
        hi = float(np.max(f))
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise StateCorruptionError(f"{name} contains non-finite values")


def assemble_fluxes(state: State, params: ModelParams, grid: Grid) -> FaceFluxes:
    """Combined diffusive + chemotactic face fluxes for the current state."""
    _check_finite(state)
    flux, _, _, _ = _compute_faces(state.u, state.v, params, grid)
    return FaceFluxes(axis=flux)


def face_gradients(v: Field, grid: Grid) -> tuple[np.ndarray, ...]:
    """Padded per-axis face gradients of a field, zero on boundary faces."""
    shapes = _face_shapes(grid)
    grads = []
    for a in range(grid.dim):
        g = np.zeros(shapes[a])
        h = grid.spacing[a]
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        mid = [slice(None)] * grid.dim
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        mid[a] = slice(1, -1)
        g[tuple(mid)] = (v[tuple(hi)] - v[tuple(lo)]) * (1.0 / h)
        grads.append(g)
    return tuple(grads)


def flux_divergence(fluxes: FaceFluxes, grid: Grid) -> Field:
    """Discrete divergence of padded face arrays: cell i gets (F_hi - F_lo)/h."""
    out = None
    for a, f in enumerate(fluxes.axis):
        rh = 1.0 / grid.spacing[a]
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        term = (f[tuple(hi)] - f[tuple(lo)]) * rh
        out = term if out is None else out + term
    assert out is not None
    return out


def rhs_u(state: State, params: ModelParams, grid: Grid) -> Field:
    """Right-hand side of the cell-density equation:
    div(fluxes) + mu (u - u^2)."""
    div = flux_divergence(assemble_fluxes(state, params, grid), grid)
    u = state.u
    return div + params.mu * (u - u * u)


def laplacian(v: Field, grid: Grid) -> Field:
    """Neumann Laplacian via reflected ghosts (zero boundary-face gradients)."""
    return flux_divergence(FaceFluxes(axis=face_gradients(v, grid)), grid)


def rhs_v(state: State, grid: Grid) -> Field:
    """Right-hand side of the chemoattractant equation: lap v - v + u."""
    _check_finite(state)
    return laplacian(state.v, grid) - state.v + state.u
