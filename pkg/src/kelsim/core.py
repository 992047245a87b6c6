"""Shared domain types: model parameters, mesh, grid functions, state, initial data.

The model is the quasilinear Keller-Segel system with logistic source

    u_t = div(D(u) grad u) - chi * div(u grad v) + mu * (u - u^2)
    v_t = lap v - v + u

on a rectangle/interval with no-flux boundaries, where the nonlinear
diffusion is D(u) = c_d * (u + 1)^(m_exp - 1).

Grid functions are plain float64 numpy arrays of shape ``grid.shape``
(cell-centered). All random initial data comes from the counter-based
64-bit Philox generator so that runs reproduce bit-identically across
platforms for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tolerated negative undershoot in cell densities (roundoff dust).
# Anything below this is treated as state corruption.
TOL_NEG = 1e-10

# A grid function: one float64 per cell, shape == Grid.shape.
Field = np.ndarray


class ConfigurationError(ValueError):
    """Invalid parameter, grid, or initial-data specification."""


class StateCorruptionError(RuntimeError):
    """A field holds NaN/inf or a density below the -TOL_NEG floor."""


@dataclass(frozen=True)
class ModelParams:
    """Physical and analytical constants of the model.

    dim     -- spatial dimension N (the simulator handles 1 and 2,
               the boundedness classifier accepts any N >= 1)
    chi     -- chemotactic sensitivity, > 0
    mu      -- logistic coefficient, >= 0
    c_d     -- diffusion constant in D(u) = c_d (u+1)^(m_exp-1), > 0
    m_exp   -- diffusion exponent, any real
    lambda0 -- maximal-regularity constant (user-supplied or estimated), > 0
    c_gn    -- Gagliardo-Nirenberg constant (user-supplied or estimated), > 0
    """

    dim: int
    chi: float
    mu: float = 0.0
    c_d: float = 1.0
    m_exp: float = 1.0
    lambda0: float = 1.0
    c_gn: float = 1.0

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigurationError(f"dim must be an integer >= 1, got {self.dim}")
        if not (self.chi > 0.0):
            raise ConfigurationError(f"chi must be > 0, got {self.chi}")
        if not (self.mu >= 0.0):
            raise ConfigurationError(f"mu must be >= 0, got {self.mu}")
        if not (self.c_d > 0.0):
            raise ConfigurationError(f"c_d must be > 0, got {self.c_d}")
        if not (self.lambda0 > 0.0):
            raise ConfigurationError(f"lambda0 must be > 0, got {self.lambda0}")
        if not (self.c_gn > 0.0):
            raise ConfigurationError(f"c_gn must be > 0, got {self.c_gn}")
        if not math.isfinite(self.m_exp):
            raise ConfigurationError(f"m_exp must be finite, got {self.m_exp}")


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered rectangular mesh on the product of [0, L_a].

    Cell (i_0, ..,) has center ((i_a + 1/2) * spacing_a). Boundaries are
    reflecting (no-flux); ghost values are mirror images of the first
    interior cell, which makes boundary-face differences exactly zero.
    """

    dim: int
    n_cells: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ConfigurationError(f"grid dim must be 1 or 2, got {self.dim}")
        if len(self.n_cells) != self.dim or len(self.lengths) != self.dim:
            raise ConfigurationError(
                f"n_cells/lengths must have {self.dim} entries, "
                f"got {self.n_cells} / {self.lengths}"
            )
        for n in self.n_cells:
            if int(n) != n or n < 4:
                raise ConfigurationError(f"need at least 4 cells per axis, got {n}")
        for length in self.lengths:
            if not (length > 0.0) or not math.isfinite(length):
                raise ConfigurationError(f"lengths must be positive, got {length}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n_cells

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.n_cells))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def total_cells(self) -> int:
        return math.prod(self.n_cells)

    def cell_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.n_cells[axis], dtype=np.float64) + 0.5) * h


def make_grid(dim: int, n_cells, lengths) -> Grid:
    """Build a uniform mesh; dim in {1, 2}, >= 4 cells and positive length per axis."""
    return Grid(dim=dim, n_cells=tuple(int(n) for n in n_cells),
                lengths=tuple(float(L) for L in lengths))


@dataclass
class State:
    """The pair (u, v) at one time instant plus step metadata.

    Invariants (maintained by the integrator, checked by ``validate``):
    u >= -TOL_NEG and v >= -TOL_NEG componentwise, all values finite.
    ``last_dt`` is 0.0 for a freshly constructed initial state.
    """

    u: Field
    v: Field
    t: float = 0.0
    step: int = 0
    last_dt: float = 0.0

    def validate(self, grid: Grid) -> None:
        for name, f in (("u", self.u), ("v", self.v)):
            if f.shape != grid.shape:
                raise ConfigurationError(
                    f"{name} has shape {f.shape}, grid expects {grid.shape}"
                )
            lo = float(np.min(f))
            hi = float(np.max(f))
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise StateCorruptionError(f"{name} contains non-finite values")
            if lo < -TOL_NEG:
                raise StateCorruptionError(f"min {name} = {lo} below -{TOL_NEG}")
        if self.t < 0.0 or self.step < 0 or self.last_dt < 0.0:
            raise ConfigurationError("t, step and last_dt must be nonnegative")


@dataclass(frozen=True)
class InitialData:
    """Specification of one nonnegative initial field.

    kind is one of:
      "constant"       -- every cell equal to ``value``
      "gaussian"       -- amplitude * exp(-|x - center|^2 / (2 width^2));
                          center defaults to the domain center
      "filtered-noise" -- Philox(seed) uniform noise per cell, smoothed by
                          ``cutoff`` passes of the nearest-neighbor averaging
                          stencil, shifted/clipped to [0, amplitude]
    """

    kind: str
    value: float = 0.0
    amplitude: float = 0.0
    center: tuple[float, ...] | None = None
    width: float = 0.1
    seed: int = 0
    cutoff: int = 4

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "gaussian", "filtered-noise"):
            raise ConfigurationError(f"unknown initial-data kind {self.kind!r}")
        if self.kind == "constant" and not (self.value >= 0.0):
            raise ConfigurationError("constant initial data must be nonnegative")
        if self.kind in ("gaussian", "filtered-noise") and not (self.amplitude >= 0.0):
            raise ConfigurationError("amplitude must be nonnegative")
        if self.kind == "gaussian" and not (self.width > 0.0):
            raise ConfigurationError("gaussian width must be positive")
        if self.kind == "filtered-noise":
            if self.seed < 0:
                raise ConfigurationError("seed must be a nonnegative integer")
            if self.cutoff < 0:
                raise ConfigurationError("cutoff must be a nonnegative integer")

    @classmethod
    def constant(cls, value: float) -> "InitialData":
        return cls(kind="constant", value=float(value))

    @classmethod
    def gaussian(cls, amplitude: float, width: float,
                 center: tuple[float, ...] | None = None) -> "InitialData":
        return cls(kind="gaussian", amplitude=float(amplitude), width=float(width),
                   center=None if center is None else tuple(float(c) for c in center))

    @classmethod
    def filtered_noise(cls, seed: int, amplitude: float, cutoff: int = 4) -> "InitialData":
        return cls(kind="filtered-noise", seed=int(seed), amplitude=float(amplitude),
                   cutoff=int(cutoff))


def _neighbor_average(a: np.ndarray) -> np.ndarray:
    """One pass of the nearest-neighbor averaging stencil, replicated edges."""
    if a.ndim == 1:
        p = np.pad(a, 1, mode="edge")
        return (p[:-2] + p[1:-1] + p[2:]) / 3.0
    p = np.pad(a, 1, mode="edge")
    return (p[1:-1, 1:-1] + p[:-2, 1:-1] + p[2:, 1:-1]
            + p[1:-1, :-2] + p[1:-1, 2:]) / 5.0


def make_initial(grid: Grid, spec: InitialData) -> Field:
    """Realize an initial-data specification on a grid.

    Pure and deterministic: same (grid, spec) always yields a bit-identical
    nonnegative finite field.
    """
    shape = grid.shape
    if spec.kind == "constant":
        return np.full(shape, spec.value, dtype=np.float64)

    if spec.kind == "gaussian":
        if spec.amplitude == 0.0:
            return np.zeros(shape, dtype=np.float64)
        center = spec.center
        if center is None:
            center = tuple(L / 2.0 for L in grid.lengths)
        if len(center) != grid.dim:
            raise ConfigurationError(
                f"gaussian center needs {grid.dim} coordinates, got {center}"
            )
        axes = [grid.cell_centers(a) - center[a] for a in range(grid.dim)]
        if grid.dim == 1:
            r2 = axes[0] ** 2
        else:
            r2 = axes[0][:, None] ** 2 + axes[1][None, :] ** 2
        return spec.amplitude * np.exp(-r2 / (2.0 * spec.width ** 2))

    # filtered-noise
    rng = np.random.Generator(np.random.Philox(spec.seed))
    raw = rng.random(shape, dtype=np.float64)
    for _ in range(spec.cutoff):
        raw = _neighbor_average(raw)
    raw = raw - raw.min()
    top = raw.max()
    if top > 0.0 and spec.amplitude > 0.0:
        raw = raw * (spec.amplitude / top)
    else:
        raw = np.zeros(shape, dtype=np.float64)
    return np.clip(raw, 0.0, spec.amplitude if spec.amplitude > 0.0 else 0.0)
