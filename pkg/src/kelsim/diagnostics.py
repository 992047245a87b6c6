"""Norms and functionals tracked along trajectories, plus empirical
estimators for the Gagliardo-Nirenberg constant and the maximal-regularity
constant.

The estimators are lower bounds: each one maximizes a ratio whose
supremum defines the constant, over a finite seeded corpus of fields or
forcings, so no finite run can certify an upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Field, Grid, InitialData, make_initial
from .operators import face_gradients, laplacian


class DomainError(ValueError):
    """Norm/ratio requested outside its domain (e.g. p < 1)."""


class DegenerateInputError(ValueError):
    """A ratio with a vanishing denominator was requested."""


@dataclass
class DiagnosticsRecord:
    """One time-sample of the tracked quantities.

    ``lp_norms`` maps each requested exponent p to the L^p norm of u;
    ``u2_window`` is filled after the run when mu > 0 (forward window
    integral of the squared L^2 norm; None where the window would leave
    the trajectory or the source is off).
    """

    t: float
    dt: float
    mass: float
    lp_norms: dict[float, float] = field(default_factory=dict)
    linf_u: float = 0.0
    min_u: float = 0.0
    l2_v: float = 0.0
    u2_window: float | None = None


def mass(values: Field, grid: Grid) -> float:
    """Integral of a field: sum of cell values times cell volume.

    numpy's pairwise summation over the C-ordered array is the fixed
    deterministic summation order.
    """
    return float(np.sum(values)) * grid.cell_volume


def lp_norm(values: Field, p: float, grid: Grid) -> float:
    """L^p norm (sum |v|^p * vol)^(1/p); p = inf returns max |v|."""
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    if not (p >= 1.0):
        raise DomainError(f"lp_norm requires p >= 1 or inf, got {p}")
    a = np.abs(values)
    if p == 1.0:
        s = float(np.sum(a))
        return s * grid.cell_volume
    if p == 2.0:
        s = float(np.sum(a * a))
    else:
        s = float(np.sum(a ** p))
    return (s * grid.cell_volume) ** (1.0 / p)


def make_record(u: Field, v: Field, t: float, dt: float, grid: Grid,
                lp_track: tuple[float, ...] = (2.0,)) -> DiagnosticsRecord:
    """Sample mass, L^p norms, extrema of u and the L^2 norm of v."""
    norms = {float(p): lp_norm(u, float(p), grid) for p in lp_track}
    return DiagnosticsRecord(
        t=t,
        dt=dt,
        mass=mass(u, grid),
        lp_norms=norms,
        linf_u=float(np.max(u)),
        min_u=float(np.min(u)),
        l2_v=lp_norm(v, 2.0, grid),
    )


@dataclass(frozen=True)
class WindowSample:
    t: float
    value: float
    truncated: bool


def u2_window_integral(records: list[DiagnosticsRecord], tau: float) -> list[WindowSample]:
    """Sliding forward-window integrals int_t^{t+tau} |u|_L2^2 ds by trapezoid.

    Records must be time-sorted and carry the p = 2 norm. Windows reaching
    past the last record are truncated and flagged.
    """
    if tau <= 0.0:
        raise DomainError(f"window width must be positive, got {tau}")
    ts = np.array([r.t for r in records])
    if len(ts) < 2 or np.any(np.diff(ts) < 0.0):
        raise DomainError("records must be time-sorted with at least two samples")
    try:
        s = np.array([r.lp_norms[2.0] ** 2 for r in records])
    except KeyError as exc:
        raise DomainError("records lack the p = 2 norm") from exc

    # cumulative trapezoid C(t_j) = int_{t_0}^{t_j} s dt
    seg = 0.5 * (s[1:] + s[:-1]) * np.diff(ts)
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    def cum_at(t: float) -> float:
        j = int(np.searchsorted(ts, t, side="right") - 1)
        j = min(max(j, 0), len(ts) - 1)
        if j == len(ts) - 1:
            return float(cum[-1])
        frac = (t - ts[j]) / (ts[j + 1] - ts[j])
        s_t = s[j] + frac * (s[j + 1] - s[j])
        return float(cum[j] + 0.5 * (s[j] + s_t) * (t - ts[j]))

    out = []
    t_last = float(ts[-1])
    for r in records:
        end = r.t + tau
        truncated = end > t_last
        value = cum_at(min(end, t_last)) - cum_at(r.t)
        out.append(WindowSample(t=r.t, value=value, truncated=truncated))
    return out


def gradient_l2(values: Field, grid: Grid) -> float:
    """L^2 norm of the face-difference gradient (boundary faces are zero)."""
    total = 0.0
    for g in face_gradients(values, grid):
        total += float(np.sum(g * g))
    return math.sqrt(total * grid.cell_volume)


def gn_ratio(values: Field, p: float, theta: float, grid: Grid) -> float:
    """Interpolation-inequality ratio, a lower witness for the
    Gagliardo-Nirenberg constant:

        |u|_Lp / (|grad u|_L2^a |u|_Ltheta^(1-a) + |u|_Ltheta),
        a = (N/theta - N/p) / (1 - N/2 + N/theta).

    Requires 0 < theta < p and a in (0, 1) for N = grid.dim.
    """
    if not (0.0 < theta < p):
        raise DomainError(f"need 0 < theta < p, got theta={theta}, p={p}")
    n = float(grid.dim)
    denom_a = 1.0 - n / 2.0 + n / theta
    if denom_a <= 0.0:
        raise DomainError(f"interpolation parameter undefined: 1 - N/2 + N/theta = {denom_a}")
    a = (n / theta - n / p) / denom_a
    if not (0.0 < a < 1.0):
        raise DomainError(f"interpolation parameter a = {a} outside (0, 1)")
    # theta < 1 is allowed in the ratio even though |.|_Ltheta is then
    # only a quasi-norm; the estimator never uses theta < 1.
    abs_v = np.abs(values)
    num = lp_norm(values, p, grid)
    ltheta = (float(np.sum(abs_v ** theta)) * grid.cell_volume) ** (1.0 / theta)
    if ltheta == 0.0:
        raise DegenerateInputError("field is identically zero")
    grad = gradient_l2(values, grid)
    return num / (grad ** a * ltheta ** (1.0 - a) + ltheta)


@dataclass(frozen=True)
class GnCorpus:
    """Seeded family of test fields for estimate_cgn.

    The corpus is generated in a fixed order (constants, gaussian bumps,
    filtered noise, near-singular spikes), so enlarging any count keeps
    the earlier members identical.
    """

    seed: int = 0
    constants: tuple[float, ...] = (1.0,)
    n_bumps: int = 0
    n_noise: int = 0
    n_spikes: int = 0
    noise_cutoff: int = 2

    def fields(self, grid: Grid):
        for c in self.constants:
            yield np.full(grid.shape, float(c))
        rng = np.random.Generator(np.random.Philox(self.seed))
        for _ in range(self.n_bumps):
            center = tuple(rng.random() * L for L in grid.lengths)
            width = 0.02 + 0.3 * rng.random()
            amp = 0.1 + 10.0 * rng.random()
            yield make_initial(grid, InitialData.gaussian(amp, width, center))
        for k in range(self.n_noise):
            sub = int(rng.integers(0, 2 ** 31))
            yield make_initial(
                grid, InitialData.filtered_noise(sub, 1.0, self.noise_cutoff))
        for _ in range(self.n_spikes):
            center = tuple(rng.random() * L for L in grid.lengths)
            delta = 10.0 ** (-1.0 - 3.0 * rng.random())
            beta = 0.3 + 0.6 * rng.random()
            axes = [grid.cell_centers(a) - center[a] for a in range(grid.dim)]
            if grid.dim == 1:
                r2 = axes[0] ** 2
            else:
                r2 = axes[0][:, None] ** 2 + axes[1][None, :] ** 2
            yield (r2 + delta) ** (-beta)


def estimate_cgn(corpus: GnCorpus, p: float, theta: float, grid: Grid) -> float:
    """Maximum gn_ratio over the corpus: a LOWER bound for the constant."""
    best = None
    for f in corpus.fields(grid):
        try:
            r = gn_ratio(f, p, theta, grid)
        except DegenerateInputError:
            continue
        if best is None or r > best:
            best = r
    if best is None:
        raise DegenerateInputError("corpus contained no usable field")
    return best


def w2_norm(values: Field, gamma: float, grid: Grid) -> float:
    """Discrete second-order Sobolev surrogate: the L^gamma norms of the
    field, its face-difference gradient and its second differences, summed."""
    if not (gamma > 1.0):
        raise DomainError(f"w2_norm requires gamma > 1, got {gamma}")
    own = lp_norm(values, gamma, grid)
    gtot = 0.0
    for g in face_gradients(values, grid):
        gtot += float(np.sum(np.abs(g) ** gamma))
    grad = (gtot * grid.cell_volume) ** (1.0 / gamma)
    second = lp_norm(laplacian(values, grid), gamma, grid)
    return own + grad + second


def regularity_ratio(g_segments: list[Field], gamma: float, grid: Grid,
                     horizon: float, cfl: float = 0.4) -> float | None:
    """Ratio of the exponentially weighted second-order norm integral of v
    to the weighted forcing integral, for v_t = lap v - v + g, v(0) = 0,
    with g piecewise constant in time over equal segments of [0, horizon].

    Exponential weights are evaluated in shifted form exp(gamma (s - T)),
    under which the ratio is invariant, to avoid overflow. Returns None
    if the forcing integral vanishes (0/0 case).
    """
    if not (gamma > 1.0):
        raise DomainError(f"gamma must be > 1, got {gamma}")
    if not g_segments:
        raise DomainError("need at least one forcing segment")
    n_seg = len(g_segments)
    h = min(grid.spacing)
    dt = cfl * h * h / (2.0 * grid.dim)
    n_steps = max(int(math.ceil(horizon / dt)), n_seg)
    dt = horizon / n_steps

    v = np.zeros(grid.shape)
    lhs = 0.0
    rhs = 0.0

    def weight(s: float) -> float:
        return math.exp(gamma * (s - horizon))

    def seg_at(s: float) -> Field:
        k = min(int(s / horizon * n_seg), n_seg - 1)
        return g_segments[k]

    def lhs_integrand(s: float, vv: Field) -> float:
        return weight(s) * w2_norm(vv, gamma, grid) ** gamma

    def rhs_integrand(s: float) -> float:
        return weight(s) * lp_norm(seg_at(s), gamma, grid) ** gamma

    prev_l = lhs_integrand(0.0, v)
    prev_r = rhs_integrand(0.0)
    s = 0.0
    for _ in range(n_steps):
        g = seg_at(s + 0.5 * dt)
        v = v + dt * (laplacian(v, grid) - v + g)
        if not math.isfinite(float(np.max(np.abs(v)))):
            raise DegenerateInputError("explicit relaxation of v went non-finite")
        s += dt
        cur_l = lhs_integrand(s, v)
        cur_r = rhs_integrand(s)
        lhs += 0.5 * (prev_l + cur_l) * dt
        rhs += 0.5 * (prev_r + cur_r) * dt
        prev_l, prev_r = cur_l, cur_r
    # v(0) = 0 adds nothing to the right-hand side.
    if rhs == 0.0:
        return None
    return lhs / rhs


def estimate_lambda0(gamma: float, grid: Grid, trial_count: int, seed: int,
                     horizon: float, n_segments: int = 6,
                     noise_cutoff: int = 2) -> float:
    """LOWER bound for the maximal-regularity constant: max regularity_ratio
    over seeded random piecewise-constant-in-time smooth forcings."""
    if trial_count < 1:
        raise DomainError("trial_count must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    best = None
    for _ in range(trial_count):
        segments = []
        for _ in range(n_segments):
            sub = int(rng.integers(0, 2 ** 31))
            f = make_initial(grid, InitialData.filtered_noise(sub, 1.0, noise_cutoff))
            segments.append(f - float(np.mean(f)) + 0.2)  # signed, mildly biased
        ratio = regularity_ratio(segments, gamma, grid, horizon)
        if ratio is None:
            continue
        if best is None or ratio > best:
            best = ratio
    if best is None:
        raise DegenerateInputError("all trials degenerate (zero forcing)")
    return best
