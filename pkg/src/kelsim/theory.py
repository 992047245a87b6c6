"""Closed-form boundedness thresholds and scalar minimization results.

For the model of ``core`` the known sufficient conditions for global
boundedness split into two cases:

  I.  m_exp exceeds the critical exponent
          m* = 2 - (2/N) * S / (S - mu),   S = chi * max(1, lambda0),
      where every m qualifies once mu >= S;
  II. m_exp equals 2 - 2/N and the diffusion constant exceeds
          c_gn * (1 + |u0|_L1) / 3 * (2 - 2/N)^2 * max(1, lambda0) * chi.

This module evaluates those thresholds exactly, classifies parameter
points, and implements the scalar auxiliary results used alongside them:
the constant B1(p), the minimum of  H(y) = y + B1 y^-p chi^(p+1) lambda0
over y > 0, and the existence of an integrability exponent p0 > 1 with
h(p0) > 0. Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .core import ModelParams

# Absolute tolerance for declaring m_exp equal to the critical case 2 - 2/N.
TOL_EQ = 1e-12
# Search ceiling for the integrability exponent p0.
P_MAX = 1.0e6
# Required positive margin of h at the returned p0.
DELTA_H = 1e-9

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateCaseError(ValueError):
    """The requested threshold degenerates (N = 1 makes 2 - 2/N vanish)."""


class PreconditionError(ValueError):
    """A closed-form result was requested outside its hypothesis."""


class ConsistencyError(RuntimeError):
    """Closed form and internal numerical cross-check disagree: implementation bug."""


class RegimeStatus(Enum):
    BOUNDED_CASE_I = "bounded-I"    # m above the critical exponent
    BOUNDED_CASE_II = "bounded-II"  # m critical, diffusion constant above threshold
    NOT_COVERED = "not-covered"     # classifier silent; NOT a blow-up prediction


@dataclass(frozen=True)
class RegimeVerdict:
    status: RegimeStatus
    detail: str

    @property
    def bounded(self) -> bool:
        return self.status is not RegimeStatus.NOT_COVERED


@dataclass(frozen=True)
class CriticalExponent:
    """The exponent threshold m*; ``value is None`` means every m qualifies."""

    value: float | None

    @property
    def unconstrained(self) -> bool:
        return self.value is None

    @property
    def threshold(self) -> float:
        return -math.inf if self.value is None else self.value


def critical_exponent(params: ModelParams) -> CriticalExponent:
    """Critical diffusion exponent m*(N, chi, mu, lambda0).

    Unconstrained exactly when mu >= chi * max(1, lambda0). For mu = 0 the
    value is computed as 2 (N-1)/N, the exactly-rounded form of 2 - 2/N.
    """
    s = params.chi * max(1.0, params.lambda0)
    if params.mu >= s:
        return CriticalExponent(None)
    if params.mu == 0.0:
        return CriticalExponent(2.0 * (params.dim - 1.0) / params.dim)
    return CriticalExponent(2.0 - (2.0 / params.dim) * s / (s - params.mu))


def cd_threshold(params: ModelParams, u0_l1: float) -> float:
    """Diffusion-constant threshold of the critical-exponent case.

    Returns c_gn * (1 + u0_l1) / 3 * (2 - 2/N)^2 * max(1, lambda0) * chi.
    Defined for N >= 2; at N = 1 the factor (2 - 2/N)^2 vanishes and the
    case carries no information.
    """
    if params.dim < 2:
        raise DegenerateCaseError(
            "the critical-exponent case degenerates for N = 1: "
            "(2 - 2/N)^2 = 0 and the threshold is vacuous"
        )
    if u0_l1 < 0.0:
        raise PreconditionError(f"u0_l1 must be nonnegative, got {u0_l1}")
    crit = 2.0 - 2.0 / params.dim
    return (params.c_gn * (1.0 + u0_l1) / 3.0) * crit * crit \
        * max(1.0, params.lambda0) * params.chi


def classify_regime(params: ModelParams, u0_l1: float) -> RegimeVerdict:
    """Classify a parameter point against the two boundedness cases.

    NOT_COVERED means the classifier is silent, not that blow-up occurs.
    """
    ce = critical_exponent(params)
    if ce.unconstrained:
        s = params.chi * max(1.0, params.lambda0)
        return RegimeVerdict(
            RegimeStatus.BOUNDED_CASE_I,
            f"logistic damping dominates: mu = {params.mu} >= "
            f"chi*max(1, lambda0) = {s}; every exponent m qualifies",
        )
    assert ce.value is not None
    if params.m_exp > ce.value:
        return RegimeVerdict(
            RegimeStatus.BOUNDED_CASE_I,
            f"m = {params.m_exp} > critical exponent m* = {ce.value}",
        )
    crit = 2.0 - 2.0 / params.dim
    if params.dim >= 2 and abs(params.m_exp - crit) <= TOL_EQ:
        thr = cd_threshold(params, u0_l1)
        if params.c_d > thr:
            return RegimeVerdict(
                RegimeStatus.BOUNDED_CASE_II,
                f"m = {params.m_exp} at the critical value {crit} and "
                f"c_d = {params.c_d} > threshold {thr}",
            )
        return RegimeVerdict(
            RegimeStatus.NOT_COVERED,
            f"m at the critical value {crit} but c_d = {params.c_d} "
            f"<= threshold {thr}",
        )
    return RegimeVerdict(
        RegimeStatus.NOT_COVERED,
        f"m = {params.m_exp} <= m* = {ce.value} and m is not at the "
        f"critical value {crit}",
    )


def b1_constant(p: float) -> float:
    """B1(p) = 1/(p+1) * ((p+1)/p)^(-p) * ((p-1)/p)^(p+1), for p >= 1.

    B1(1) = 0; B1 is the Young-inequality constant entering the scalar
    function minimized by ``lemma_min``.
    """
    if not (p >= 1.0):
        raise PreconditionError(f"b1_constant requires p >= 1, got {p}")
    return (1.0 / (p + 1.0)) * ((p + 1.0) / p) ** (-p) * ((p - 1.0) / p) ** (p + 1.0)


def golden_minimize(f: Callable[[float], float], lo: float, hi: float,
                    rel_tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section minimum of a unimodal f on [lo, hi].

    Shrinks the bracket until its width is below rel_tol * max(|mid|, tiny)
    and returns (argmin, min). The minimum must lie inside [lo, hi].
    """
    if not (lo < hi):
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(400):
        if (b - a) <= rel_tol * max(abs(a) + abs(b), 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def scalar_objective(p: float, chi: float, lambda0: float) -> Callable[[float], float]:
    """The function H(y) = y + B1 y^-p chi^(p+1) lambda0 minimized in lemma_min."""
    b1 = b1_constant(p)
    coeff = b1 * chi ** (p + 1.0) * lambda0

    def h(y: float) -> float:
        return y + coeff * y ** (-p)

    return h


def lemma_min(p: float, chi: float, lambda0: float) -> tuple[float, float]:
    """Minimizer and minimum of H(y) = y + B1 y^-p chi^(p+1) lambda0 over y > 0.

    Closed form: y* = (B1 lambda0 p)^(1/(p+1)) chi and
    min = (p-1)/p * lambda0^(1/(p+1)) * chi. For p = 1 the infimum is 0,
    approached as y -> 0+, and (0, 0) is returned.

    Every call cross-checks the closed-form minimum against a golden-section
    search of H in log-space; disagreement beyond 1e-8 relative raises
    ConsistencyError (it would signal an implementation bug, not bad input).
    """
    if not (p >= 1.0):
        raise PreconditionError(f"lemma_min requires p >= 1, got {p}")
    if not (chi > 0.0 and lambda0 > 0.0):
        raise PreconditionError("lemma_min requires chi > 0 and lambda0 > 0")
    if p == 1.0:
        return 0.0, 0.0
    b1 = b1_constant(p)
    y_star = (b1 * lambda0 * p) ** (1.0 / (p + 1.0)) * chi
    minimum = ((p - 1.0) / p) * lambda0 ** (1.0 / (p + 1.0)) * chi

    h = scalar_objective(p, chi, lambda0)
    t0 = math.log(y_star)
    _, numeric = golden_minimize(lambda t: h(math.exp(t)), t0 - 14.0, t0 + 14.0,
                                 rel_tol=1e-12)
    if abs(numeric - minimum) > 1e-8 * max(abs(minimum), 1e-300):
        raise ConsistencyError(
            f"closed-form minimum {minimum} disagrees with golden-section "
            f"value {numeric} at (p={p}, chi={chi}, lambda0={lambda0})"
        )
    return y_star, minimum


def h_function(p: float, c_d: float, c_gn: float, u0_l1: float, dim: int,
               lambda0: float, chi: float) -> float:
    """h(p) = 4 c_d / (c_gn (1 + u0_l1)) - (1 - 2/N + p)^2 / p * max(1, lambda0) chi."""
    if not (p >= 1.0):
        raise PreconditionError(f"h_function requires p >= 1, got {p}")
    lead = 4.0 * c_d / (c_gn * (1.0 + u0_l1))
    q = 1.0 - 2.0 / dim + p
    return lead - (q * q / p) * max(1.0, lambda0) * chi


def find_p0(c_d: float, c_gn: float, u0_l1: float, dim: int,
            lambda0: float, chi: float) -> float:
    """Largest p0 in (1, P_MAX] with h(p0) >= DELTA_H, by bisection.

    Requires the diffusion constant to clear the critical-exponent
    threshold (which makes h(1) > 0); h decreases for p >= 1, so the
    returned p0 sits at the root of h = DELTA_H on the decreasing tail
    and satisfies h(p0) > 0 and p0 > 1.
    """
    crit = 2.0 - 2.0 / dim
    threshold = (c_gn * (1.0 + u0_l1) / 3.0) * crit * crit * max(1.0, lambda0) * chi
    if not (c_d > threshold):
        raise PreconditionError(
            f"find_p0 requires c_d > {threshold} "
            f"(= c_gn(1+u0_l1)/3 * (2-2/N)^2 * max(1,lambda0) * chi), got c_d = {c_d}"
        )

    def h(p: float) -> float:
        return h_function(p, c_d, c_gn, u0_l1, dim, lambda0, chi)

    h1 = h(1.0)
    target = min(DELTA_H, 0.5 * h1)
    if h(P_MAX) >= target:
        return P_MAX
    lo, hi = 1.0, P_MAX
    # h(lo) >= target > h(hi); h is strictly decreasing on [1, P_MAX].
    for _ in range(200):
        if hi - lo <= 1e-9:
            break
        mid = 0.5 * (lo + hi)
        if h(mid) >= target:
            lo = mid
        else:
            hi = mid
    if lo <= 1.0:
        raise ConsistencyError("bisection for p0 collapsed onto p = 1")
    return lo
