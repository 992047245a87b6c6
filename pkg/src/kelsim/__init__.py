"""Numerical laboratory for the quasilinear Keller-Segel system with
logistic source: a conservative finite-volume simulator, exact closed-form
boundedness thresholds, empirical estimators for the functional-inequality
constants, and a sweep harness mapping empirical against predicted
boundedness."""

from .core import (
    TOL_NEG,
    ConfigurationError,
    Field,
    Grid,
    InitialData,
    ModelParams,
    State,
    StateCorruptionError,
    make_grid,
    make_initial,
)
from .diagnostics import (
    DiagnosticsRecord,
    GnCorpus,
    estimate_cgn,
    estimate_lambda0,
    gn_ratio,
    lp_norm,
    mass,
    regularity_ratio,
    u2_window_integral,
)
from .integrator import RunOutcome, StepControl, Verdict, run, stable_dt, step
from .operators import (
    FaceFluxes,
    assemble_fluxes,
    diffusivity,
    flux_divergence,
    laplacian,
    rhs_u,
    rhs_v,
)
from .theory import (
    CriticalExponent,
    RegimeStatus,
    RegimeVerdict,
    b1_constant,
    cd_threshold,
    classify_regime,
    critical_exponent,
    find_p0,
    h_function,
    lemma_min,
)

__version__ = "0.1.0"
