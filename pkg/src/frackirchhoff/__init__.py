"""Normalized solutions of a fractional Kirchhoff equation with combined powers.

Radial spectral discretisation of

    (a + b ||(-Delta)^(s/2) u||^2) (-Delta)^s u = lambda u + mu |u|^(q-2) u + |u|^(p-2) u

in R^3 under the mass constraint ``||u||_2 = c``, together with the scalar
fiber analysis, the Gagliardo-Nirenberg constants and the solvers for the
local minimiser, the mountain-pass state and the ``mu = 0`` ground state.
"""
from ._kernels import BACKEND
from .errors import (
    BracketNotFound,
    ConditionViolated,
    DilationMassLossWarning,
    FracKirchhoffError,
    GridMismatchError,
    NonConvergence,
    ParameterError,
    RegimeError,
    RootsNotFound,
)
from .fiber import (
    CriticalKind,
    CriticalStructure,
    FiberProfile,
    ScalarQuartic,
    classify_fiber,
    fiber_derivative,
    fiber_from_moments,
    fiber_value,
    h_roots,
    lemma28_condition,
    mu_thresholds,
)
from .gn import GNCache, GNResult, gn_constant, optimal_gn_constant, weinstein_quotient
from .radial import (
    Moments,
    RadialField,
    RadialGrid,
    apply_fractional_laplacian,
    dilate,
    hs_distance,
    lp_norm,
    mass_norm_sq,
    moments,
    read_field,
    rearrange_decreasing,
    rescale,
    riesz_seminorm_sq,
    write_field,
)
from .solvers import (
    SweepRow,
    asymptotic_sweep,
    default_ladder,
    solve_local_min,
    solve_mountain_pass,
    solve_mu_zero,
    write_sweep_csv,
)
from .variational import (
    PohozaevClass,
    ProblemParams,
    Regime,
    SolveReport,
    classify_pohozaev,
    el_residual,
    energy,
    lambda_from_moments,
    multiplier_estimate,
    pohozaev,
    pohozaev_identity_residual,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BracketNotFound",
    "ConditionViolated",
    "CriticalKind",
    "CriticalStructure",
    "DilationMassLossWarning",
    "FiberProfile",
    "FracKirchhoffError",
    "GNCache",
    "GNResult",
    "GridMismatchError",
    "Moments",
    "NonConvergence",
    "ParameterError",
    "PohozaevClass",
    "ProblemParams",
    "RadialField",
    "RadialGrid",
    "Regime",
    "RegimeError",
    "RootsNotFound",
    "ScalarQuartic",
    "SolveReport",
    "SweepRow",
    "apply_fractional_laplacian",
    "asymptotic_sweep",
    "classify_fiber",
    "classify_pohozaev",
    "default_ladder",
    "dilate",
    "el_residual",
    "energy",
    "fiber_derivative",
    "fiber_from_moments",
    "fiber_value",
    "gn_constant",
    "h_roots",
    "hs_distance",
    "lambda_from_moments",
    "lemma28_condition",
    "lp_norm",
    "mass_norm_sq",
    "moments",
    "mu_thresholds",
    "multiplier_estimate",
    "optimal_gn_constant",
    "pohozaev",
    "pohozaev_identity_residual",
    "read_field",
    "rearrange_decreasing",
    "rescale",
    "riesz_seminorm_sq",
    "solve_local_min",
    "solve_mountain_pass",
    "solve_mu_zero",
    "weinstein_quotient",
    "write_field",
    "write_sweep_csv",
]
