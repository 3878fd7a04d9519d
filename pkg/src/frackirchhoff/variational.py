"""Energy, Pohozaev functional, multipliers and residuals.

Everything here is a function of either a :class:`~.radial.Moments` bundle or
a field. With ``A = ||(-Delta)^(s/2) u||_2^2``::

    E_mu(u) = a/2 A + b/4 A^2 - mu/q |u|_q^q - 1/p |u|_p^p
    P_mu(u) = a A + b A^2 - mu th_q |u|_q^q - th_p |u|_p^p

with ``th_alpha = 3 (alpha - 2) / (2 s alpha)``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import ParameterError
from .radial import (
    Moments,
    RadialField,
    apply_fractional_laplacian,
    mass_norm_sq,
    moments,
)

TOL_P = 1e-6
TOL_EL = 1e-5


class Regime(str, enum.Enum):
    MIXED = "mixed"
    SUPERCRITICAL = "supercritical"
    UNSUPPORTED = "unsupported"


class PohozaevClass(str, enum.Enum):
    P_PLUS = "P_plus"
    P_ZERO = "P_zero"
    P_MINUS = "P_minus"
    NOT_ON_MANIFOLD = "NotOnManifold"


def sobolev_exponent(s: float) -> float:
    return 6.0 / (3.0 - 2.0 * s)


def l2_critical_exponent(s: float) -> float:
    return 2.0 + 8.0 * s / 3.0


def theta(s: float, alpha: float) -> float:
    """Gagliardo-Nirenberg exponent ``3 (alpha - 2) / (2 s alpha)``."""
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    if not 2.0 < alpha < sobolev_exponent(s):
        raise ParameterError(
            f"exponent {alpha} outside (2, 2*_s) = (2, {sobolev_exponent(s):.6g})"
        )
    return 3.0 * (alpha - 2.0) / (2.0 * s * alpha)


@dataclass(frozen=True)
class ProblemParams:
    """Coefficients ``a, b``, mass ``c``, order ``s``, powers ``q < p`` and ``mu``."""

    a: float
    b: float
    c: float
    s: float
    q: float
    p: float
    mu: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "s", "q", "p", "mu"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        for name in ("a", "b", "c"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive (a, b, c > 0), got {getattr(self, name)}")
        if not 0.0 < self.s < 1.0:
            raise ParameterError(f"s must lie in (0, 1), got {self.s}")
        crit = sobolev_exponent(self.s)
        if not 2.0 < self.q < self.p < crit:
            raise ParameterError(
                f"exponents must satisfy 2<q<p<2_{{s}}^{{\\ast}}=6/(3-2s)={crit:.6g}; "
                f"got q={self.q}, p={self.p}"
            )
        if self.mu < 0:
            raise ParameterError(f"mu must be >= 0, got {self.mu}")

    @property
    def theta_q(self) -> float:
        return theta(self.s, self.q)

    @property
    def theta_p(self) -> float:
        return theta(self.s, self.p)

    def regime(self) -> Regime:
        """Mixed if ``q < 2 + 4s/3`` and ``p > 2 + 8s/3``; supercritical if ``q > 2 + 8s/3``.

        The mixed window is non-empty only for ``s > 3/4``, since
        ``2 + 8s/3 < 6/(3 - 2s)`` is equivalent to ``s > 3/4``.
        """
        crit = l2_critical_exponent(self.s)
        if self.q < 2.0 + 4.0 * self.s / 3.0 and self.p > crit:
            assert self.s > 0.75
            return Regime.MIXED
        if self.q > crit:
            return Regime.SUPERCRITICAL
        return Regime.UNSUPPORTED

    def with_mu(self, mu: float) -> "ProblemParams":
        return ProblemParams(self.a, self.b, self.c, self.s, self.q, self.p, mu)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("a", "b", "c", "s", "q", "p", "mu")}


def energy(params: ProblemParams, m: Moments) -> float:
    A = m.seminorm_sq
    return (
        0.5 * params.a * A
        + 0.25 * params.b * A * A
        - params.mu / params.q * m.lq
        - m.lp / params.p
    )


def pohozaev(params: ProblemParams, m: Moments) -> float:
    A = m.seminorm_sq
    return (
        params.a * A
        + params.b * A * A
        - params.mu * params.theta_q * m.lq
        - params.theta_p * m.lp
    )


def elliptic_scale(params: ProblemParams, m: Moments) -> float:
    """``a A + b A^2``, the reference size for Pohozaev tolerances."""
    A = m.seminorm_sq
    return params.a * A + params.b * A * A


def pohozaev_second(params: ProblemParams, m: Moments) -> float:
    """``2aA + 4bA^2 - mu q th_q^2 L_q - p th_p^2 L_p``; its sign splits the manifold."""
    A = m.seminorm_sq
    tq, tp = params.theta_q, params.theta_p
    return (
        2.0 * params.a * A
        + 4.0 * params.b * A * A
        - params.mu * params.q * tq * tq * m.lq
        - params.p * tp * tp * m.lp
    )


def relative_pohozaev(params: ProblemParams, m: Moments) -> float:
    scale = elliptic_scale(params, m)
    P = pohozaev(params, m)
    return abs(P) / scale if scale > 0 else abs(P)


def classify_pohozaev(params: ProblemParams, m: Moments, tol_p: float = TOL_P) -> PohozaevClass:
    if relative_pohozaev(params, m) > tol_p:
        return PohozaevClass.NOT_ON_MANIFOLD
    A = m.seminorm_sq
    second = pohozaev_second(params, m)
    ref = 2.0 * params.a * A + 4.0 * params.b * A * A
    if abs(second) <= tol_p * ref:
        return PohozaevClass.P_ZERO
    return PohozaevClass.P_PLUS if second > 0 else PohozaevClass.P_MINUS


def _el_operator(params: ProblemParams, u: RadialField):
    Lu = apply_fractional_laplacian(u, params.s)
    A = float(np.dot(u.grid.weights, u.values * Lu.values))
    kirchhoff = (params.a + params.b * A) * Lu.values
    nonlin = _kernels.power_terms(
        np.ascontiguousarray(u.values), params.mu, params.q, params.p
    )
    return kirchhoff, nonlin, A


def el_gradient(params: ProblemParams, u: RadialField) -> RadialField:
    """``(a + bA)(-Delta)^s u - mu|u|^(q-2)u - |u|^(p-2)u`` (unconstrained gradient)."""
    kirchhoff, nonlin, _ = _el_operator(params, u)
    return RadialField(u.grid, kirchhoff - nonlin)


def el_residual(params: ProblemParams, u: RadialField, lam: float) -> float:
    """Relative L^2 residual of the Euler-Lagrange equation at ``(u, lam)``."""
    kirchhoff, nonlin, _ = _el_operator(params, u)
    w = u.grid.weights
    ref = math.sqrt(float(np.dot(w, kirchhoff * kirchhoff)))
    if ref == 0.0:
        return 0.0
    res = kirchhoff - lam * u.values - nonlin
    return math.sqrt(float(np.dot(w, res * res))) / ref


def multiplier_estimate(params: ProblemParams, u: RadialField) -> float:
    """L^2-optimal multiplier: test the equation against ``u`` itself."""
    mass = mass_norm_sq(u)
    if mass == 0.0:
        raise ValueError("multiplier undefined for the zero field")
    m = moments(u, params.s, params.q, params.p)
    A = m.seminorm_sq
    return ((params.a + params.b * A) * A - params.mu * m.lq - m.lp) / mass


def lambda_from_moments(params: ProblemParams, m: Moments) -> float:
    """Multiplier implied by ``P_mu = 0``; always ``<= 0``."""
    if m.mass_sq == 0.0:
        return 0.0
    return (
        params.mu * (params.theta_q - 1.0) * m.lq + (params.theta_p - 1.0) * m.lp
    ) / m.mass_sq


def pohozaev_identity_residual(params: ProblemParams, u: RadialField, lam: float) -> float:
    """Relative defect of ``(3-2s)/2 (aA + bA^2) = 3 int G(u)``.

    ``G(t) = lam t^2/2 + mu |t|^q/q + |t|^p/p``.
    """
    m = moments(u, params.s, params.q, params.p)
    lhs = 0.5 * (3.0 - 2.0 * params.s) * elliptic_scale(params, m)
    if lhs == 0.0:
        return 0.0
    G = 0.5 * lam * m.mass_sq + params.mu * m.lq / params.q + m.lp / params.p
    return abs(lhs - 3.0 * G) / lhs


@dataclass
class SolveReport:
    """Outcome of a constrained solve."""

    field: RadialField
    lam: float
    level: float
    el_residual: float
    pohozaev_residual: float
    classification: PohozaevClass
    iterations: int
    converged: bool
    params: ProblemParams | None = None
    kind: str = ""
    identity_residual: float = float("nan")
    lambda_pohozaev: float = float("nan")
    tol_el: float = TOL_EL
    tol_p: float = TOL_P
    moments: Moments | None = None
    history: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def seminorm(self) -> float:
        return math.sqrt(self.moments.seminorm_sq) if self.moments else float("nan")

    @property
    def positive(self) -> bool:
        return bool(np.all(self.field.values > 0.0))

    def summary(self) -> dict:
        out = {
            "kind": self.kind,
            "lambda": self.lam,
            "level": self.level,
            "el_residual": self.el_residual,
            "pohozaev_residual": self.pohozaev_residual,
            "identity_residual": self.identity_residual,
            "lambda_pohozaev": self.lambda_pohozaev,
            "classification": self.classification.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "positive": self.positive,
            "seminorm": self.seminorm,
            "tol_el": self.tol_el,
            "tol_p": self.tol_p,
            "grid": {"r_max": self.field.grid.r_max, "n": self.field.grid.n},
        }
        if self.params is not None:
            out["params"] = self.params.as_dict()
        if self.moments is not None:
            out["moments"] = self.moments.as_dict()
        out["diagnostics"] = self.diagnostics
        return out

    def to_json(self, path, field_path=None) -> Path:
        path = Path(path)
        data = self.summary()
        data["field_csv"] = str(field_path) if field_path is not None else None
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, default=_json_default) + "\n")
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    raise TypeError(f"not JSON serialisable: {type(obj)!r}")
