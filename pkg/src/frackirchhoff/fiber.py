"""One-dimensional analysis along the dilation fibers.

For a field with moments ``(A, c^2, L_q, L_p)`` the energy of the dilated
field ``tau * u`` is the exponential sum::

    J(tau) = a/2 A e^{2s tau} + b/4 A^2 e^{4s tau}
             - mu/q L_q e^{3 tau (q/2 - 1)} - 1/p L_p e^{3 tau (p/2 - 1)}

and ``J'(tau) = s P_mu(tau * u)``. With ``t = e^{s tau}`` this is the scalar
function ``f(t) = a t^2 + b t^4 - c t^p - d t^q`` handled by ``ScalarQuartic``.

Critical points are located on ``g(tau) = J'(tau) e^{-2 s tau}``, which has
the same sign as ``J'`` and is unimodal (increasing, then decreasing) in both
regimes. Its peak is found first and inserted into the bracket scan, so a
pair of close roots can never fall between two scan points.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BracketNotFound, ConditionViolated, RootsNotFound, RegimeError
from .radial import Moments
from .variational import ProblemParams, Regime, theta

SCAN_POINTS = 512
T_RANGE = (1e-6, 1e6)
ROOT_TOL = 1e-12
MAXITER = 200


@dataclass(frozen=True)
class ExpSum:
    """``f(x) = sum_j coef_j exp(expo_j x)``."""

    coef: tuple
    expo: tuple

    def __call__(self, x: float, order: int = 0) -> float:
        return _kernels.fiber_eval(self.coef, self.expo, order, float(x))

    def sample(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        for c, e in zip(self.coef, self.expo):
            if c != 0.0:
                out += c * np.exp(e * xs)
        return out

    def derivative(self) -> "ExpSum":
        return ExpSum(
            tuple(c * e for c, e in zip(self.coef, self.expo)), self.expo
        )

    def shifted(self, k: float) -> "ExpSum":
        """``f(x) exp(k x)``."""
        return ExpSum(self.coef, tuple(e + k for e in self.expo))

    def root(self, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
        x, _ = _kernels.fiber_root(self.coef, self.expo, 0, float(lo), float(hi), tol, MAXITER)
        return x


def _peak(g: ExpSum, lo: float, hi: float) -> float:
    """Maximiser of a unimodal exponential sum, widening ``[lo, hi]`` if needed."""
    dg = g.derivative()
    lo, hi = _widen(dg, lo, hi)
    dlo, dhi = dg(lo), dg(hi)
    if dlo <= 0.0:
        return lo
    if dhi >= 0.0:
        return hi
    return dg.root(lo, hi)


def _tau_limit(f: ExpSum) -> float:
    """Largest ``|tau|`` at which every term stays well inside double range."""
    emax = max(abs(e) for c, e in zip(f.coef, f.expo) if c != 0.0)
    return 600.0 / emax if emax > 0 else math.inf


def _widen(dg: ExpSum, lo: float, hi: float) -> tuple[float, float]:
    """Push ``lo`` left while ``dg(lo) <= 0`` and ``hi`` right while ``dg(hi) >= 0``."""
    lim = _tau_limit(dg)
    width = hi - lo
    while dg(lo) <= 0.0 and lo > -lim:
        lo = max(lo - width, -lim)
        width *= 2.0
    width = hi - lo
    while dg(hi) >= 0.0 and hi < lim:
        hi = min(hi + width, lim)
        width *= 2.0
    return lo, hi


def _outward(f: ExpSum, x0: float, direction: float) -> tuple[float, float]:
    """Bracket the first sign change of ``f`` from ``x0`` (where ``f > 0``)."""
    lim = _tau_limit(f)
    step = 1.0
    x = x0 + direction * step
    while f(x) > 0.0:
        if abs(x) >= lim:
            raise BracketNotFound("no sign change of the fiber derivative in double range")
        step *= 2.0
        x = max(min(x0 + direction * step, lim), -lim)
    return (x, x0) if direction < 0 else (x0, x)


def _sign_changes(xs: np.ndarray, vals: np.ndarray) -> list[tuple[float, float]]:
    pos = vals > 0.0
    idx = np.nonzero(pos[1:] != pos[:-1])[0]
    return [(float(xs[i]), float(xs[i + 1])) for i in idx]


# ------------------------------------------------------------------ profiles


@dataclass(frozen=True)
class FiberProfile:
    """Coefficients and exponents of ``J(tau)``; all coefficients ``>= 0``.

    ``exps`` are the growth rates ``(2s, 4s, 3(q/2-1), 3(p/2-1))`` of the
    four terms in ``tau``.
    """

    coeff_2: float
    coeff_4: float
    coeff_q: float
    coeff_p: float
    exps: tuple

    @property
    def s(self) -> float:
        return self.exps[0] / 2.0

    @property
    def expsum(self) -> ExpSum:
        return ExpSum(
            (self.coeff_2, self.coeff_4, -self.coeff_q, -self.coeff_p), tuple(self.exps)
        )

    def value(self, tau: float) -> float:
        return self.expsum(tau)

    def derivative(self, tau: float, order: int = 1) -> float:
        return self.expsum(tau, order)

    def values(self, taus) -> np.ndarray:
        return self.expsum.sample(taus)

    @property
    def degenerate(self) -> bool:
        return self.coeff_q == 0.0 and self.coeff_p == 0.0

    def as_dict(self) -> dict:
        return {
            "coeff_2": self.coeff_2,
            "coeff_4": self.coeff_4,
            "coeff_q": self.coeff_q,
            "coeff_p": self.coeff_p,
            "exps": list(self.exps),
        }


def fiber_value(profile: FiberProfile, tau: float) -> float:
    return profile.value(tau)


def fiber_derivative(profile: FiberProfile, tau: float) -> float:
    """Analytic ``J'(tau)``."""
    return profile.derivative(tau, 1)


def fiber_from_moments(params: ProblemParams, m: Moments) -> FiberProfile:
    s, q, p = params.s, params.q, params.p
    A = m.seminorm_sq
    return FiberProfile(
        0.5 * params.a * A,
        0.25 * params.b * A * A,
        params.mu / q * m.lq,
        m.lp / p,
        (2.0 * s, 4.0 * s, 3.0 * (q / 2.0 - 1.0), 3.0 * (p / 2.0 - 1.0)),
    )


@dataclass(frozen=True)
class ScalarQuartic:
    """``f(t) = a t^2 + b t^4 - c t^p - d t^q`` for ``t >= 0``."""

    a_hat: float
    b_hat: float
    c_hat: float
    d_hat: float
    p_hat: float
    q_hat: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (
            self.a_hat * t**2
            + self.b_hat * t**4
            - self.c_hat * t**self.p_hat
            - self.d_hat * t**self.q_hat
        )

    def is_mixed(self) -> bool:
        return self.p_hat > 4.0 and 0.0 < self.q_hat < 2.0

    def is_supercritical(self) -> bool:
        return self.p_hat > 4.0 and self.q_hat > 4.0

    def to_profile(self) -> FiberProfile:
        """Fiber in the variable ``tau = log t``."""
        return FiberProfile(
            self.a_hat, self.b_hat, self.d_hat, self.c_hat, (2.0, 4.0, self.q_hat, self.p_hat)
        )

    @classmethod
    def from_profile(cls, profile: FiberProfile) -> "ScalarQuartic":
        s = profile.s
        return cls(
            profile.coeff_2,
            profile.coeff_4,
            profile.coeff_p,
            profile.coeff_q,
            profile.exps[3] / s,
            profile.exps[2] / s,
        )


# ------------------------------------------------------ critical structure


class CriticalKind(str, enum.Enum):
    TWO_CRITICAL = "TwoCritical"
    ONE_CRITICAL = "OneCritical"


@dataclass(frozen=True)
class CriticalStructure:
    """Critical points and zeros of ``J``.

    ``TwoCritical``: local minimum ``s_u`` at a negative level, global maximum
    ``t_u`` at a positive level, zeros ``c_u < d_u`` interleaved as
    ``s_u < c_u < t_u < d_u``. ``OneCritical``: a single maximum ``t_u``.
    The pure Kirchhoff profile (no nonlinear terms) is reported as
    ``OneCritical`` with ``t_u = +inf``.
    """

    kind: CriticalKind
    t_u: float
    level_max: float
    s_u: float | None = None
    c_u: float | None = None
    d_u: float | None = None
    level_min: float | None = None

    @property
    def n_critical(self) -> int:
        if not math.isfinite(self.t_u):
            return 0
        return 2 if self.kind is CriticalKind.TWO_CRITICAL else 1

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "s_u": self.s_u,
            "t_u": self.t_u,
            "c_u": self.c_u,
            "d_u": self.d_u,
            "level_min": self.level_min,
            "level_max": self.level_max,
        }


def _tau_range(s: float) -> tuple[float, float]:
    return math.log(T_RANGE[0]) / s, math.log(T_RANGE[1]) / s


def classify_fiber(
    profile: FiberProfile, regime: Regime | str, *, strict: bool = True
) -> CriticalStructure:
    """Critical points of ``J`` by bracket scan plus safeguarded Newton.

    In the mixed regime the two-critical-point condition is checked first
    when ``strict`` (``ConditionViolated`` if it fails). A profile without the
    ``mu`` term has one critical point whatever the regime.
    """
    regime = Regime(regime)
    if regime is Regime.UNSUPPORTED:
        raise RegimeError("fiber classification needs the mixed or supercritical regime")
    if profile.degenerate:
        return CriticalStructure(CriticalKind.ONE_CRITICAL, math.inf, math.inf)
    s = profile.s
    two = regime is Regime.MIXED and profile.coeff_q > 0.0
    if two and strict and not lemma28_condition(ScalarQuartic.from_profile(profile)):
        raise ConditionViolated("fiber fails the two-critical-point condition")

    J = profile.expsum
    g = J.derivative().shifted(-2.0 * s)
    lo, hi = _tau_range(s)
    peak = _peak(g, lo, hi)
    xs = np.union1d(np.linspace(lo, hi, SCAN_POINTS), [peak])
    brackets = _sign_changes(xs, g.sample(xs))

    if two:
        if g(peak) <= 0.0:
            raise ConditionViolated("fiber derivative has no positive excursion (double root or none)")
        if len(brackets) != 2:
            # roots beyond the scan window: walk out from the peak
            brackets = [_outward(g, peak, -1.0), _outward(g, peak, 1.0)]
        s_u = g.root(*brackets[0])
        t_u = g.root(*brackets[1])
        jmin, jmax = J(s_u), J(t_u)
        if not (jmin < 0.0 < jmax):
            raise ConditionViolated(
                f"critical levels J(s_u)={jmin:.3e}, J(t_u)={jmax:.3e} do not straddle zero"
            )
        k = J.shifted(-2.0 * s)
        c_u = k.root(s_u, t_u)
        d_u = k.root(*_outward(k, t_u, 1.0))
        return CriticalStructure(
            CriticalKind.TWO_CRITICAL, t_u, jmax, s_u=s_u, c_u=c_u, d_u=d_u, level_min=jmin
        )

    if len(brackets) != 1:
        if g(peak) <= 0.0:
            raise BracketNotFound("fiber derivative never changes sign")
        brackets = [_outward(g, peak, 1.0)]
    t_u = g.root(*brackets[0])
    return CriticalStructure(CriticalKind.ONE_CRITICAL, t_u, J(t_u))


# ------------------------------------------------------ scalar inequalities


def lemma28_condition(sq: ScalarQuartic) -> bool:
    """Sufficient condition for a negative local minimum and positive global maximum.

    ``[K^((4-q)/(p-4)) - K^((p-q)/(p-4))] * [a/d (b/c)^((2-q)/(p-4))
    + b^((p-q)/(p-4)) / (d c^((4-q)/(p-4)))] > 1`` with
    ``K = 8(4-q) / (p (p-2) (p-q))`` (hats dropped).
    """
    p, q = sq.p_hat, sq.q_hat
    if not (p > 4.0 and 0.0 < q < 2.0):
        raise ValueError(f"condition needs p_hat > 4 and q_hat in (0, 2), got {p}, {q}")
    K = 8.0 * (4.0 - q) / (p * (p - 2.0) * (p - q))
    e1 = (2.0 - q) / (p - 4.0)
    e2 = (p - q) / (p - 4.0)
    e3 = (4.0 - q) / (p - 4.0)
    left = K**e3 - K**e2
    if left <= 0.0:
        return False
    # the right factor in logs; c, d -> 0 sends it to +inf
    la, lb, lc, ld = (math.log(x) if x > 0 else -math.inf for x in (sq.a_hat, sq.b_hat, sq.c_hat, sq.d_hat))
    with np.errstate(over="ignore"):
        t1 = la - ld + e1 * (lb - lc)
        t2 = e2 * lb - ld - e3 * lc
        log_right = np.logaddexp(t1, t2)
    return bool(math.log(left) + log_right > 0.0)


def envelope(params: ProblemParams, C_q: float, C_p: float) -> ScalarQuartic:
    """Lower bound ``h(t)`` of ``E_mu`` on the mass sphere as a scalar quartic."""
    c, q, p = params.c, params.q, params.p
    tq, tp = params.theta_q, params.theta_p
    return ScalarQuartic(
        0.5 * params.a,
        0.25 * params.b,
        C_p**p / p * c ** (p * (1.0 - tp)),
        params.mu * C_q**q / q * c ** (q * (1.0 - tq)),
        p * tp,
        q * tq,
    )


def h_function(params: ProblemParams, C_q: float, C_p: float):
    """Callable ``h(t)``."""
    return envelope(params, C_q, C_p)


def h_roots(
    params: ProblemParams,
    C_q: float,
    C_p: float,
    grid_points: int = 1024,
    *,
    check_threshold: bool = True,
) -> tuple[float, float]:
    """Zeros ``R0 < R1`` of ``h``; ``h > 0`` exactly on ``(R0, R1)``.

    Works on ``k(x) = h(e^x) e^{-2x}``, which is unimodal. The peak is found,
    the bracket is widened until ``k < 0`` on both sides, a log grid of
    ``grid_points`` samples is scanned and each sign change refined.

    ``mu_2`` is only sufficient for positivity of ``h``, so the zeros usually
    persist somewhat above it. With ``check_threshold`` (the default) any
    ``mu >= mu_2`` is rejected; pass ``False`` to explore beyond it.
    """
    if params.regime() is not Regime.MIXED:
        raise RegimeError("h(t) has two zeros only in the mixed regime")
    if params.mu <= 0.0:
        raise RootsNotFound("R0 collapses to 0 when mu = 0")
    if check_threshold:
        mu2 = mu_thresholds(params, C_q, C_p)[1]
        if params.mu >= mu2:
            raise RootsNotFound(f"mu={params.mu:g} is not below the threshold mu_2={mu2:g}")
    sq = envelope(params, C_q, C_p)
    k = ExpSum(
        (sq.a_hat, sq.b_hat, -sq.c_hat, -sq.d_hat),
        (0.0, 2.0, sq.p_hat - 2.0, sq.q_hat - 2.0),
    )
    # balance points of the dominant pairs give a starting window
    x0 = math.log(sq.d_hat / sq.a_hat) / (2.0 - sq.q_hat)
    x1 = math.log(sq.b_hat / sq.c_hat) / (sq.p_hat - 4.0)
    lo, hi = min(x0, x1) - 5.0, max(x0, x1) + 5.0
    while k(lo, 1) <= 0.0:
        lo -= 2.0 * (hi - lo)
    while k(hi, 1) >= 0.0:
        hi += 2.0 * (hi - lo)
    xp = _peak(k, lo, hi)
    if k(xp) <= 0.0:
        raise RootsNotFound(
            f"h(t) <= 0 for all t > 0 at mu={params.mu:g}"
        )
    step = 1.0
    while k(xp - step) >= 0.0:
        step *= 2.0
    lo = xp - step
    step = 1.0
    while k(xp + step) >= 0.0:
        step *= 2.0
    hi = xp + step
    xs = np.union1d(np.linspace(lo, hi, grid_points), [xp])
    br = _sign_changes(xs, k.sample(xs))
    if len(br) != 2:
        raise RootsNotFound(f"expected two zeros of h, found {len(br)}")
    return math.exp(k.root(*br[0])), math.exp(k.root(*br[1]))


def mu_thresholds(params: ProblemParams, C_q: float, C_p: float) -> tuple[float, float]:
    """The two explicit upper bounds on ``mu`` of the mixed regime.

    ``mu_1`` rules out degenerate points on the Pohozaev manifold and
    ``mu_2`` makes ``h`` positive somewhere.
    """
    a, b, c, q, p = params.a, params.b, params.c, params.q, params.p
    tq, tp = params.theta_q, params.theta_p
    if not (q * tq < 2.0 and p * tp > 4.0):
        raise RegimeError("thresholds are defined for q th_q < 2 < 4 < p th_p")
    qt, pt = q * tq, p * tp
    Cq, Cp = C_q**q, C_p**p
    e4 = (4.0 - qt) / (pt - 4.0)
    e2 = (2.0 - qt) / (pt - 4.0)
    eqp = (pt - qt) / (pt - 4.0)
    cexp4 = q * (1.0 - tq) + p * (1.0 - tp) * e4
    cexp2 = q * (1.0 - tq) + p * (1.0 - tp) * e2

    mu1 = (
        c ** (-cexp4)
        * (q * (pt - 4.0) * b / (4.0 * (pt - qt) * Cq))
        * (p * (4.0 - qt) * b / (4.0 * (pt - qt) * Cp)) ** e4
    )

    K = 8.0 * (4.0 - qt) / (pt * (pt - 2.0) * (pt - qt))
    A_pqs = K**e4 - K**eqp
    mu2 = (q * A_pqs / Cq) * (
        0.5 * a * (b * p / (4.0 * Cp)) ** e2 / c**cexp2
        + (b / 4.0) ** eqp * (p / Cp) ** e4 / c**cexp4
    )
    return mu1, mu2


def threshold_factor(params: ProblemParams) -> float:
    """``(q th_q / 4)^(p th_p - 4) (p th_p / 4)^(4 - q th_q)``; claimed to be < 1."""
    qt = params.q * params.theta_q
    pt = params.p * params.theta_p
    return (qt / 4.0) ** (pt - 4.0) * (pt / 4.0) ** (4.0 - qt)


__all__ = [
    "ExpSum",
    "FiberProfile",
    "ScalarQuartic",
    "CriticalKind",
    "CriticalStructure",
    "fiber_from_moments",
    "fiber_value",
    "fiber_derivative",
    "classify_fiber",
    "lemma28_condition",
    "envelope",
    "h_function",
    "h_roots",
    "mu_thresholds",
    "threshold_factor",
    "theta",
]
