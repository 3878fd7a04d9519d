"""Optimal fractional Gagliardo-Nirenberg constant.

``C(s, alpha)`` is the supremum of the Weinstein quotient::

    Q(u) = ||u||_alpha / (||(-Delta)^(s/2) u||_2^th ||u||_2^(1-th))

over nonzero radial fields, with ``th = 3 (alpha - 2) / (2 s alpha)``. The
quotient is invariant under ``u -> k u`` and under dilations, so the ascent
runs on ``log Q`` and renormalises the mass after each step.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NonConvergence, ParameterError
from .radial import (
    CORE_FRACTION,
    RadialField,
    RadialGrid,
    apply_fractional_laplacian,
    apply_multiplier,
    lp_norm,
    mass_norm_sq,
    riesz_seminorm_sq,
)
from .variational import sobolev_exponent, theta

log = logging.getLogger(__name__)

REL_TOL = 1e-8
WINDOW = 10
MAX_ITER = 10_000


def weinstein_quotient(u: RadialField, s: float, alpha: float) -> float:
    """``||u||_alpha / (A^(th/2) M^((1-th)/2))``."""
    th = theta(s, alpha)
    M = mass_norm_sq(u)
    if M == 0.0:
        raise ValueError("Weinstein quotient is undefined for the zero field")
    A = riesz_seminorm_sq(u, s)
    La = lp_norm(u, alpha)
    return La ** (1.0 / alpha) / (A ** (0.5 * th) * M ** (0.5 * (1.0 - th)))


def _log_quotient(La, A, M, alpha, th):
    return math.log(La) / alpha - 0.5 * th * math.log(A) - 0.5 * (1.0 - th) * math.log(M)


@dataclass
class GNResult:
    """Computed constant and the field that attains it."""

    constant: float
    maximizer: RadialField
    quotient_history: list = field(default_factory=list)
    converged: bool = False
    s: float = float("nan")
    alpha: float = float("nan")
    iterations: int = 0

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "alpha": self.alpha,
            "constant": self.constant,
            "converged": self.converged,
            "iterations": self.iterations,
            "r_max": self.maximizer.grid.r_max,
            "n": self.maximizer.grid.n,
        }


def _seed(grid: RadialGrid, seed) -> RadialField:
    width = CORE_FRACTION * grid.r_max
    if seed is None or seed == "gaussian":
        u = RadialField.gaussian(grid, width=width)
    elif seed == "exponential":
        u = RadialField(grid, np.exp(-grid.r / width))
    elif isinstance(seed, RadialField):
        u = seed
    else:
        raise ValueError(f"unknown seed {seed!r}; use 'gaussian', 'exponential' or a RadialField")
    return u * (1.0 / math.sqrt(mass_norm_sq(u)))


def optimal_gn_constant(
    s: float,
    alpha: float,
    grid: RadialGrid | None = None,
    *,
    seed="gaussian",
    max_iter: int = MAX_ITER,
    rel_tol: float = REL_TOL,
    raise_on_failure: bool = False,
) -> GNResult:
    """Maximise the Weinstein quotient by preconditioned normalised ascent.

    The ascent direction is the weighted-L^2 gradient of ``log Q`` divided
    mode by mode by ``th rho^(2s)/A + (1-th)/M``, the diagonal of the
    quadratic part of the Hessian. Steps are backtracked until ``log Q``
    increases (Armijo constant 1e-4), so the history is non-decreasing.
    Stops once ``Q`` changes by less than ``rel_tol`` relative over
    ``WINDOW`` iterations.
    """
    if not 2.0 < alpha < sobolev_exponent(s):
        raise ParameterError(
            f"alpha must satisfy 2 < alpha < 2*_s = {sobolev_exponent(s):.6g}, got {alpha}"
        )
    th = theta(s, alpha)
    grid = grid or RadialGrid()
    u = _seed(grid, seed)
    w = grid.weights
    rho2s = grid.rho ** (2.0 * s)

    def evaluate(v: RadialField):
        M = mass_norm_sq(v)
        Lv = apply_fractional_laplacian(v, s)
        A = float(np.dot(w, v.values * Lv.values))
        La = lp_norm(v, alpha)
        return _log_quotient(La, A, M, alpha, th), (M, A, La, Lv)

    logq, (M, A, La, Lv) = evaluate(u)
    history = [math.exp(logq)]
    eta = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        a = np.abs(u.values)
        grad = a ** (alpha - 2.0) * u.values / La - th * Lv.values / A - (1.0 - th) * u.values / M
        d = apply_multiplier(RadialField(grid, grad), 1.0 / (th * rho2s / A + (1.0 - th) / M))
        slope = float(np.dot(w, grad * d.values))
        if slope <= 0.0:
            converged = True
            break
        while True:
            trial = u + d * eta
            tM = mass_norm_sq(trial)
            if tM > 0.0:
                trial = trial * (1.0 / math.sqrt(tM))
                tlogq, tstate = evaluate(trial)
                if tlogq >= logq + 1e-4 * eta * slope:
                    break
            eta *= 0.5
            if eta < 1e-14:
                break
        if eta < 1e-14:
            converged = True  # no ascent direction left at round-off
            break
        u, logq, (M, A, La, Lv) = trial, tlogq, tstate
        history.append(math.exp(logq))
        eta = min(2.0 * eta, 1e3)
        if len(history) > WINDOW:
            old = history[-1 - WINDOW]
            if abs(history[-1] - old) <= rel_tol * history[-1]:
                converged = True
                break

    result = GNResult(
        constant=max(history),
        maximizer=u,
        quotient_history=history,
        converged=converged,
        s=s,
        alpha=alpha,
        iterations=it,
    )
    log.info("C(%g, %g) = %.12g after %d iterations (converged=%s)", s, alpha, result.constant, it, converged)
    if not converged and raise_on_failure:
        raise NonConvergence(f"G-N ascent for (s={s}, alpha={alpha}) did not converge", result)
    return result


# --------------------------------------------------------------------- cache


def cache_key(s: float, alpha: float, grid: RadialGrid) -> str:
    return f"({s!r},{alpha!r},{grid.n},{grid.r_max!r})"


def default_cache_path() -> Path:
    env = os.environ.get("FRACKIRCHHOFF_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "frackirchhoff" / "gn_constants.json"


class GNCache:
    """JSON map from ``"(s,alpha,n,r_max)"`` keys to constants."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else default_cache_path()

    def load(self) -> dict:
        try:
            return json.loads(self.path.read_text())
        except (FileNotFoundError, json.JSONDecodeError):
            return {}

    def get(self, s, alpha, grid) -> float | None:
        return self.load().get(cache_key(s, alpha, grid))

    def put(self, s, alpha, grid, constant: float) -> None:
        data = self.load()
        data[cache_key(s, alpha, grid)] = constant
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        tmp.replace(self.path)


def gn_constant(s: float, alpha: float, grid: RadialGrid | None = None, cache: GNCache | None = None) -> float:
    """``C(s, alpha)``, read from ``cache`` when present and stored after computing.

    Only converged results are cached.
    """
    grid = grid or RadialGrid()
    if cache is not None:
        hit = cache.get(s, alpha, grid)
        if hit is not None:
            return float(hit)
    res = optimal_gn_constant(s, alpha, grid)
    if cache is not None and res.converged:
        cache.put(s, alpha, grid, res.constant)
    return res.constant
