"""Constrained solvers: local minimiser, mountain-pass state, mu = 0 ground state.

All three minimise a reduced functional on the mass sphere. For a field
``u`` the fiber map ``tau -> E_mu(tau * u)`` is classified, ``u`` is moved to
the relevant critical point (``s_u`` for the local minimiser, ``t_u`` for the
mountain-pass level) and one projected descent step is taken there. The
dilation is applied exactly by moving the grid (:func:`~.radial.rescale`), so
every iterate sits on the Pohozaev manifold to root-finding accuracy and the
gradient of the reduced functional is the ordinary constrained gradient.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import FracKirchhoffError, NonConvergence, RegimeError
from .fiber import CriticalKind, classify_fiber, fiber_from_moments, h_roots, mu_thresholds
from .radial import (
    CORE_FRACTION,
    RadialField,
    RadialGrid,
    apply_multiplier,
    hs_distance,
    mass_norm_sq,
    moments,
    rescale,
)
from .variational import (
    TOL_EL,
    TOL_P,
    PohozaevClass,
    ProblemParams,
    Regime,
    SolveReport,
    classify_pohozaev,
    el_residual,
    energy,
    l2_critical_exponent,
    lambda_from_moments,
    multiplier_estimate,
    pohozaev_identity_residual,
    relative_pohozaev,
    _el_operator,
)

log = logging.getLogger(__name__)

STOP_TOL = 1e-6
MAX_ITER = 20_000
ARMIJO = 1e-4
BACKTRACK = 0.5
ETA0 = 1e-2
ETA_MAX = 1e2
SHELL_FRACTION = 0.05


# ----------------------------------------------------------------- helpers


def _normalize(u: RadialField, c: float) -> RadialField:
    return u * (c / math.sqrt(mass_norm_sq(u)))


def _project_to_fiber(params: ProblemParams, u: RadialField, branch: str, regime: Regime):
    """Move ``u`` to the chosen fiber critical point; return ``(v, level, tau)``."""
    m = moments(u, params.s, params.q, params.p)
    cs = classify_fiber(fiber_from_moments(params, m), regime, strict=False)
    if branch == "min":
        if cs.kind is not CriticalKind.TWO_CRITICAL:
            raise FracKirchhoffError("fiber has no local minimum")
        tau, level = cs.s_u, cs.level_min
    else:
        if not math.isfinite(cs.t_u):
            raise FracKirchhoffError("fiber has no maximum")
        tau, level = cs.t_u, cs.level_max
    v = rescale(u, tau)
    return v, level, tau


def _direction(params: ProblemParams, v: RadialField, precondition: bool):
    """Projected (optionally preconditioned) gradient at ``v`` and its pieces.

    The preconditioner is the linear part ``(a + bA) rho^(2s) - lambda`` of
    the Hessian, applied mode by mode; the direction is then made
    L^2-orthogonal to ``v`` so the step is tangent to the mass sphere.
    """
    kirchhoff, nonlin, A = _el_operator(params, v)
    G = kirchhoff - nonlin
    w = v.grid.weights
    vv = float(np.dot(w, v.values * v.values))
    lam = float(np.dot(w, G * v.values)) / vv
    r = G - lam * v.values
    if precondition:
        k = params.a + params.b * A
        sigma = max(-lam, 1e-12 * k * v.grid.rho[0] ** (2.0 * params.s))
        inv = 1.0 / (k * v.grid.rho ** (2.0 * params.s) + sigma)
        d = apply_multiplier(RadialField(v.grid, r), inv).values
        d = d - float(np.dot(w, d * v.values)) / vv * v.values
    else:
        d = r
    slope = float(np.dot(w, r * d))
    return d, slope, lam


def _finish(params, v, level, it, converged, kind, regime, history, diagnostics, tol_el, tol_p):
    m = moments(v, params.s, params.q, params.p)
    lam = multiplier_estimate(params, v)
    rep = SolveReport(
        field=v,
        lam=lam,
        level=level,
        el_residual=el_residual(params, v, lam),
        pohozaev_residual=relative_pohozaev(params, m),
        classification=classify_pohozaev(params, m, tol_p),
        iterations=it,
        converged=converged,
        params=params,
        kind=kind,
        identity_residual=pohozaev_identity_residual(params, v, lam),
        lambda_pohozaev=lambda_from_moments(params, m),
        tol_el=tol_el,
        tol_p=tol_p,
        moments=m,
        history=history,
        diagnostics=dict(diagnostics, energy=energy(params, m), regime=regime.value),
    )
    return rep


def _reduced_descent(
    params: ProblemParams,
    seed: RadialField,
    branch: str,
    regime: Regime,
    kind: str,
    *,
    tol: float,
    tol_el: float,
    tol_p: float,
    max_iter: int,
    precondition: bool,
    raise_on_failure: bool,
    shell: float | None = None,
    callback=None,
) -> SolveReport:
    """Minimise ``u -> E_mu(tau_u * u)`` on the mass sphere by projected descent."""
    c = params.c
    u = _normalize(seed, c)
    v, level, tau = _project_to_fiber(params, u, branch, regime)
    eta = ETA0
    history = []
    shell_hits = 0
    converged = False
    it = 0
    for it in range(max_iter + 1):
        d, slope, lam = _direction(params, v, precondition)
        m = moments(v, params.s, params.q, params.p)
        res = el_residual(params, v, lam)
        relp = relative_pohozaev(params, m)
        history.append((it, level, res, relp, lam))
        if callback is not None:
            callback(it, level, res, relp)
        if max(res, relp) < tol:
            converged = True
            break
        if it == max_iter:
            break
        while True:
            trial = _normalize(v.with_values(v.values - eta * d), c)
            try:
                tv, tlevel, ttau = _project_to_fiber(params, trial, branch, regime)
                ok = tlevel <= level - ARMIJO * eta * slope
            except FracKirchhoffError:
                ok = False
            if ok:
                break
            eta *= BACKTRACK
            if eta < 1e-16:
                break
        if eta < 1e-16:
            # no decrease left at round-off: stationary to working precision
            converged = max(res, relp) < max(tol_el, tol_p)
            break
        if shell is not None and math.sqrt(moments(trial, params.s, params.q, params.p).seminorm_sq) >= shell:
            shell_hits += 1
        v, level = tv, tlevel
        eta = min(2.0 * eta, ETA_MAX)

    diagnostics = {"shell_hits": shell_hits, "r_max": v.grid.r_max, "final_eta": eta}
    rep = _finish(params, v, level, it, converged, kind, regime, history, diagnostics, tol_el, tol_p)
    log.info(
        "%s: level=%.15g lambda=%.6g el=%.2e P=%.2e iter=%d converged=%s",
        kind, rep.level, rep.lam, rep.el_residual, rep.pohozaev_residual, it, converged,
    )
    if not converged and raise_on_failure:
        raise NonConvergence(f"{kind} solve stopped after {it} iterations", rep)
    return rep


def default_seed(grid: RadialGrid | None, c: float) -> RadialField:
    """Gaussian of mass ``c`` whose width is ``CORE_FRACTION * r_max``.

    Solutions decay algebraically, and only after several multiples of the
    decay length set by ``lambda``, so the core must occupy a small part of
    the box: a wide seed leaves a visible tail at ``r_max`` and the discrete
    minimiser then drifts towards larger boxes.
    """
    grid = grid if grid is not None else RadialGrid()
    return RadialField.gaussian(grid, width=CORE_FRACTION * grid.r_max, mass=c)


# ------------------------------------------------------------------ solvers


def local_min_window(params: ProblemParams, C_q: float, C_p: float) -> dict:
    """``mu_1, mu_2, R0, R1`` for a mixed-regime parameter set."""
    if params.regime() is not Regime.MIXED:
        raise RegimeError(
            "the local minimiser exists only in the mixed regime "
            f"(q < 2+4s/3 and p > 2+8s/3), got q={params.q}, p={params.p}, s={params.s}"
        )
    mu1, mu2 = mu_thresholds(params, C_q, C_p)
    if not 0.0 < params.mu < min(mu1, mu2):
        raise RegimeError(f"need 0 < mu < min(mu_1, mu_2) = {min(mu1, mu2):.6g}, got mu={params.mu}")
    R0, R1 = h_roots(params, C_q, C_p)
    return {"mu_1": mu1, "mu_2": mu2, "R0": R0, "R1": R1}


def solve_local_min(
    params: ProblemParams,
    C_q: float,
    C_p: float,
    *,
    seed: RadialField | None = None,
    grid: RadialGrid | None = None,
    tol: float = STOP_TOL,
    tol_el: float = TOL_EL,
    tol_p: float = TOL_P,
    max_iter: int = MAX_ITER,
    precondition: bool = True,
    raise_on_failure: bool = True,
    callback=None,
) -> SolveReport:
    """Local minimiser of ``E_mu`` on the mass sphere at a negative level.

    The default seed is a Gaussian of mass ``c`` dilated so its seminorm is
    ``R0 / 2``.
    """
    window = local_min_window(params, C_q, C_p)
    R0 = window["R0"]
    if seed is None:
        g = default_seed(grid, params.c)
        A = moments(g, params.s, params.q, params.p).seminorm_sq
        seed = rescale(g, math.log(0.5 * R0 / math.sqrt(A)) / params.s)
    rho = SHELL_FRACTION * R0
    rep = _reduced_descent(
        params, seed, "min", Regime.MIXED, "local_min",
        tol=tol, tol_el=tol_el, tol_p=tol_p, max_iter=max_iter,
        precondition=precondition, raise_on_failure=False, shell=R0 - rho, callback=callback,
    )
    rep.diagnostics.update(window, shell_width=rho)
    if not rep.converged and raise_on_failure:
        raise NonConvergence(f"local_min solve stopped after {rep.iterations} iterations", rep)
    return rep


def solve_mountain_pass(
    params: ProblemParams,
    C_q: float | None = None,
    C_p: float | None = None,
    *,
    seed: RadialField | None = None,
    grid: RadialGrid | None = None,
    tol: float = STOP_TOL,
    tol_el: float = TOL_EL,
    tol_p: float = TOL_P,
    max_iter: int = MAX_ITER,
    precondition: bool = True,
    raise_on_failure: bool = True,
    callback=None,
) -> SolveReport:
    """Minimiser of ``u -> max_tau E_mu(tau * u)``: the mountain-pass state.

    In the mixed regime the admissible window for ``mu`` is checked when the
    two Gagliardo-Nirenberg constants are supplied.
    """
    regime = params.regime()
    if params.mu <= 0.0:
        raise RegimeError("mu must be positive; use solve_mu_zero for mu = 0")
    if regime is Regime.UNSUPPORTED:
        raise RegimeError(
            "mountain-pass solve needs the mixed or the L2-supercritical regime; "
            f"got q={params.q}, p={params.p}, s={params.s}"
        )
    diagnostics = {}
    if regime is Regime.MIXED and C_q is not None and C_p is not None:
        diagnostics = local_min_window(params, C_q, C_p)
    if seed is None:
        seed = default_seed(grid, params.c)
    rep = _reduced_descent(
        params, seed, "max", regime, "mountain_pass",
        tol=tol, tol_el=tol_el, tol_p=tol_p, max_iter=max_iter,
        precondition=precondition, raise_on_failure=False, callback=callback,
    )
    rep.diagnostics.update(diagnostics)
    if not rep.converged and raise_on_failure:
        raise NonConvergence(f"mountain_pass solve stopped after {rep.iterations} iterations", rep)
    return rep


def solve_mu_zero(
    params: ProblemParams,
    *,
    seed: RadialField | None = None,
    grid: RadialGrid | None = None,
    tol: float = STOP_TOL,
    tol_el: float = TOL_EL,
    tol_p: float = TOL_P,
    max_iter: int = MAX_ITER,
    precondition: bool = True,
    raise_on_failure: bool = True,
    callback=None,
) -> SolveReport:
    """Ground state ``u_0`` of the problem without the ``mu`` term."""
    crit = l2_critical_exponent(params.s)
    if not params.p > crit:
        raise RegimeError(f"p must exceed 2+8s/3 = {crit:.6g} for the mu = 0 ground state, got p={params.p}")
    params = params.with_mu(0.0)
    if seed is None:
        seed = default_seed(grid, params.c)
    rep = _reduced_descent(
        params, seed, "max", Regime.SUPERCRITICAL, "mu_zero",
        tol=tol, tol_el=tol_el, tol_p=tol_p, max_iter=max_iter,
        precondition=precondition, raise_on_failure=False, callback=callback,
    )
    if not rep.converged and raise_on_failure:
        raise NonConvergence(f"mu_zero solve stopped after {rep.iterations} iterations", rep)
    return rep


# ------------------------------------------------------------------- sweeps


@dataclass
class SweepRow:
    """One rung of an asymptotic sweep; ``nan`` marks quantities not computed."""

    mu: float
    m_level: float
    sigma_level: float
    seminorm_local: float
    lambda_local: float
    lambda_mp: float
    h_distance: float
    status: str = "ok"


SWEEP_FIELDS = [f for f in SweepRow.__dataclass_fields__]


def default_ladder(mu_start: float, rungs: int = 12, factor: float = 0.5) -> list[float]:
    """Geometric ladder ``mu_start * factor^k``, ``k = 0..rungs-1``."""
    if not (mu_start > 0 and 0 < factor < 1 and rungs >= 1):
        raise ValueError("ladder needs mu_start > 0, 0 < factor < 1 and rungs >= 1")
    return [mu_start * factor**k for k in range(rungs)]


def asymptotic_sweep(
    params: ProblemParams,
    mu_ladder,
    C_q: float | None = None,
    C_p: float | None = None,
    *,
    grid: RadialGrid | None = None,
    u0: SolveReport | None = None,
    tol: float = STOP_TOL,
    max_iter: int = MAX_ITER,
    reports: dict | None = None,
) -> list[SweepRow]:
    """Solve along a strictly decreasing ``mu`` ladder with warm starts.

    The local minimiser is computed only in the mixed regime (needs ``C_q``
    and ``C_p``). A failed rung is recorded in ``status`` and the next rung
    restarts from fresh seeds. If ``reports`` is a dict it receives the
    ``SolveReport`` objects keyed by ``(kind, index)``.
    """
    ladder = [float(m) for m in mu_ladder]
    if not ladder or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("mu ladder must be non-empty and strictly decreasing")
    if any(m <= 0 for m in ladder):
        raise ValueError("mu ladder entries must be positive")
    regime = params.regime()
    if regime is Regime.UNSUPPORTED:
        raise RegimeError("sweeps need the mixed or the L2-supercritical regime")
    mixed = regime is Regime.MIXED
    if mixed and (C_q is None or C_p is None):
        raise ValueError("mixed-regime sweeps need the Gagliardo-Nirenberg constants C_q, C_p")

    if u0 is None:
        u0 = solve_mu_zero(params, grid=grid, tol=tol, max_iter=max_iter)
    if reports is not None:
        reports[("mu_zero", 0)] = u0
    s = params.s
    prev_local = prev_mp = None
    rows = []
    for i, mu in enumerate(ladder):
        p_mu = params.with_mu(mu)
        row = SweepRow(mu, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan)
        problems = []
        if mixed:
            try:
                loc = solve_local_min(
                    p_mu, C_q, C_p, seed=prev_local, grid=grid, tol=tol, max_iter=max_iter,
                    raise_on_failure=False,
                )
                row.m_level = loc.level
                row.seminorm_local = loc.seminorm
                row.lambda_local = loc.lam
                prev_local = loc.field
                if not loc.converged:
                    problems.append("local_min not converged")
                if reports is not None:
                    reports[("local_min", i)] = loc
            except FracKirchhoffError as exc:
                problems.append(f"local_min failed: {exc}")
                prev_local = None
        try:
            mp = solve_mountain_pass(
                p_mu, seed=prev_mp, grid=grid, tol=tol, max_iter=max_iter, raise_on_failure=False
            )
            row.sigma_level = mp.level
            row.lambda_mp = mp.lam
            row.h_distance = hs_distance(u0.field, mp.field, s)
            prev_mp = mp.field
            if not mp.converged:
                problems.append("mountain_pass not converged")
            if reports is not None:
                reports[("mountain_pass", i)] = mp
        except FracKirchhoffError as exc:
            problems.append(f"mountain_pass failed: {exc}")
            prev_mp = None
        if problems:
            row.status = "; ".join(problems)
        log.info("sweep rung %d mu=%.6g m=%.12g sigma=%.12g dist=%.3e %s",
                 i, mu, row.m_level, row.sigma_level, row.h_distance, row.status)
        rows.append(row)
    return rows


def write_sweep_csv(rows, path) -> Path:
    """CSV with a header naming every :class:`SweepRow` field, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_FIELDS)
        for row in rows:
            d = asdict(row)
            wr.writerow([d[k] if isinstance(d[k], str) else f"{d[k]:.17g}" for k in SWEEP_FIELDS])
    return path


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [
            SweepRow(**{k: (v if k == "status" else float(v)) for k, v in rec.items()})
            for rec in rd
        ]
