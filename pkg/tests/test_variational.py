import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frackirchhoff import (
    ParameterError,
    PohozaevClass,
    ProblemParams,
    RadialField,
    RadialGrid,
    Regime,
    SolveReport,
    classify_pohozaev,
    el_residual,
    energy,
    lambda_from_moments,
    moments,
    multiplier_estimate,
    pohozaev,
    pohozaev_identity_residual,
    rescale,
)
from frackirchhoff.radial import Moments, inner
from frackirchhoff.variational import el_gradient, pohozaev_second, relative_pohozaev, theta

from conftest import MIXED, SUPER, gaussian_mixture, gaussian_moments


def moment_sets():
    pos = st.floats(1e-3, 1e3)
    return st.builds(Moments, pos, pos, pos, pos)


class TestParams:
    def test_exponent_order_message(self):
        with pytest.raises(ParameterError, match=r"2<q<p<2_\{s\}\^\{\\ast\}"):
            ProblemParams(1, 1, 1, 0.9, 3.0, 3.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"a": 0.0},
            {"c": -1.0},
            {"s": 1.0},
            {"mu": -0.1},
            {"p": 30.0},
            {"q": float("nan")},
        ],
    )
    def test_rejects_invalid(self, kwargs):
        base = dict(a=1.0, b=1.0, c=1.0, s=0.9, q=3.0, p=4.7)
        base.update(kwargs)
        with pytest.raises(ParameterError):
            ProblemParams(**base)

    def test_regimes(self):
        assert MIXED.regime() is Regime.MIXED
        assert SUPER.regime() is Regime.SUPERCRITICAL
        assert ProblemParams(1, 1, 1, 0.9, 3.5, 4.7).regime() is Regime.UNSUPPORTED
        # no mixed window for s <= 3/4
        assert ProblemParams(1, 1, 1, 0.7, 2.5, 3.7).regime() is Regime.UNSUPPORTED

    def test_theta_values(self):
        assert theta(0.9, 3.0) == pytest.approx(3.0 * 1.0 / (2 * 0.9 * 3.0))
        assert MIXED.q * MIXED.theta_q < 2.0 < 4.0 < MIXED.p * MIXED.theta_p
        with pytest.raises(ParameterError):
            theta(0.9, 2.0)


class TestFunctionals:
    def test_energy_closed_form(self):
        m = Moments(2.0, 1.0, 3.0, 5.0)
        p = MIXED.with_mu(0.5)
        assert energy(p, m) == pytest.approx(1.0 + 1.0 - 0.5 - 5.0 / 4.7)

    @settings(max_examples=100, deadline=None)
    @given(m=moment_sets(), mu=st.floats(0.0, 10.0), dmu=st.floats(1e-3, 10.0))
    def test_energy_decreases_in_mu(self, m, mu, dmu):
        assert energy(MIXED.with_mu(mu + dmu), m) < energy(MIXED.with_mu(mu), m)

    @settings(max_examples=200, deadline=None)
    @given(m=moment_sets(), mu=st.floats(0.0, 10.0))
    def test_lambda_from_moments_sign(self, m, mu):
        assert lambda_from_moments(MIXED.with_mu(mu), m) < 0.0
        assert lambda_from_moments(SUPER.with_mu(mu), m) < 0.0

    def test_lambda_from_moments_zero(self):
        assert lambda_from_moments(MIXED.with_mu(1.0), Moments(0.0, 0.0, 0.0, 0.0)) == 0.0
        assert lambda_from_moments(MIXED.with_mu(1.0), Moments(1.0, 1.0, 0.0, 0.0)) == 0.0

    def test_multiplier_gaussian_closed_form(self, grid):
        u = RadialField.gaussian(grid)
        p = MIXED.with_mu(2.0)
        A, M, Lq = gaussian_moments(p.s, p.q)
        _, _, Lp = gaussian_moments(p.s, p.p)
        want = ((p.a + p.b * A) * A - p.mu * Lq - Lp) / M
        assert multiplier_estimate(p, u) == pytest.approx(want, rel=1e-4)

    def test_multiplier_rejects_zero(self, grid):
        with pytest.raises(ValueError):
            multiplier_estimate(MIXED, RadialField.zeros(grid))

    def test_multipliers_agree_on_manifold(self, grid):
        # dilate a Gaussian onto P = 0 by solving for tau on the exact fiber
        from frackirchhoff.fiber import classify_fiber, fiber_from_moments

        p = SUPER
        u = RadialField.gaussian(grid, width=0.05)
        st_ = classify_fiber(fiber_from_moments(p, moments(u, p.s, p.q, p.p)), p.regime())
        v = rescale(u, st_.t_u)
        m = moments(v, p.s, p.q, p.p)
        assert relative_pohozaev(p, m) < 1e-10
        assert multiplier_estimate(p, v) == pytest.approx(lambda_from_moments(p, m), rel=1e-9)

    def test_identity_residual_tracks_pohozaev(self, grid):
        rng = np.random.default_rng(4)
        p = SUPER
        for _ in range(5):
            u = gaussian_mixture(grid, rng)
            m = moments(u, p.s, p.q, p.p)
            lam = multiplier_estimate(p, u)
            lhs = 0.5 * (3 - 2 * p.s) * (p.a * m.seminorm_sq + p.b * m.seminorm_sq**2)
            want = p.s * abs(pohozaev(p, m)) / lhs
            assert pohozaev_identity_residual(p, u, lam) == pytest.approx(want, rel=1e-9)

    def test_identity_residual_zero_field(self, grid):
        assert pohozaev_identity_residual(MIXED, RadialField.zeros(grid), -1.0) == 0.0

    def test_identity_residual_discriminates(self, grid):
        u = RadialField.gaussian(grid)
        assert pohozaev_identity_residual(SUPER, u, multiplier_estimate(SUPER, u)) > 1e-2


class TestEulerLagrange:
    def test_gradient_matches_finite_differences(self):
        g = RadialGrid(20.0, 1024)
        rng = np.random.default_rng(5)
        p = MIXED.with_mu(1.5)
        u = gaussian_mixture(g, rng)
        h = gaussian_mixture(g, rng, signed=True)

        def E(v):
            return energy(p, moments(v, p.s, p.q, p.p))

        eps = 1e-5
        fd = (E(u + h * eps) - E(u - h * eps)) / (2 * eps)
        assert inner(el_gradient(p, u), h) == pytest.approx(fd, rel=1e-7)

    def test_multiplier_minimises_residual(self, grid):
        rng = np.random.default_rng(6)
        p = MIXED.with_mu(1.0)
        for _ in range(10):
            u = gaussian_mixture(grid, rng)
            lam = multiplier_estimate(p, u)
            best = el_residual(p, u, lam)
            assert best < el_residual(p, u, 0.0)
            assert best <= el_residual(p, u, lam * 1.01)
            assert best <= el_residual(p, u, lam * 0.99)

    def test_zero_field_residual(self, grid):
        assert el_residual(MIXED, RadialField.zeros(grid), -1.0) == 0.0


class TestClassification:
    def test_off_manifold(self, grid):
        m = moments(RadialField.gaussian(grid), SUPER.s, SUPER.q, SUPER.p)
        assert classify_pohozaev(SUPER, m) is PohozaevClass.NOT_ON_MANIFOLD

    def test_supercritical_fiber_max_is_p_minus(self, grid):
        from frackirchhoff.fiber import classify_fiber, fiber_from_moments

        u = RadialField.gaussian(grid, width=0.05)
        st_ = classify_fiber(fiber_from_moments(SUPER, moments(u, SUPER.s, SUPER.q, SUPER.p)), SUPER.regime())
        m = moments(rescale(u, st_.t_u), SUPER.s, SUPER.q, SUPER.p)
        assert classify_pohozaev(SUPER, m) is PohozaevClass.P_MINUS
        assert pohozaev_second(SUPER, m) < 0

    @pytest.mark.parametrize("n", [2048, 4096, 8192])
    def test_stable_under_refinement(self, n):
        from frackirchhoff.fiber import classify_fiber, fiber_from_moments

        g = RadialGrid(20.0, n)
        u = RadialField.gaussian(g, width=0.5)
        st_ = classify_fiber(fiber_from_moments(SUPER, moments(u, SUPER.s, SUPER.q, SUPER.p)), SUPER.regime())
        m = moments(rescale(u, st_.t_u), SUPER.s, SUPER.q, SUPER.p)
        assert classify_pohozaev(SUPER, m) is PohozaevClass.P_MINUS

    def test_zero_second_derivative_reported(self):
        # tune L_p so that P = 0 and the second derivative vanishes simultaneously
        p = MIXED.with_mu(1.0)
        A = 1.0
        tq, tp = p.theta_q, p.theta_p
        # solve aA + bA^2 = mu tq Lq + tp Lp and 2aA + 4bA^2 = mu q tq^2 Lq + p tp^2 Lp
        M = np.array([[tq, tp], [p.q * tq**2, p.p * tp**2]])
        Lq, Lp = np.linalg.solve(M, [2.0, 6.0])
        m = Moments(A, 1.0, Lq, Lp)
        assert classify_pohozaev(p, m) is PohozaevClass.P_ZERO


class TestSolveReport:
    def test_json_round_trip(self, tmp_path, grid):
        u = RadialField.gaussian(grid)
        m = moments(u, MIXED.s, MIXED.q, MIXED.p)
        rep = SolveReport(
            field=u, lam=-1.0, level=0.5, el_residual=1e-3, pohozaev_residual=1e-2,
            classification=PohozaevClass.NOT_ON_MANIFOLD, iterations=3, converged=False,
            params=MIXED, kind="test", moments=m,
        )
        path = rep.to_json(tmp_path / "r.json", field_path="fields/u.csv")
        data = json.loads(path.read_text())
        assert data["classification"] == "NotOnManifold"
        assert data["field_csv"] == "fields/u.csv"
        assert data["positive"] is True
        assert data["seminorm"] == pytest.approx(math.sqrt(m.seminorm_sq))
        assert data["params"]["p"] == 4.7
