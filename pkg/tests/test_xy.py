import math

import mpmath
import numpy as np
import pytest

from spindiscord.discord import XStateDensity, pair_spectrum
from spindiscord.errors import DomainError, PreconditionError
from spindiscord.oracle import xy_finite_chain
from spindiscord.xy import (
    XYParams,
    build_pair_state,
    dispersion,
    g_coefficient,
    g_table,
    magnetization,
    pair_observables,
    xx_correlator,
    yy_correlator,
    zz_correlator,
)

PI = math.pi
ISING_CRIT = XYParams(1.0, 1.0)


def g_exact_ising_critical(n):
    # at gamma = lambda = 1 the integrand collapses to cos((2n+1) phi / 2) / pi
    return 2.0 * (-1) ** (n % 2) / (PI * (2 * n + 1))


def mp_g(n, gamma, lam):
    """G_n by 30-digit tanh-sinh quadrature, T -> 0."""
    mpmath.mp.dps = 30

    def f(phi):
        w = mpmath.sqrt((gamma * lam * mpmath.sin(phi)) ** 2 + (1 + lam * mpmath.cos(phi)) ** 2) / 2
        br = mpmath.cos(n * phi) * (1 + lam * mpmath.cos(phi)) - gamma * lam * mpmath.sin(n * phi) * mpmath.sin(phi)
        return br / (2 * mpmath.pi * w)

    pts = [0, mpmath.pi / 2, mpmath.pi]
    if gamma == 0 and lam > 1:
        pts.insert(-1, mpmath.acos(-1 / mpmath.mpf(lam)))
    return float(mpmath.quad(f, sorted(pts)))


def mp_mz(gamma, lam):
    mpmath.mp.dps = 30

    def f(phi):
        w = mpmath.sqrt((gamma * lam * mpmath.sin(phi)) ** 2 + (1 + lam * mpmath.cos(phi)) ** 2) / 2
        return -(1 + lam * mpmath.cos(phi)) / (2 * mpmath.pi * w)

    return float(mpmath.quad(f, [0, mpmath.pi / 2, mpmath.pi]))


class TestParams:
    @pytest.mark.parametrize("kw", [dict(gamma=-0.1, lam=1), dict(gamma=1.1, lam=1),
                                    dict(gamma=0.5, lam=-1), dict(gamma=0.5, lam=1, beta=0.0)])
    def test_rejects_out_of_range(self, kw):
        with pytest.raises(DomainError):
            XYParams(**kw)

    def test_zero_temperature_sentinel(self):
        assert XYParams(0.5, 1.0).zero_temperature
        assert not XYParams(0.5, 1.0, 3.0).zero_temperature


@pytest.mark.parametrize("phi, gamma, lam, expected", [
    (0.0, 1.0, 1.0, 1.0),
    (PI, 1.0, 1.0, 0.0),
    (PI / 2, 0.5, 2.0, math.sqrt(2) / 2),
])
def test_dispersion(phi, gamma, lam, expected):
    assert dispersion(phi, XYParams(gamma, lam)) == pytest.approx(expected, abs=1e-15)


class TestMagnetization:
    def test_no_field_coupling(self):
        assert magnetization(XYParams(0.5, 0.0)) == pytest.approx(-1.0, abs=1e-10)

    def test_ising_critical_closed_form(self):
        assert magnetization(ISING_CRIT) == pytest.approx(-2 / PI, abs=1e-10)

    def test_strong_coupling_small(self):
        mz = magnetization(XYParams(1.0, 100.0))
        assert abs(mz) < 0.01
        assert mz == pytest.approx(mp_mz(1.0, 100.0), abs=1e-9)

    @pytest.mark.parametrize("gamma, lam", [(0.3, 0.7), (0.5, 1.5), (0.1, 2.5)])
    def test_against_high_precision(self, gamma, lam):
        assert magnetization(XYParams(gamma, lam)) == pytest.approx(mp_mz(gamma, lam), abs=1e-10)


class TestGCoefficient:
    def test_trivial_index_zero(self):
        assert g_coefficient(0, XYParams(0.3, 0.0)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("n", range(-6, 7))
    def test_ising_critical_closed_form(self, n):
        assert g_coefficient(n, ISING_CRIT) == pytest.approx(g_exact_ising_critical(n), abs=1e-10)

    def test_named_values(self):
        assert g_coefficient(1, ISING_CRIT) == pytest.approx(-2 / (3 * PI), abs=1e-10)
        assert g_coefficient(-1, ISING_CRIT) == pytest.approx(2 / PI, abs=1e-10)

    @pytest.mark.parametrize("n", [n for n in range(-8, 9) if n])
    def test_vanishes_without_coupling(self, n):
        assert abs(g_coefficient(n, XYParams(0.7, 0.0))) < 1e-9

    @pytest.mark.parametrize("n, gamma, lam", [(2, 0.5, 0.5), (-3, 0.5, 1.5), (5, 0.1, 0.9), (-1, 0.0, 1.7)])
    def test_against_high_precision(self, n, gamma, lam):
        assert g_coefficient(n, XYParams(gamma, lam)) == pytest.approx(mp_g(n, gamma, lam), abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, -3, 7])
    def test_xx_limit_step_integrand(self, n):
        # gamma = 0, lambda > 1: the integrand is +-cos(n phi)/pi with a jump at cos(phi) = -1/lambda
        b = math.acos(-1 / 1.7)
        assert g_coefficient(n, XYParams(0.0, 1.7)) == pytest.approx(2 * math.sin(n * b) / (n * PI), abs=1e-10)

    @pytest.mark.parametrize("gamma, lam", [(0.5, 0.5), (0.5, 1.0), (1.0, 1.0), (0.1, 1.5)])
    def test_halving_tolerance_within_error_estimate(self, gamma, lam):
        p = XYParams(gamma, lam)
        for k in range(-4, 5):
            v1, e1 = g_coefficient(k, p, 1e-10, with_error=True)
            v2, _ = g_coefficient(k, p, 5e-11, with_error=True)
            assert abs(v1 - v2) <= e1 + 1e-15
        m1, e1 = magnetization(p, 1e-10, with_error=True)
        m2, _ = magnetization(p, 5e-11, with_error=True)
        assert abs(m1 - m2) <= e1 + 1e-15

    def test_table_is_contiguous(self):
        t = g_table(XYParams(0.5, 0.5), -3, 4)
        assert sorted(t.values) == list(range(-3, 5))
        with pytest.raises(PreconditionError):
            t[5]


class TestCorrelators:
    def setup_method(self):
        self.table = g_table(ISING_CRIT, -12, 12)

    def test_xx_one(self):
        assert xx_correlator(1, self.table) == pytest.approx(2 / PI, abs=1e-10)

    def test_xx_two(self):
        assert xx_correlator(2, self.table) == pytest.approx(16 / (3 * PI ** 2), abs=1e-10)

    def test_yy_one(self):
        assert yy_correlator(1, self.table) == pytest.approx(-2 / (3 * PI), abs=1e-10)

    def test_yy_two(self):
        # G1^2 - G0 G2 with G2 = 2/(5 pi)
        assert yy_correlator(2, self.table) == pytest.approx(-16 / (45 * PI ** 2), abs=1e-10)

    def test_zz_one(self):
        assert zz_correlator(1, ISING_CRIT, self.table) == pytest.approx(16 / (3 * PI ** 2), abs=1e-10)

    @pytest.mark.parametrize("n", [3, 6, 10])
    def test_toeplitz_against_exact_determinant(self, n):
        mpmath.mp.dps = 30
        xx = mpmath.matrix(n, n)
        yy = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                xx[i, j] = mpmath.mpf(2) * (-1) ** ((i - j - 1) % 2) / (mpmath.pi * (2 * (i - j - 1) + 1))
                yy[i, j] = mpmath.mpf(2) * (-1) ** ((i - j + 1) % 2) / (mpmath.pi * (2 * (i - j + 1) + 1))
        assert xx_correlator(n, self.table) == pytest.approx(float(mpmath.det(xx)), abs=1e-10)
        assert yy_correlator(n, self.table) == pytest.approx(float(mpmath.det(yy)), abs=1e-10)

    def test_no_coupling(self):
        t = g_table(XYParams(0.4, 0.0), -3, 3)
        assert xx_correlator(1, t) == pytest.approx(0.0, abs=1e-10)
        assert yy_correlator(1, t) == pytest.approx(0.0, abs=1e-10)
        assert zz_correlator(1, XYParams(0.4, 0.0), t) == pytest.approx(1.0, abs=1e-10)

    def test_single_site_determinant_is_entry(self):
        t = g_table(XYParams(0.3, 1.3), -2, 2)
        assert xx_correlator(1, t) == t[-1]
        assert yy_correlator(1, t) == t[1]

    def test_missing_entries(self):
        t = g_table(XYParams(0.3, 1.3), -1, 1)
        with pytest.raises(PreconditionError):
            xx_correlator(3, t)
        with pytest.raises(PreconditionError):
            yy_correlator(3, t)

    def test_zz_matches_finite_chain(self):
        p = XYParams(0.5, 0.5)
        oracle = xy_finite_chain(0.5, 0.5, 14, [3])
        t = g_table(p, -4, 4)
        assert zz_correlator(3, p, t) == pytest.approx(oracle.correlators[3][2], abs=2e-2)


class TestPairState:
    def test_polarized(self):
        rho = build_pair_state(5, XYParams(0.5, 0.0))
        np.testing.assert_allclose(rho.to_matrix(), np.diag([0, 0, 0, 1.0]), atol=1e-10)

    def test_ising_critical_assembly(self):
        rho = build_pair_state(1, ISING_CRIT)
        ref = XStateDensity.from_observables(-2 / PI, 2 / PI, -2 / (3 * PI), 16 / (3 * PI ** 2))
        np.testing.assert_allclose(rho.to_matrix(), ref.to_matrix(), atol=1e-10)

    def test_spectrum_consistency(self):
        rho = build_pair_state(2, XYParams(0.5, 1.5))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho.to_matrix())),
                                   np.sort(pair_spectrum(rho)), atol=1e-12)

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0])
    def test_valid_density_over_scan(self, gamma):
        for lam in np.arange(0.0, 3.01, 0.5):
            p = XYParams(gamma, float(lam))
            t = g_table(p, -11, 11)
            for n in range(1, 11):
                ev = np.linalg.eigvalsh(build_pair_state(n, p, table=t).to_matrix())
                assert ev.min() >= -1e-12 and ev.max() <= 1 + 1e-12
                assert ev.sum() == pytest.approx(1.0, abs=1e-12)

    def test_x_validity_inequality(self):
        for gamma in (0.1, 0.25, 0.5, 0.75, 1.0):
            for lam in np.round(np.arange(0.0, 3.0001, 0.1), 10):
                p = XYParams(gamma, float(lam))
                t = g_table(p, -11, 11)
                for n in range(1, 11):
                    assert abs(xx_correlator(n, t)) >= abs(yy_correlator(n, t)), (gamma, lam, n)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 1.5])
    def test_large_beta_approaches_ground_state(self, lam):
        cold = pair_observables(3, XYParams(0.5, lam))
        warm = pair_observables(3, XYParams(0.5, lam, 1e4))
        for field in ("mz", "gxx", "gyy", "gzz"):
            assert getattr(warm, field) == pytest.approx(getattr(cold, field), abs=1e-6)

    def test_finite_temperature_reduces_order(self):
        cold = magnetization(XYParams(0.5, 0.5))
        hot = magnetization(XYParams(0.5, 0.5, 0.5))
        assert abs(hot) < abs(cold)
        mpmath.mp.dps = 20

        def f(phi):
            w = mpmath.sqrt((0.25 * mpmath.sin(phi)) ** 2 + (1 + 0.5 * mpmath.cos(phi)) ** 2) / 2
            return -(1 + 0.5 * mpmath.cos(phi)) * mpmath.tanh(0.5 * w) / (2 * mpmath.pi * w)

        assert hot == pytest.approx(float(mpmath.quad(f, [0, mpmath.pi])), abs=1e-10)
