import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whiskered.diophantine import (GOLDEN_MEAN, DiophantineParams, DomainSetParams, in_domain_G,
                                   nu_lambda, nu_omega)
from whiskered.fourier import ResonanceError
from whiskered.models import LambdaSpec

LIN = LambdaSpec("power", alpha=-1.0, power=1)


def brute_nu(lam, omega, tau, k_max):
    """Plain-loop oracle over both signs of k."""
    best = 0.0
    for k in range(1, k_max + 1):
        for s in (1, -1):
            d = abs(cmath.exp(2j * cmath.pi * s * k * omega) - lam)
            best = max(best, 1.0 / (d * k ** tau))
    return best


class TestNuOmega:
    def test_golden_converges_in_kmax(self):
        a = nu_omega(DiophantineParams(GOLDEN_MEAN, 1.2, 10_000))
        b = nu_omega(DiophantineParams(GOLDEN_MEAN, 1.2, 100_000))
        assert np.isfinite(a) and np.isfinite(b)
        assert abs(b - a) / a < 0.05

    def test_matches_brute_force(self):
        assert nu_omega(DiophantineParams(GOLDEN_MEAN, 1.2, 3000)) == pytest.approx(
            brute_nu(1.0, GOLDEN_MEAN, 1.2, 3000), rel=1e-10)

    def test_rational_resonance(self):
        with pytest.raises(ResonanceError) as ei:
            nu_omega(DiophantineParams(0.5, 1.0, 100))
        assert abs(ei.value.k) == 2

    @given(st.floats(0.5, 3.0), st.floats(0.01, 2.0))
    @settings(max_examples=25, deadline=None)
    def test_monotone_in_tau(self, tau, dt):
        p = DiophantineParams(GOLDEN_MEAN, tau, 2000)
        assert nu_omega(p, tau + dt) <= nu_omega(p) * (1 + 1e-14)


class TestNuLambda:
    def test_dissipative_bounds(self):
        p = DiophantineParams(GOLDEN_MEAN, 1.0, 5000)
        v = nu_lambda(0.5, p)
        assert 1.0 / abs(cmath.exp(2j * cmath.pi * GOLDEN_MEAN) - 0.5) <= v <= 2.0

    def test_lambda_one_is_nu_omega(self):
        p = DiophantineParams(GOLDEN_MEAN, 1.2, 5000)
        assert nu_lambda(1.0, p) == nu_omega(p)

    def test_matches_brute_force_complex(self):
        lam = 0.95 * cmath.exp(0.4j)
        assert nu_lambda(lam, DiophantineParams(GOLDEN_MEAN, 1.2, 2000)) == pytest.approx(
            brute_nu(lam, GOLDEN_MEAN, 1.2, 2000), rel=1e-10)

    def test_near_resonance_k1(self):
        lam = cmath.exp(2j * cmath.pi * GOLDEN_MEAN) * (1 + 1e-9)
        v, k = nu_lambda(lam, DiophantineParams(GOLDEN_MEAN, 1.2, 10_000), return_argmax=True)
        assert k == 1
        assert v == pytest.approx(1.0 / abs(cmath.exp(2j * cmath.pi * GOLDEN_MEAN) - lam), rel=1e-9)
        assert v > 0.9e9

    def test_exact_resonance_raises(self):
        with pytest.raises(ResonanceError):
            nu_lambda(cmath.exp(2j * cmath.pi * 3 * 0.25), DiophantineParams(0.25, 1.0, 10))


class TestDomainG:
    dp = DiophantineParams(GOLDEN_MEAN, 1.2, 10_000)

    def test_eps_zero_symplectic_limit(self):
        ok, diag = in_domain_G(0.0, LIN, self.dp, DomainSetParams(1.0, 4, 0.1))
        assert ok and diag.reason == "symplectic-limit"
        ok, _ = in_domain_G(0.0, LIN, self.dp, DomainSetParams(1.0, 4, 0.1, symplectic_limit=False))
        assert not ok

    @pytest.mark.parametrize("eps", np.logspace(-3, -2, 6))
    def test_small_real_accepted(self, eps):
        ok, diag = in_domain_G(eps, LIN, self.dp, DomainSetParams(1.0, 4, 0.1))
        assert ok
        assert diag.product == pytest.approx(diag.nu * eps ** 5, rel=1e-12)

    def test_divisor_blowup_rejected(self):
        target = cmath.exp(2j * cmath.pi * GOLDEN_MEAN) + 1e-8
        eps = 1.0 - target
        ok, diag = in_domain_G(eps, LIN, self.dp, DomainSetParams(1.0, 4, 2.0))
        assert not ok and diag.reason == "diophantine-threshold" and diag.worst_k == 1

    def test_outside_ball(self):
        with pytest.raises(ValueError):
            in_domain_G(0.2, LIN, self.dp, DomainSetParams(1.0, 4, 0.1))

    @given(st.complex_numbers(max_magnitude=0.1, allow_nan=False, allow_infinity=False),
           st.floats(1e-9, 1.0), st.floats(1.0, 100.0))
    @settings(max_examples=60, deadline=None)
    def test_set_monotone_in_A(self, eps, A, factor):
        dp = DiophantineParams(GOLDEN_MEAN, 1.2, 1000)
        small, _ = in_domain_G(eps, LIN, dp, DomainSetParams(A, 6, 0.1))
        big, _ = in_domain_G(eps, LIN, dp, DomainSetParams(A * factor, 6, 0.1))
        assert (not small) or big
