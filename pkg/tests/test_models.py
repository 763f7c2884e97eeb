import time
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whiskered import jets
from whiskered.models import (CoupledStandardWhiskerMap, DomainMarginError, LambdaSpec, check_conformal,
                              conformal_residuals, make_model)

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class BrokenCoupling(CoupledStandardWhiskerMap):
    """The benchmark with the eps kick on v omitted (not conformal)."""

    name: str = "broken"

    def _displacement(self, parts, mu, eps, lam):
        d = super()._displacement(parts, mu, eps, lam)
        x, y, u, v = parts
        d[3] = (lam / self.kappa) * v - v
        return d

    def _jacobian(self, parts, mu, eps, lam):
        J = super()._jacobian(parts, mu, eps, lam)
        J[3][0] = 0.0
        return J


def numeric_jacobian(fam, z, mu, h=1e-6):
    m = z.shape[-1]
    cols = []
    for j in range(m):
        dz = np.zeros(m)
        dz[j] = h
        cols.append((fam.evaluate(z + dz, mu) - fam.evaluate(z - dz, mu)) / (2 * h))
    return np.stack(cols, axis=-1)


class TestBenchmark:
    def test_exact_structure(self, bench):
        w, lam = bench.omega, 0.9
        mu0 = w * (1 - lam)
        z = np.array([[0.3, w, 0.0, 0.0]])
        out = bench.with_eps(0.0).evaluate(z, mu0)
        np.testing.assert_allclose(out, [[0.3 + w, w, 0.0, 0.0]], atol=1e-15)

    def test_jacobian_eps0_block_diagonal(self, bench):
        z = bench.random_points(5, 1)
        Df = bench.with_eps(0.0).jacobian(z, 0.0)
        k, lam = 3.0, 0.9
        expect = np.zeros((4, 4))
        expect[:2, :2] = [[1, 1], [0, lam]]
        expect[2:, 2:] = [[k, 0], [0, lam / k]]
        np.testing.assert_allclose(Df, np.broadcast_to(expect, Df.shape), atol=1e-15)

    @pytest.mark.parametrize("eps", [0.0, 0.05, 0.1])
    def test_determinant(self, bench, eps):
        Df = bench.with_eps(eps).jacobian(bench.random_points(200, 2), 0.06)
        np.testing.assert_allclose(np.linalg.det(Df), 0.9 ** 2, rtol=1e-12)

    def test_jacobian_matches_finite_differences(self, bench):
        fam = bench.with_eps(0.07)
        z = fam.random_points(4, 3)
        np.testing.assert_allclose(fam.jacobian(z, 0.06), numeric_jacobian(fam, z, 0.06), atol=1e-7)

    def test_jet_derivative_matches_finite_difference(self, bench):
        z = bench.random_points(3, 4)
        mu, h, eps0 = 0.06, 1e-6, 0.02
        parts = [jets.Jet.constant(z[:, i], 1) for i in range(4)]
        d = bench.displacement_jet(parts, jets.Jet.constant(mu, 1), jets.Jet.variable(1, eps0))
        fd = (bench.with_eps(eps0 + h).displacement(z, mu) - bench.with_eps(eps0 - h).displacement(z, mu)) / (2 * h)
        got = np.stack([np.broadcast_to(di.coefficient(1), (3,)) for di in d], axis=-1)
        np.testing.assert_allclose(got, fd, atol=1e-8)

    def test_domain_margin(self, bench):
        z = np.array([[0.1, bench.omega, 0.0, 0.0]])
        bench.check_domain(z)
        with pytest.raises(DomainMarginError):
            bench.check_domain(np.array([[0.1, bench.omega + 0.49, 0.0, 0.0]]))

    def test_lambda_spec(self):
        lin = LambdaSpec("power", alpha=-1.0, power=1)
        assert lin(0.0) == 1.0 and lin(0.1) == pytest.approx(0.9)
        assert LambdaSpec("fixed", 0.9)(0.3) == 0.9
        with pytest.raises(ValueError):
            LambdaSpec("cubic")

    def test_unknown_model(self):
        with pytest.raises(ValueError, match="unknown model"):
            make_model("nope")


class TestConformality:
    @pytest.mark.parametrize("eps", [0.0, 0.05, 0.1])
    def test_benchmark(self, bench, eps):
        assert check_conformal(bench.with_eps(eps), 1000) <= 1e-12

    def test_symplectic_at_zero(self, bench_lin):
        f0 = bench_lin.with_eps(0.0)
        assert f0.lam == 1.0
        assert check_conformal(f0, 500) <= 1e-12

    def test_complex_eps_and_points(self, bench_lin):
        fam = bench_lin.with_eps(0.03 + 0.04j)
        z = fam.random_points(300, 5, imag=0.05)
        assert np.max(conformal_residuals(fam, z, 0.01)) <= 1e-12

    def test_two_dimensional(self, dsm):
        for eps in (0.0, 0.1, 0.5):
            assert check_conformal(dsm.with_eps(eps), 1000) <= 1e-13

    def test_broken_coupling_flagged(self):
        for eps in (0.01, 0.1):
            r = check_conformal(BrokenCoupling(eps=eps), 1000)
            assert r > 1e-3 * eps
        r1, r2 = (check_conformal(BrokenCoupling(eps=e), 1000) for e in (0.01, 0.02))
        assert r2 / r1 == pytest.approx(2.0, rel=1e-6)

    @given(st.floats(-0.1, 0.1), st.integers(0, 2 ** 31))
    @settings(max_examples=30, deadline=None)
    def test_property(self, eps, seed):
        fam = CoupledStandardWhiskerMap(eps=eps)
        assert check_conformal(fam, 64, rng=seed) <= 1e-12

    def test_runtime(self, bench):
        t = time.perf_counter()
        for eps in (0.0, 0.05, 0.1):
            check_conformal(bench.with_eps(eps), 1000)
        assert time.perf_counter() - t < 1.0
