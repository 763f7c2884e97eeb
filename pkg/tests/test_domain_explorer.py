import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whiskered.diophantine import GOLDEN_MEAN, DiophantineParams, DomainSetParams, in_domain_G
from whiskered.domain import (CSV_FIELDS, REASONS, GridSpec, modes_for_eps, restrict_raster,
                              scan_analyticity_domain, scan_solver_config, validate_at_epsilon)
from whiskered.fourier import SpectralGrid
from whiskered.lindstedt import lindstedt_bundle_expansion, lindstedt_torus_expansion
from whiskered.models import CoupledStandardWhiskerMap, LambdaSpec
from whiskered.newton import SolverConfig, continue_in_eps

LIN = LambdaSpec("power", alpha=-1.0, power=1)


@pytest.fixture(scope="module")
def fam():
    return CoupledStandardWhiskerMap(lam_spec=LIN)


@pytest.fixture(scope="module")
def ex6(fam):
    return lindstedt_bundle_expansion(fam, lindstedt_torus_expansion(fam, 6, SpectralGrid(64)))


@pytest.fixture(scope="module")
def small_raster(fam, ex6):
    # odd n puts a row on the real axis
    return scan_analyticity_domain(fam, ex6, GridSpec("cartesian", 11, 0.1), workers=1)


def resonance_center(k):
    return 1.0 - cmath.exp(2j * cmath.pi * k * GOLDEN_MEAN)


class TestValidate:
    def test_real_accepted_and_asymptotic(self, fam, ex6):
        r = validate_at_epsilon(fam, ex6, 0.02)
        assert r.accepted and r.reason == "" and r.residual <= 1e-11
        # C fitted on other samples, bound checked out of sample at 0.02
        C = max(abs(s.mu_e - s.mu_series) / e ** 7
                for e in (0.03, 0.05, 0.1) for s in [validate_at_epsilon(fam, ex6, e)])
        assert abs(r.mu_e - r.mu_series) <= C * 0.02 ** 7

    def test_symplectic_limit(self, fam, ex6):
        r = validate_at_epsilon(fam, ex6, 0.0)
        assert r.accepted and r.detail == "symplectic-limit"

    def test_near_resonant_lambda(self, fam, ex6):
        lam = cmath.exp(2j * cmath.pi * GOLDEN_MEAN) * (1 + 1e-6)
        r = validate_at_epsilon(fam, ex6, 1.0 - lam, sp=DomainSetParams(1.0, 6, 2.0))
        assert not r.accepted and r.reason == "diophantine-threshold"
        assert r.iterations == 0

    def test_resonance_inside_disc(self, fam, ex6):
        c = resonance_center(34)
        assert abs(c) < 0.1
        r = validate_at_epsilon(fam, ex6, c * (1 + 1e-12))
        assert r.reason == "diophantine-threshold"

    def test_twist_reason(self):
        # the benchmark twist is never degenerate; a tiny |S^-1| limit forces the rejection path
        r = validate_at_epsilon(CoupledStandardWhiskerMap(lam_spec=LIN), None, 0.01,
                                cfg=scan_solver_config(max_twist_inv=1e-3))
        assert not r.accepted and r.reason == "twist"

    def test_divergence_reason(self, fam, ex6):
        r = validate_at_epsilon(fam, ex6, 0.09 + 0.03j, cfg=scan_solver_config(max_iter=1))
        assert not r.accepted and r.reason == "divergence"

    def test_hyperbolicity_reason(self):
        weak = CoupledStandardWhiskerMap(lam_spec=LIN, kappa=1.02)
        r = validate_at_epsilon(weak, None, 0.05)
        assert not r.accepted and r.reason == "hyperbolicity"

    def test_domain_margin_reason(self):
        tight = CoupledStandardWhiskerMap(lam_spec=LIN, fiber_radius=0.04)
        r = validate_at_epsilon(tight, None, 0.05)
        assert not r.accepted and r.reason == "domain-margin"

    def test_modes_rule(self):
        assert modes_for_eps(0.0) == 32 and modes_for_eps(0.5) == 128
        assert modes_for_eps(0.01) <= modes_for_eps(0.05) <= modes_for_eps(0.1)
        assert all(m % 16 == 0 for m in (modes_for_eps(e) for e in np.linspace(0, 0.1, 11)))


class TestExclusionGeometry:
    @staticmethod
    def radius(fam, k, N=6):
        c = resonance_center(k)
        u = c / abs(c)
        lo, hi = 0.0, 1e-3
        dp, sp = DiophantineParams(), DomainSetParams(1.0, N, 0.1)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            ok, _ = in_domain_G(c + mid * u, fam.lam_spec, dp, sp)
            lo, hi = (lo, mid) if ok else (mid, hi)
        return hi

    def test_radii_follow_centers(self, fam):
        r = {k: self.radius(fam, k) for k in (34, 55, 89)}
        assert r[34] > r[55] > r[89] > 0
        for k in r:
            c = abs(resonance_center(k))
            assert r[k] == pytest.approx(c ** 7 / k ** 1.2, rel=0.6)


class TestScan:
    def test_one_reason_per_rejection(self, small_raster):
        for res in small_raster.results:
            if res.accepted:
                assert res.reason == ""
            else:
                assert res.reason in REASONS

    def test_soundness(self, small_raster):
        for res in small_raster.results:
            if res.accepted:
                assert res.residual is not None and res.residual <= 1e-11

    def test_points_in_disc_and_order(self, small_raster):
        z = small_raster.points
        assert np.all(np.abs(z) <= 0.1 * (1 + 1e-12))
        np.testing.assert_array_equal([r.epsilon for r in small_raster.results], z)

    def test_restrict_is_subset(self, small_raster):
        for A in (0.1, 1e-6, 1e-9):
            sub = restrict_raster(small_raster, A)
            assert np.all(~sub.accepted | small_raster.accepted)
        with pytest.raises(ValueError):
            restrict_raster(small_raster, 10.0)

    def test_restrict_matches_rescan(self, fam, ex6, small_raster):
        A = 1e-9
        spec = GridSpec("cartesian", 11, 0.1)
        direct = scan_analyticity_domain(fam, ex6, spec, sp=DomainSetParams(A, 6, 0.1), workers=1)
        np.testing.assert_array_equal(direct.accepted, restrict_raster(small_raster, A).accepted)
        assert direct.accepted.sum() < small_raster.accepted.sum()

    def test_parallel_matches_serial(self, fam, ex6):
        spec = GridSpec("polar", n_r=2, n_theta=6, r0=0.05)
        a = scan_analyticity_domain(fam, ex6, spec, workers=1, chunk=4)
        b = scan_analyticity_domain(fam, ex6, spec, workers=2, chunk=4)
        assert a.to_csv() == b.to_csv()

    def test_csv(self, small_raster, tmp_path):
        text = small_raster.to_csv(tmp_path / "d.csv")
        rows = text.strip().split("\n")
        assert rows[0].split(",") == list(CSV_FIELDS)
        assert len(rows) == len(small_raster.points) + 1
        assert (tmp_path / "d.csv").read_text() == text

    def test_real_slice_matches_continuation(self, fam, small_raster):
        real = [r for r in small_raster.results if r.epsilon.imag == 0]
        assert len(real) == 11
        acc = [r.epsilon.real for r in real if r.accepted]
        hi = continue_in_eps(fam, 0.0, 0.1, 0.02, SolverConfig(n_modes=64))
        lo = continue_in_eps(fam, 0.0, -0.1, 0.02, SolverConfig(n_modes=64))
        cont = sorted([p["eps"] for p in lo.points] + [p["eps"] for p in hi.points[1:]])
        cell = 0.02 + 1e-12
        assert abs(min(acc) - min(cont)) <= cell and abs(max(acc) - max(cont)) <= cell
        mus = {round(p["eps"], 10): p["mu"][0] for p in lo.points + hi.points}
        for r in real:
            key = round(r.epsilon.real, 10)
            if r.accepted and key in mus:
                assert complex(r.mu_e).real == pytest.approx(mus[key], abs=1e-10)


class TestGridSpec:
    def test_polar(self):
        z = GridSpec("polar", n_r=3, n_theta=8, r0=0.1).points()
        assert len(z) == 25 and z[0] == 0
        assert np.abs(z).max() == pytest.approx(0.1)

    def test_bad(self):
        with pytest.raises(ValueError):
            GridSpec("hex")

    @given(st.integers(1, 40), st.floats(0.01, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_cartesian_clipped(self, n, r0):
        z = GridSpec("cartesian", n, r0).points()
        assert np.all(np.abs(z) <= r0 * (1 + 1e-12))
