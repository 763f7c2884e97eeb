import numpy as np
import pytest

from whiskered.config import default_toml
from whiskered.fourier import SpectralGrid
from whiskered.models import CoupledStandardWhiskerMap, DissipativeStandardMap, LambdaSpec
from whiskered.newton import SolverConfig, exact_torus, reference_splitting, run_kam_iteration


@pytest.fixture
def bench():
    """Benchmark coupled map: golden omega, lambda = 0.9, kappa = 3."""
    return CoupledStandardWhiskerMap()


@pytest.fixture
def bench_lin():
    """Benchmark with lambda(eps) = 1 - eps (symplectic at eps = 0)."""
    return CoupledStandardWhiskerMap(lam_spec=LambdaSpec("power", alpha=-1.0, power=1))


@pytest.fixture
def dsm():
    return DissipativeStandardMap()


def solve(fam, eps, n_modes=256, **kw):
    cfg = SolverConfig(n_modes=n_modes, **kw)
    grid = cfg.grid()
    fe = fam.with_eps(eps)
    K0 = exact_torus(fam.with_eps(0.0), grid)
    return run_kam_iteration(K0, fe, reference_splitting(fe, grid), cfg)


@pytest.fixture(scope="session")
def solved_005():
    """Converged benchmark torus at eps = 0.05 (256 modes, tol 1e-11)."""
    return solve(CoupledStandardWhiskerMap(), 0.05)


@pytest.fixture(scope="session")
def solved_005_small():
    return solve(CoupledStandardWhiskerMap(), 0.05, n_modes=64)


@pytest.fixture
def grid64():
    return SpectralGrid(64)


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "bench.toml"
    p.write_text(default_toml())
    return p


def random_series_coeffs(rng, n_modes, decay=0.5):
    k = np.arange(-n_modes, n_modes + 1)
    return (rng.normal(size=k.size) + 1j * rng.normal(size=k.size)) * decay ** np.abs(k)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
