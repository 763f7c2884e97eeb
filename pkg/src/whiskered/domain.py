"""A-posteriori validation of Lindstedt seeds over a raster of complex eps.

Each sample is judged on its own: membership in the Diophantine domain set
G(A, N) first, then a Newton run seeded by the truncated series.  Samples
never share state, so a scan is a map over independent jobs.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cocycle import FrameError, HyperbolicityError, ResolutionError
from .diophantine import DiophantineParams, DomainSetParams, in_domain_G
from .fourier import CohomologyError, ResonanceError
from .lindstedt import LindstedtExpansion
from .models import ConformalMapFamily, DomainMarginError
from .newton import (NonConvergenceError, SolverConfig, TwistError, exact_torus, invariance_error,
                     reference_splitting, run_kam_iteration)

REASONS = ("diophantine-threshold", "twist", "hyperbolicity", "divergence", "domain-margin")

CSV_FIELDS = ("index", "re_eps", "im_eps", "re_lambda", "im_lambda", "nu", "nu_product", "accepted",
              "reason", "residual", "re_mu", "im_mu", "iterations")


def scan_solver_config(**overrides) -> SolverConfig:
    """Solver settings used per raster sample (lighter rate estimation)."""
    base = SolverConfig(n_modes=64, grid_factor=3, max_iter=8, rates_every_iteration=False,
                        rate_samples=16, rate_horizon=30)
    return replace(base, **overrides)


def modes_for_eps(eps, target: float = 1e-13, decay_per_eps: float = 5.0,
                  floor: int = 32, cap: int = 128) -> int:
    """Fourier truncation for one sample.

    The benchmark torus coefficients decay roughly like ``(5 |eps|)^|k|``
    (measured on converged solutions); the tail above ``N/2`` must stay below
    the resolution budget, so ``N/2 >= log(target) / log(5 |eps|)``.  Rounded
    up to a multiple of 16 and clipped to ``[floor, cap]``.
    """
    q = decay_per_eps * abs(complex(eps))
    if q <= 0:
        return floor
    if q >= 1:
        return cap
    n = 2 * np.log(target) / np.log(q)
    n = int(16 * np.ceil(n / 16))
    return int(min(max(n, floor), cap))


@dataclass
class ValidationResult:
    epsilon: complex
    lam: complex
    nu: float
    nu_product: float
    accepted: bool
    reason: str = ""
    residual: Optional[float] = None
    mu_e: Optional[complex] = None
    mu_series: Optional[complex] = None
    iterations: int = 0
    detail: str = ""
    dio_inside: bool = True
    record: dict = field(default_factory=dict)

    def as_dict(self):
        c = lambda z: None if z is None else [complex(z).real, complex(z).imag]
        return {"epsilon": c(self.epsilon), "lambda": c(self.lam), "nu": self.nu,
                "nu_product": self.nu_product, "accepted": self.accepted, "reason": self.reason,
                "residual": self.residual, "mu_e": c(self.mu_e), "mu_series": c(self.mu_series),
                "iterations": self.iterations, "detail": self.detail}


def _reason_from_checks(checks: dict) -> str:
    if not checks.get("domain_margin", True):
        return "domain-margin"
    if not checks.get("twist", True):
        return "twist"
    for key in ("frame", "trichotomy", "center_brackets_lambda"):
        if not checks.get(key, True):
            return "hyperbolicity"
    return "divergence"


def _newton_verdict(fam_e, expansion, eps, grid, cfg, use_bundles):
    """Run Newton from the series seed; returns (accepted, reason, residual, mu, iterations, detail)."""
    if expansion is None or eps == 0:
        K = exact_torus(fam_e, grid)
        s = reference_splitting(fam_e, grid)
    else:
        K = expansion.torus_at(eps, grid=grid)
        s = expansion.splitting_at(eps, grid=grid) if (use_bundles and expansion.A) \
            else reference_splitting(fam_e, grid)
    try:
        fam_e.check_domain(K.values())
        res = run_kam_iteration(K, fam_e, s, cfg)
    except DomainMarginError as exc:
        return False, "domain-margin", None, None, 0, str(exc)
    except TwistError as exc:
        return False, "twist", None, None, 0, str(exc)
    except (HyperbolicityError, FrameError) as exc:
        return False, "hyperbolicity", None, None, 0, str(exc)
    except (NonConvergenceError, ResolutionError, CohomologyError, ResonanceError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        return False, "divergence", None, None, 0, str(exc)
    _, err = invariance_error(res.K, fam_e, 0.0, check=False)
    if not res.report.green:
        return False, _reason_from_checks(res.report.checks), err, res.K.mu, res.iterations, "report not green"
    if err > cfg.tol:
        return False, "divergence", err, res.K.mu, res.iterations, "final residual above tolerance"
    return True, "", err, res.K.mu, res.iterations, ""


def validate_at_epsilon(fam: ConformalMapFamily, expansion: Optional[LindstedtExpansion], epsilon,
                        dp: Optional[DiophantineParams] = None, sp: Optional[DomainSetParams] = None,
                        cfg: Optional[SolverConfig] = None, use_bundles: bool = True,
                        modes="auto") -> ValidationResult:
    """Accept or reject one eps.  Rejections carry exactly one reason from ``REASONS``.

    ``modes="auto"`` picks the truncation by :func:`modes_for_eps`; an integer
    fixes it; ``None`` keeps ``cfg.n_modes``.
    """
    dp = dp or DiophantineParams(omega=fam.omega)
    sp = sp or DomainSetParams()
    cfg = cfg or scan_solver_config()
    eps = complex(epsilon)
    if modes == "auto":
        cfg = replace(cfg, n_modes=modes_for_eps(eps))
    elif modes is not None:
        cfg = replace(cfg, n_modes=int(modes))
    lam = complex(fam.lam_spec(eps))
    mu_series = expansion.mu_at(eps) if expansion is not None else None
    try:
        inside, diag = in_domain_G(eps, fam.lam_spec, dp, sp)
    except ResonanceError as exc:
        return ValidationResult(eps, lam, np.inf, np.inf, False, "diophantine-threshold",
                                mu_series=mu_series, detail=str(exc), dio_inside=False)
    base = dict(epsilon=eps, lam=lam, nu=diag.nu, nu_product=diag.product, mu_series=mu_series)
    if not inside:
        return ValidationResult(accepted=False, reason="diophantine-threshold", dio_inside=False,
                                detail=f"nu * |lambda - 1|^(N+1) = {diag.product:.3e} > A", **base)
    if eps == 0:
        # symplectic-limit path: the exact torus needs no Newton step
        fam0 = fam.with_eps(0.0)
        K = exact_torus(fam0, cfg.grid())
        _, err = invariance_error(K, fam0, 0.0)
        return ValidationResult(accepted=bool(err <= cfg.tol), reason="" if err <= cfg.tol else "divergence",
                                residual=err, mu_e=K.mu, detail="symplectic-limit", **base)
    fam_e = fam.with_eps(eps)
    ok, reason, err, mu, iters, detail = _newton_verdict(fam_e, expansion, eps, cfg.grid(), cfg, use_bundles)
    return ValidationResult(accepted=ok, reason=reason, residual=err, mu_e=mu, iterations=iters,
                            detail=detail, **base)


# ----------------------------------------------------------------------------- rasters

@dataclass(frozen=True)
class GridSpec:
    """Sample points over the disc |eps| <= r0.

    ``cartesian``: n x n tensor grid on [-r0, r0]^2 clipped to the disc.
    ``polar``: n_r radii r0 (i+1)/n_r times n_theta equispaced angles, plus the origin.
    """

    kind: str = "cartesian"
    n: int = 100
    r0: float = 0.1
    n_r: int = 20
    n_theta: int = 64

    def __post_init__(self):
        if self.kind not in ("cartesian", "polar"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.r0 <= 0 or self.n < 1:
            raise ValueError("grid needs r0 > 0 and n >= 1")

    def points(self) -> np.ndarray:
        if self.kind == "cartesian":
            x = np.linspace(-self.r0, self.r0, self.n)
            X, Y = np.meshgrid(x, x, indexing="xy")
            z = (X + 1j * Y).ravel()
            return z[np.abs(z) <= self.r0 * (1 + 1e-12)]
        r = self.r0 * np.arange(1, self.n_r + 1) / self.n_r
        t = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        z = (r[:, None] * np.exp(1j * t[None, :])).ravel()
        return np.concatenate([[0.0 + 0.0j], z])


@dataclass
class DomainRaster:
    points: np.ndarray
    results: list
    threshold_A: float
    order_N: int

    @property
    def accepted(self) -> np.ndarray:
        return np.array([r.accepted for r in self.results], dtype=bool)

    def counts(self):
        out = {"samples": len(self.results), "accepted": int(self.accepted.sum())}
        for reason in REASONS:
            out[reason] = sum(1 for r in self.results if r.reason == reason)
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for i, r in enumerate(self.results):
            mu = complex(r.mu_e) if r.mu_e is not None else complex(np.nan, np.nan)
            w.writerow([i, repr(r.epsilon.real), repr(r.epsilon.imag), repr(r.lam.real), repr(r.lam.imag),
                        repr(float(r.nu)), repr(float(r.nu_product)), int(r.accepted), r.reason,
                        "" if r.residual is None else repr(float(r.residual)),
                        repr(mu.real), repr(mu.imag), r.iterations])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _chunk_job(args):
    fam, expansion, pts, dp, sp, cfg, use_bundles, modes = args
    return [validate_at_epsilon(fam, expansion, z, dp, sp, cfg, use_bundles, modes) for z in pts]


def scan_analyticity_domain(fam: ConformalMapFamily, expansion: Optional[LindstedtExpansion],
                            grid_spec: GridSpec, dp: Optional[DiophantineParams] = None,
                            sp: Optional[DomainSetParams] = None, cfg: Optional[SolverConfig] = None,
                            workers: Optional[int] = None, use_bundles: bool = True,
                            chunk: int = 64, modes="auto") -> DomainRaster:
    """Validate every raster point; results are merged in grid order regardless of ``workers``."""
    dp = dp or DiophantineParams(omega=fam.omega)
    sp = sp or DomainSetParams(r0=grid_spec.r0)
    cfg = cfg or scan_solver_config()
    pts = grid_spec.points()
    jobs = [(fam, expansion, pts[i:i + chunk], dp, sp, cfg, use_bundles, modes) for i in range(0, len(pts), chunk)]
    workers = workers if workers is not None else (os.cpu_count() or 1)
    if workers <= 1:
        parts = [_chunk_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_chunk_job, jobs))
    results = [r for p in parts for r in p]
    return DomainRaster(pts, results, sp.threshold_A, sp.order_N)


def restrict_raster(raster: DomainRaster, threshold_A: float) -> DomainRaster:
    """The raster for a smaller threshold A, reusing the Newton verdicts.

    Newton runs do not depend on A (the seed is the same series), so only the
    Diophantine test is re-evaluated.  Raising A above the original value
    would need fresh Newton runs and is refused.
    """
    if threshold_A > raster.threshold_A:
        raise ValueError("restrict_raster only lowers A; rescan for a larger threshold")
    out = []
    for r in raster.results:
        if r.dio_inside and r.nu_product > threshold_A:
            r = replace(r, accepted=False, reason="diophantine-threshold", dio_inside=False,
                        detail=f"nu * |lambda - 1|^(N+1) = {r.nu_product:.3e} > A")
        out.append(r)
    return DomainRaster(raster.points, out, threshold_A, raster.order_N)
