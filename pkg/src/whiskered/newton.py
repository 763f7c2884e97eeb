"""Quasi-Newton solver for whiskered invariant tori of conformally symplectic maps.

One step linearizes ``f_mu(K) - K(theta + omega) = e`` in the adapted frame
``F(theta) = [B_s | DK | v | B_u]``.  In frame coordinates ``W = F^{-1} Delta``
the linearized equation decouples into

* center:  ``W_1 - W_1(th+w) = -S W_2 - e~_1 - A~_1 beta`` and
  ``lam W_2 - W_2(th+w) = -e~_2 - A~_2 beta`` (two cohomology equations plus
  a 2x2 system for the averages of ``W_2`` and ``beta``),
* stable / unstable: contracting fixed points summed as geometric series,

where ``e~ = F^{-1}(th+w) e`` and ``A~ = F^{-1}(th+w) D_mu f``.  The torsion S
and the decoupling come from :mod:`whiskered.reducibility`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace, asdict
from typing import Optional

import numpy as np
from scipy import optimize

from .cocycle import (Cocycle, FrameError, HyperbolicityError, Rates, ResolutionError,
                      TrichotomySplitting, close_splitting, estimate_rates,
                      splitting_invariance_error)
from .fourier import (CohomologyError, FourierSeries, ResonanceError, SpectralGrid, frob_condition,
                      solve_cohomology)
from .models import ConformalMapFamily, DomainMarginError
from .reducibility import build_frame
from .torus import TorusEmbedding

__all__ = [
    "SolverConfig", "ConditionReport", "TorusEmbedding", "LinearizedProblem", "KamResult",
    "TwistError", "NonConvergenceError", "invariance_error", "solve_cohomology",
    "solve_center_equation", "solve_stable_equation", "solve_unstable_equation",
    "newton_step", "run_kam_iteration", "normalize_phase", "schedule", "exact_torus",
    "reference_splitting", "cocycle_of", "continue_in_eps", "ContinuationResult",
]


class TwistError(ArithmeticError):
    """The twist matrix is singular or too badly conditioned."""


class NonConvergenceError(ArithmeticError):
    """Newton iteration did not reach the tolerance."""


@dataclass
class SolverConfig:
    n_modes: int = 256
    n_grid: Optional[int] = None
    grid_factor: int = 4
    tol: float = 1e-11
    tol_split: float = 1e-11
    max_iter: int = 20
    rho0: float = 0.002
    rho_final: float = 0.001
    tau: float = 1.2
    quad_guard: float = 1.5
    rate_samples: int = 64
    rate_horizon: int = 60
    rates_every_iteration: bool = True
    max_twist_inv: float = 1e6
    max_frame_cond: float = 1e8
    tail_fraction: float = 0.1
    series_max_terms: int = 400
    split_max_iter: int = 200

    def grid(self) -> SpectralGrid:
        return SpectralGrid(self.n_modes, self.n_grid or self.grid_factor * self.n_modes)

    @property
    def delta0(self) -> float:
        return (self.rho0 - self.rho_final) / 2.0


def schedule(cfg: SolverConfig):
    """Generator of (rho_j, delta_j) with delta_j = delta_0 / 2^(j+2)."""
    rho = cfg.rho0
    j = 0
    while True:
        d = cfg.delta0 / 2.0 ** (j + 2)
        yield rho, d
        rho -= d
        j += 1


def exact_torus(fam: ConformalMapFamily, grid: SpectralGrid, omega: Optional[float] = None):
    """The eps = 0 torus K_0(theta) = theta e_x + (0, omega, 0, ...) and mu_0."""
    omega = fam.omega if omega is None else omega
    p0, mu0 = fam.exact_torus(omega)
    return TorusEmbedding.from_constant(p0, mu0, omega, grid, fam.lift)


def reference_splitting(fam: ConformalMapFamily, grid: SpectralGrid, omega: Optional[float] = None):
    R, dims = fam.reference_splitting()
    return TrichotomySplitting.reference(grid, fam.omega if omega is None else omega, R, dims)


def _c(x):
    x = complex(x)
    return [x.real, x.imag]


# ----------------------------------------------------------------------------- residuals

def invariance_error(K: TorusEmbedding, fam: ConformalMapFamily, rho: float = 0.0, check: bool = True):
    """``e = f_mu(K) - K(theta + omega)`` on the grid and its analytic norm (all grid modes)."""
    z = K.values()
    if check:
        fam.check_domain(z)
    disp = fam.displacement(z, K.mu, check=False)
    e = K.P + disp - K.grid.shift(K.P, K.omega) - K.omega * K.lift
    return e, K.grid.norm(e, rho)


def cocycle_of(K: TorusEmbedding, fam: ConformalMapFamily) -> Cocycle:
    return Cocycle(fam.jacobian(K.values(), K.mu, check=False), K.grid, K.omega)


# ----------------------------------------------------------------------------- linear solves

@dataclass
class CenterSolution:
    W1: np.ndarray
    W2: np.ndarray
    beta: complex
    twist: np.ndarray
    twist_inv_norm: float


def solve_center_system(e1, e2, A1, A2, S, lam, omega, grid: SpectralGrid,
                        max_twist_inv: float = 1e6) -> CenterSolution:
    """Center equations in the reduced frame (d = 1: all inputs scalar grid functions)."""
    mean = np.mean
    e2_0 = e2 - mean(e2)
    A2_0 = A2 - mean(A2)
    # lam W - W(th+w) = -X^0  <=>  W(th+w) - lam W = X^0
    Wa0 = solve_cohomology(e2_0, lam, omega, grid)
    Wb0 = solve_cohomology(A2_0, lam, omega, grid)
    if abs(lam - 1.0) != 0:
        # zero-average right-hand sides give zero-average solutions
        Wa0 = Wa0 - mean(Wa0)
        Wb0 = Wb0 - mean(Wb0)
    twist = np.array([[mean(S), mean(S * Wb0) + mean(A1)],
                      [lam - 1.0, mean(A2)]], dtype=complex)
    try:
        tinv = np.linalg.inv(twist)
    except np.linalg.LinAlgError as exc:
        raise TwistError("twist degeneracy: singular twist matrix") from exc
    tnorm = float(np.abs(tinv).sum(axis=1).max())
    if not np.isfinite(tnorm) or tnorm > max_twist_inv:
        raise TwistError(f"twist degeneracy: |S^-1| = {tnorm:.3e}")
    rhs = np.array([-mean(S * Wa0) - mean(e1), -mean(e2)], dtype=complex)
    W2bar, beta = tinv @ rhs
    W2 = W2bar + Wa0 + beta * Wb0
    # W1 - W1(th+w) = -(S W2 + e1 + A1 beta)  (average removed by the system above)
    rhs1 = S * W2 + e1 + A1 * beta
    rhs1 = rhs1 - mean(rhs1)
    W1 = solve_cohomology(rhs1, 1.0, omega, grid)
    return CenterSolution(W1, W2, complex(beta), twist, tnorm)


def _block_sup(L):
    return float(np.max(np.linalg.norm(L, ord=2, axis=(-2, -1)))) if L.size else 0.0


def _series_sum(first, step, tol, bound, max_terms, what):
    """Sum ``first + step(first) + step(step(first)) + ...``."""
    total = first.copy()
    term = first
    prev = np.max(np.abs(term)) if term.size else 0.0
    q = bound if bound < 1 else None
    hist = [prev]
    for k in range(max_terms):
        size = hist[-1]
        rate = q if q is not None else (hist[-1] / hist[-2] if len(hist) > 1 and hist[-2] > 0 else 0.5)
        if size == 0 or (rate < 1 and size <= tol * (1 - rate)):
            return total, k
        term = step(term)
        total = total + term
        hist.append(float(np.max(np.abs(term))))
        if len(hist) > 30 and hist[-1] >= hist[-30] and hist[-1] > tol:
            raise HyperbolicityError(f"non-contractive {what} block")
    raise HyperbolicityError(f"{what} series did not converge in {max_terms} terms")


def solve_stable_equation(g, Lam_s, grid: SpectralGrid, omega: float, tol: float = 1e-15,
                          max_terms: int = 400):
    """Solve ``Lam_s W - W(th+w) = -g`` by ``W = sum_k (Lam_s ...)(th-w) g(th-(k+1)w)``.

    ``g`` has shape (G, ds), ``Lam_s`` shape (G, ds, ds).
    """
    if g.shape[-1] == 0:
        return g.copy()
    first = grid.shift(g, -omega)
    step = lambda t: grid.shift(np.einsum("gij,gj->gi", Lam_s, t), -omega)
    W, _ = _series_sum(first, step, tol, _block_sup(Lam_s), max_terms, "stable")
    return W


def solve_unstable_equation(g, Lam_u, grid: SpectralGrid, omega: float, tol: float = 1e-15,
                            max_terms: int = 400):
    """Solve ``Lam_u W - W(th+w) = -g`` by ``W = -sum_k Lam_u^{-1} ... g(th+kw)``."""
    if g.shape[-1] == 0:
        return g.copy()
    inv = np.linalg.inv(Lam_u)
    first = -np.einsum("gij,gj->gi", inv, g)
    step = lambda t: np.einsum("gij,gj->gi", inv, grid.shift(t, omega))
    W, _ = _series_sum(first, step, tol, _block_sup(inv), max_terms, "unstable")
    return W


@dataclass
class LinearizedProblem:
    """Everything needed to solve ``Df Delta + D_mu f beta - Delta(th+w) = -e`` along K."""

    K: TorusEmbedding
    fam: ConformalMapFamily
    splitting: TrichotomySplitting
    F: np.ndarray
    Fs_inv: np.ndarray
    Lam: np.ndarray
    S: np.ndarray
    A: np.ndarray
    frame: object
    lam: complex
    frame_cond: float = float("nan")

    @classmethod
    def build(cls, K: TorusEmbedding, fam: ConformalMapFamily, splitting: TrichotomySplitting,
              Df=None, cond_limit: float = 1e8):
        grid = K.grid
        if Df is None:
            Df = fam.jacobian(K.values(), K.mu, check=False)
        fr = build_frame(K, fam, splitting, with_torsion=False, cond_limit=cond_limit)
        Bs, _, Bu = splitting.bases()
        F = np.concatenate([Bs, fr.M, Bu], axis=2)
        Ks = K.translate(K.omega)
        ss = splitting.shifted(K.omega)
        frs = build_frame(Ks, fam, ss, with_torsion=False, cond_limit=cond_limit, check=False)
        Bs2, _, Bu2 = ss.bases()
        Fs = np.concatenate([Bs2, frs.M, Bu2], axis=2)
        cond = frob_condition(F)
        if not np.isfinite(cond) or cond > cond_limit:
            raise FrameError(f"adapted frame near singular (cond {cond:.3e})")
        Fs_inv = np.linalg.inv(Fs)
        Lam = Fs_inv @ Df @ F
        lam = fam.lam
        S = (np.swapaxes(frs.P, 1, 2) @ (Df @ fr.v) - lam * np.swapaxes(frs.P, 1, 2) @ frs.v)[:, 0, 0]
        fr.S = S
        A = Fs_inv @ fam.mu_derivative(K.values())
        return cls(K, fam, splitting, F, Fs_inv, Lam, S, A[:, :, 0], fr, lam, cond)

    @property
    def dims(self):
        return self.splitting.dims

    def reduced(self, e):
        return np.einsum("gij,gj->gi", self.Fs_inv, e)

    def solve(self, e, tol: float = 1e-15, max_twist_inv: float = 1e6, max_terms: int = 400):
        """Return ``(Delta, beta, parts)`` for the grid error ``e``."""
        grid, w = self.K.grid, self.K.omega
        ds, dc, du = self.dims
        et = self.reduced(e)
        sl_s, sl_c, sl_u = self.splitting.slices()
        c = solve_center_system(et[:, ds], et[:, ds + 1], self.A[:, ds], self.A[:, ds + 1],
                                self.S, self.lam, w, grid, max_twist_inv)
        beta = c.beta
        gs = et[:, sl_s] + self.A[:, sl_s] * beta
        gu = et[:, sl_u] + self.A[:, sl_u] * beta
        Ws = solve_stable_equation(gs, self.Lam[:, sl_s, sl_s], grid, w, tol, max_terms)
        Wu = solve_unstable_equation(gu, self.Lam[:, sl_u, sl_u], grid, w, tol, max_terms)
        W = np.concatenate([Ws, c.W1[:, None], c.W2[:, None], Wu], axis=1)
        Delta = grid.truncate(np.einsum("gij,gj->gi", self.F, W))
        return Delta, beta, {"W": W, "center": c, "Ws": Ws, "Wu": Wu}

    def linear_residual(self, Delta, beta, e, Df=None):
        """``Df Delta + D_mu f beta - Delta(th+w) + e`` on the grid."""
        if Df is None:
            Df = self.fam.jacobian(self.K.values(), self.K.mu, check=False)
        dmu = self.fam.mu_derivative(self.K.values())[:, :, 0]
        return np.einsum("gij,gj->gi", Df, Delta) + dmu * beta - self.K.grid.shift(Delta, self.K.omega) + e


def solve_center_equation(e, lp: LinearizedProblem, max_twist_inv: float = 1e6):
    """Center part of the Newton correction: ``(W^c, Delta^c, beta)``."""
    ds = lp.dims[0]
    et = lp.reduced(e)
    c = solve_center_system(et[:, ds], et[:, ds + 1], lp.A[:, ds], lp.A[:, ds + 1], lp.S, lp.lam,
                            lp.K.omega, lp.K.grid, max_twist_inv)
    Wc = np.stack([c.W1, c.W2], axis=1)
    Dc = np.einsum("gij,gj->gi", lp.frame.M, Wc)
    return Wc, Dc, c.beta, c


# ----------------------------------------------------------------------------- reports

H3_PRIME = "lambda_- < lambda lambda_+ < lambda_c^-"


@dataclass
class ConditionReport:
    iteration: int
    rho: float
    error: float
    error_h: float
    twist: list
    twist_inv_norm: float
    DK_norm: float
    N_norm: float
    frame_cond: float
    M_cond: float
    domain_margin: float
    S_bar: list
    rates: Optional[dict] = None
    h3_prime: Optional[dict] = None
    tail: float = 0.0
    checks: dict = field(default_factory=dict)

    @property
    def green(self) -> bool:
        return all(self.checks.values()) if self.checks else False

    def as_dict(self):
        d = asdict(self)
        d["green"] = self.green
        return d


def _rates_checks(rates: Rates, lam, rel=1e-8):
    a = abs(complex(lam))
    return {
        "trichotomy": rates.trichotomy_ok(),
        "center_brackets_lambda": bool(rates.lam_c_minus <= a * (1 + rel) and a <= rates.lam_c_plus * (1 + rel)),
    }


def make_report(it, rho, err, err_h, lp: LinearizedProblem, fam, K, cfg: SolverConfig, twist, tinv,
                rates: Optional[Rates] = None):
    grid = K.grid
    DK = K.DK()
    N = lp.frame.N[:, 0, 0]
    rep = ConditionReport(
        iteration=it, rho=rho, error=float(err), error_h=float(err_h),
        twist=[[_c(x) for x in row] for row in np.asarray(twist)], twist_inv_norm=float(tinv),
        DK_norm=grid.norm(DK[:, :, 0], rho), N_norm=grid.norm(N, rho),
        frame_cond=float(lp.frame_cond), M_cond=float(lp.frame.M_cond),
        domain_margin=fam.domain_margin(K.values()), S_bar=_c(np.mean(lp.S)),
        tail=grid.tail_norm(K.P, rho),
    )
    checks = {
        "finite": bool(np.isfinite([rep.error, rep.error_h, rep.twist_inv_norm, rep.DK_norm, rep.N_norm]).all()),
        "twist": rep.twist_inv_norm <= cfg.max_twist_inv,
        "frame": rep.frame_cond <= cfg.max_frame_cond and rep.M_cond <= cfg.max_frame_cond,
        "domain_margin": rep.domain_margin >= fam.eta / 2,
    }
    if rates is not None:
        rep.rates = rates.as_dict()
        lam = abs(complex(fam.lam))
        rep.h3_prime = {"statement": H3_PRIME, "enforced": False,
                        "left": bool(rates.lam_minus < lam * rates.lam_plus),
                        "right": bool(lam * rates.lam_plus < rates.lam_c_minus)}
        checks.update(_rates_checks(rates, fam.lam))
    rep.checks = checks
    return rep


# ----------------------------------------------------------------------------- step / driver

@dataclass
class StepInfo:
    beta: complex
    correction_norm: float
    error_before: float
    error_h_seed: float
    split_iters: int
    twist: np.ndarray
    twist_inv_norm: float


def _prepare(K, fam, splitting, cfg: SolverConfig, rho):
    cyc = cocycle_of(K, fam)
    err_h = splitting_invariance_error(cyc, splitting, rho)
    closed, log = close_splitting(cyc, splitting, cfg.tol_split, max_iter=cfg.split_max_iter, rho=rho,
                                  tail_budget=None, seed_error=err_h)
    lp = LinearizedProblem.build(K, fam, closed, Df=cyc.values, cond_limit=cfg.max_frame_cond)
    return cyc, closed, log, err_h, lp


def newton_step(K: TorusEmbedding, fam: ConformalMapFamily, splitting: TrichotomySplitting,
                rho: float = 0.0, delta: float = 0.0, cfg: Optional[SolverConfig] = None, e=None):
    """One quasi-Newton step.  Returns ``(K_new, splitting_closed, info, lp)``."""
    cfg = cfg or SolverConfig()
    if e is None:
        e, err = invariance_error(K, fam, rho)
    else:
        err = K.grid.norm(e, rho)
    cyc, closed, log, err_h, lp = _prepare(K, fam, splitting, cfg, rho)
    e_trunc = K.grid.truncate(e)
    Delta, beta, parts = lp.solve(e_trunc, tol=1e-3 * cfg.tol, max_twist_inv=cfg.max_twist_inv,
                                  max_terms=cfg.series_max_terms)
    Knew = replace(K, P=K.P + Delta, mu=K.mu + beta, rho=rho - delta)
    c = parts["center"]
    info = StepInfo(beta, K.grid.norm(Delta, rho - delta), err, err_h, len(log.iterations),
                    c.twist, c.twist_inv_norm)
    return Knew, closed, info, lp


@dataclass
class KamResult:
    K: TorusEmbedding
    splitting: TrichotomySplitting
    report: ConditionReport
    history: list
    converged: bool
    iterations: int
    errors: list
    warnings: list
    lp: Optional[LinearizedProblem] = None
    estimates: dict = field(default_factory=dict)

    @property
    def mu(self):
        return self.K.mu

    def to_json(self, include_K: bool = True):
        d = {
            "converged": self.converged, "iterations": self.iterations,
            "errors": self.errors, "warnings": self.warnings,
            "mu": _c(self.K.mu), "history": self.history,
            "report": self.report.as_dict() if self.report else None,
            "estimates": self.estimates,
            "splitting": self.splitting.to_json() if self.splitting is not None else None,
        }
        if include_K:
            d["K"] = self.K.to_json()
        return d


def run_kam_iteration(K0: TorusEmbedding, fam: ConformalMapFamily, splitting0: TrichotomySplitting,
                      cfg: Optional[SolverConfig] = None, raise_on_failure: bool = True,
                      final_rates: bool = True) -> KamResult:
    """Iterate quasi-Newton steps along the loss-of-domain schedule until ``error <= tol``."""
    cfg = cfg or SolverConfig()
    K = replace(K0, rho=cfg.rho0)
    s = splitting0
    history, errors, warnings = [], [], []
    sched = schedule(cfg)
    rho, delta = next(sched)
    e, err = invariance_error(K, fam, rho)
    err0 = err
    converged = False
    it = 0
    lp = None
    report = None
    tail_budget = cfg.tail_fraction * cfg.tol
    for it in range(cfg.max_iter + 1):
        errors.append(err)
        if not np.isfinite(err):
            break
        if err <= cfg.tol:
            converged = True
            break
        if it == cfg.max_iter:
            break
        Knew, s, info, lp = newton_step(K, fam, s, rho, delta, cfg, e)
        rates = None
        if cfg.rates_every_iteration:
            rates = estimate_rates(cocycle_of(K, fam), s, cfg.rate_horizon, cfg.rate_samples)
        report = make_report(it, rho, err, info.error_h_seed, lp, fam, K, cfg, info.twist,
                             info.twist_inv_norm, rates)
        rho, delta = next(sched)
        K = Knew
        e, err_new = invariance_error(K, fam, rho)
        tail = K.grid.tail_norm(K.P, rho)
        rec = {"iter": it, "rho": rho, "error": err, "error_new": err_new, "error_h": info.error_h_seed,
               "beta": _c(info.beta), "correction": info.correction_norm, "split_iters": info.split_iters,
               "twist_inv_norm": info.twist_inv_norm, "tail": tail, "green": report.green}
        history.append(rec)
        if err_new > err ** cfg.quad_guard and err_new > cfg.tol:
            warnings.append(f"divergence warning at iteration {it}: error {err_new:.3e} > "
                            f"{err:.3e}^{cfg.quad_guard}")
        if tail > tail_budget and err_new <= 1e3 * cfg.tol:
            raise ResolutionError(f"resolution exhausted: tail norm {tail:.3e} exceeds {tail_budget:.3e}")
        err = err_new
    if not converged:
        if raise_on_failure:
            raise NonConvergenceError(f"no convergence after {it} iterations (error {err:.3e})")
        return KamResult(K, s, report, history, False, it, errors, warnings, lp)
    # final invariant splitting and condition report on the converged torus
    cyc, s, log, err_h, lp = _prepare(K, fam, s, cfg, rho)
    _, _, _, c = solve_center_equation(np.zeros_like(K.P), lp, max_twist_inv=np.inf)
    rates = estimate_rates(cyc, s, cfg.rate_horizon, cfg.rate_samples) if final_rates else None
    s = replace(s, rates=rates)
    report = make_report(it, rho, err, err_h, lp, fam, K, cfg, c.twist, c.twist_inv_norm, rates)
    if report.twist_inv_norm > cfg.max_twist_inv:
        raise TwistError(f"twist degeneracy: |S^-1| = {report.twist_inv_norm:.3e}")
    res = KamResult(K, s, report, history, True, it, errors, warnings, lp)
    # a-posteriori constants of the existence conclusion
    dK = K.grid.norm(K.P - K0.P, cfg.rho_final)
    if err0 > 0:
        res.estimates = {
            "initial_error": err0,
            "K_distance": dK,
            "mu_distance": abs(complex(K.mu - K0.mu)),
            "C_K": dK / (err0 * cfg.delta0 ** (-cfg.tau)) if cfg.delta0 > 0 else None,
            "C_mu": abs(complex(K.mu - K0.mu)) / err0,
        }
    return res


# ----------------------------------------------------------------------------- uniqueness

def normalize_phase(K_candidate: TorusEmbedding, K_reference: TorusEmbedding, frame_ref,
                    center_index: int = None, tol: float = 1e-12, sigma0: Optional[float] = None):
    """Find sigma with  mean([F^{-1} (K_cand o T_sigma - K_ref)]_tangent) = 0.

    ``frame_ref`` is either a :class:`LinearizedProblem` of the reference
    solution or an array of frames ``(G, m, m)`` (then ``center_index`` gives
    the tangent row).
    """
    if isinstance(frame_ref, LinearizedProblem):
        F = frame_ref.F
        ic = frame_ref.dims[0] if center_index is None else center_index
    else:
        F = np.asarray(frame_ref)
        ic = 0 if center_index is None else center_index
    Finv_row = np.linalg.inv(F)[:, ic, :]
    Kref = K_reference.values()

    def g(sigma):
        d = K_candidate.shifted_values(sigma) - Kref
        return float(np.real(np.mean(np.einsum("gj,gj->g", Finv_row, d))))

    if sigma0 is None:
        sigma0 = -g(0.0)
    try:
        sol = optimize.root_scalar(g, x0=sigma0, x1=sigma0 + 1e-4, method="secant", xtol=1e-15,
                                   maxiter=100)
    except (RuntimeError, ValueError) as exc:
        raise NonConvergenceError(f"phase normalization failed: {exc}") from exc
    if not sol.converged or abs(g(sol.root)) > tol:
        raise NonConvergenceError("phase normalization failed: candidates not in one translation family")
    sigma = float(sol.root)
    return sigma, K_candidate.translate(sigma)


# ----------------------------------------------------------------------------- continuation

_REJECTIONS = (NonConvergenceError, TwistError, HyperbolicityError, FrameError, ResolutionError,
               CohomologyError, ResonanceError, DomainMarginError, np.linalg.LinAlgError)


@dataclass
class ContinuationResult:
    points: list            # dicts: eps, mu, error, iterations, green
    breakdown: bool
    breakdown_eps: Optional[float]
    reason: str
    last: Optional[KamResult] = None

    def to_json(self):
        return {"points": self.points, "breakdown": self.breakdown,
                "breakdown_eps": self.breakdown_eps, "reason": self.reason}


def continue_in_eps(fam: ConformalMapFamily, eps_start: float, eps_end: float, step: float,
                    cfg: Optional[SolverConfig] = None, min_step: Optional[float] = None,
                    K0: Optional[TorusEmbedding] = None, splitting0: Optional[TrichotomySplitting] = None,
                    final_rates: bool = False) -> ContinuationResult:
    """March eps from ``eps_start`` to ``eps_end``, seeding each solve with the previous solution.

    A failed solve halves the step; once the step falls below ``min_step``
    the march stops with ``breakdown=True``.
    """
    cfg = cfg or SolverConfig()
    grid = cfg.grid()
    min_step = abs(step) / 64 if min_step is None else min_step
    direction = 1.0 if eps_end >= eps_start else -1.0
    h = abs(step)
    K = K0 if K0 is not None else exact_torus(fam.with_eps(0.0), grid)
    s = splitting0 if splitting0 is not None else reference_splitting(fam, grid)
    points = []
    last = None
    eps = float(eps_start)
    target = eps
    first = True
    while True:
        try:
            res = run_kam_iteration(K, fam.with_eps(target), s, cfg, final_rates=final_rates)
        except _REJECTIONS as exc:
            if first:
                return ContinuationResult(points, True, target, f"{type(exc).__name__}: {exc}", last)
            h /= 2.0
            if h < min_step:
                return ContinuationResult(points, True, target, f"{type(exc).__name__}: {exc}", last)
            target = eps + direction * h
            continue
        first = False
        eps = target
        K, s, last = res.K, res.splitting, res
        points.append({"eps": eps, "mu": _c(res.K.mu), "error": res.errors[-1],
                       "iterations": res.iterations, "green": res.report.green})
        if direction * (eps_end - eps) <= 1e-15:
            return ContinuationResult(points, False, None, "", last)
        target = eps + direction * min(h, abs(eps_end - eps))
