"""Cocycles over a rotation, trichotomy splittings and the graph transform.

A splitting is stored as four graph maps over a reference frame ``R(theta)``
whose columns are ordered stable | center | unstable.  In reference
coordinates ``z = R^{-1} v``:

* ``E^s``  is spanned by ``[I; A_s]``   (``A_s``  maps s  -> s-hat),
* ``E^sh`` is spanned by ``[A_sh; I]``  (``A_sh`` maps s-hat -> s),
* ``E^u``  is spanned by ``[A_u; I]``   (``A_u``  maps u -> u-hat),
* ``E^uh`` is spanned by ``[I; A_uh]``  (``A_uh`` maps u-hat -> u),

with ``s-hat = c + u`` and ``u-hat = s + c``.  The center bundle is the
intersection ``E^sh`` with ``E^uh``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .fourier import FourierSeries, SpectralGrid, frob_condition


class HyperbolicityError(ArithmeticError):
    """The graph transform failed to contract (hyperbolicity too weak)."""


class FrameError(ArithmeticError):
    """A frame built from the splitting is numerically singular."""


class ResolutionError(ArithmeticError):
    """Fourier tails exceed their budget (resolution exhausted)."""


FRAME_COND_LIMIT = 1e8


@dataclass
class Cocycle:
    """Matrix cocycle ``gamma(theta)`` over the rotation by ``omega``, stored on a grid."""

    values: np.ndarray
    grid: SpectralGrid
    omega: float

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    @classmethod
    def from_series(cls, series: FourierSeries, omega: float, n_grid: Optional[int] = None):
        g = SpectralGrid(max(series.n_modes, 1), n_grid)
        return cls(g.from_series(series), g, omega)

    @classmethod
    def constant(cls, matrix, omega: float, n_modes: int = 8):
        g = SpectralGrid(n_modes)
        m = np.asarray(matrix, dtype=complex)
        return cls(np.broadcast_to(m, (g.n_grid,) + m.shape).copy(), g, omega)

    def generator(self) -> FourierSeries:
        return FourierSeries.from_grid(self.values, (self.grid.n_grid - 1) // 2)

    def at(self, theta):
        return self.grid.evaluate(self.values, theta, all_modes=True)

    def power(self, j: int, theta):
        """``Gamma^j(theta) = gamma(theta + (j-1) omega) ... gamma(theta)`` for j >= 0."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.broadcast_to(np.eye(self.dim, dtype=complex), theta.shape + (self.dim, self.dim)).copy()
        for i in range(j):
            out = self.at(theta + i * self.omega) @ out
        return out


# ----------------------------------------------------------------------------- splitting

@dataclass
class Rates:
    lam_minus: float
    lam_c_minus: float
    lam_c_plus: float
    lam_plus: float
    C0: float
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {"lambda_minus": self.lam_minus, "lambda_c_minus": self.lam_c_minus,
                "lambda_c_plus": self.lam_c_plus, "lambda_plus": self.lam_plus, "C0": self.C0}

    def trichotomy_ok(self) -> bool:
        lm, cm, cp, lp = self.lam_minus, self.lam_c_minus, self.lam_c_plus, self.lam_plus
        return bool(lm < cm <= cp < lp and lm < 1 < lp)


@dataclass
class TrichotomySplitting:
    grid: SpectralGrid
    omega: float
    R: np.ndarray  # (G, m, m) reference frame, stable | center | unstable columns
    dims: tuple
    A_s: np.ndarray
    A_sh: np.ndarray
    A_u: np.ndarray
    A_uh: np.ndarray
    rates: Optional[Rates] = None

    @classmethod
    def reference(cls, grid: SpectralGrid, omega: float, R, dims):
        """The reference splitting itself (all graph maps zero)."""
        R = np.asarray(R, dtype=complex)
        if R.ndim == 2:
            R = np.broadcast_to(R, (grid.n_grid,) + R.shape).copy()
        ds, dc, du = dims
        m = R.shape[-1]
        if ds + dc + du != m:
            raise ValueError("splitting dimensions do not add up to the phase dimension")
        G = grid.n_grid
        z = lambda a, b: np.zeros((G, a, b), dtype=complex)
        return cls(grid, omega, R, tuple(dims), z(m - ds, ds), z(ds, m - ds), z(m - du, du), z(du, m - du))

    @property
    def m(self) -> int:
        return self.R.shape[-1]

    def graph_maps(self):
        return {"s": self.A_s, "sh": self.A_sh, "u": self.A_u, "uh": self.A_uh}

    def with_maps(self, A_s, A_sh, A_u, A_uh, rates=None):
        return replace(self, A_s=A_s, A_sh=A_sh, A_u=A_u, A_uh=A_uh, rates=rates)

    def shifted(self, sigma: float) -> "TrichotomySplitting":
        """The splitting at theta + sigma (graph maps and frame shifted spectrally)."""
        sh = lambda a: self.grid.shift(a, sigma, truncate=False) if a.size else a
        R = self.R if _is_constant(self.R) else sh(self.R)
        return replace(self, R=R, A_s=sh(self.A_s), A_sh=sh(self.A_sh), A_u=sh(self.A_u), A_uh=sh(self.A_uh))

    # bases in reference coordinates
    def local_bases(self):
        ds, dc, du = self.dims
        m = self.m
        G = self.grid.n_grid
        eye = lambda k: np.broadcast_to(np.eye(k, dtype=complex), (G, k, k))
        Bs = np.concatenate([eye(ds), self.A_s], axis=1) if ds else np.zeros((G, m, 0), complex)
        Bu = np.concatenate([self.A_u, eye(du)], axis=1) if du else np.zeros((G, m, 0), complex)
        # center = E^sh intersected with E^uh, parameterized by the center coordinate
        Ash_c, Ash_u = self.A_sh[:, :, :dc], self.A_sh[:, :, dc:]
        Auh_s, Auh_c = self.A_uh[:, :, :ds], self.A_uh[:, :, ds:]
        if ds or du:
            lhs = np.zeros((G, ds + du, ds + du), dtype=complex)
            lhs[:, :ds, :ds] = np.eye(ds)
            lhs[:, ds:, ds:] = np.eye(du)
            lhs[:, :ds, ds:] = -Ash_u
            lhs[:, ds:, :ds] = -Auh_s
            rhs = np.concatenate([Ash_c, Auh_c], axis=1)
            sol = np.linalg.solve(lhs, rhs)
            zs, wu = sol[:, :ds], sol[:, ds:]
            Bc = np.concatenate([zs, eye(dc), wu], axis=1)
        else:
            Bc = eye(dc).copy()
        return Bs, Bc, Bu

    def frame(self, check: bool = True):
        """Ambient frame ``F = R [B_s | B_c | B_u]``."""
        Bs, Bc, Bu = self.local_bases()
        F = self.R @ np.concatenate([Bs, Bc, Bu], axis=2)
        if check:
            c = frob_condition(F)
            if not np.isfinite(c) or c > FRAME_COND_LIMIT:
                raise FrameError(f"singular splitting frame (condition number {c:.3e})")
        return F

    def bases(self):
        Bs, Bc, Bu = self.local_bases()
        return self.R @ Bs, self.R @ Bc, self.R @ Bu

    def projections(self, check: bool = True):
        F = self.frame(check)
        Finv = np.linalg.inv(F)
        out = {}
        for name, sl in zip(("s", "c", "u"), self.slices()):
            out[name] = F[:, :, sl] @ Finv[:, sl, :]
        return out

    def slices(self):
        ds, dc, du = self.dims
        return slice(0, ds), slice(ds, ds + dc), slice(ds + dc, ds + dc + du)

    def to_json(self):
        def ser(a):
            return self.grid.to_series(a).to_json() if a.size else None
        d = {"dims": list(self.dims), "omega": self.omega,
             "graph_maps": {k: ser(v) for k, v in self.graph_maps().items()}}
        if self.rates is not None:
            d["rates"] = self.rates.as_dict()
        return d


def _is_constant(a) -> bool:
    return bool(np.all(a == a[:1]))


def reference_coordinates(c: Cocycle, s: TrichotomySplitting, shift: float = 0.0):
    """``R(theta+omega)^{-1} gamma(theta) R(theta)``, optionally evaluated at theta+shift."""
    if _is_constant(s.R):
        Ri = np.linalg.inv(s.R[0])
        g = Ri @ c.values @ s.R[0]
    else:
        Rs = c.grid.shift(s.R, c.omega, truncate=False)
        g = np.linalg.solve(Rs, c.values @ s.R)
    if shift:
        g = c.grid.shift(g, shift, truncate=False)
    return g


def frame_blocks(c: Cocycle, s: TrichotomySplitting, frame=None, check: bool = True):
    """Cocycle in the splitting frame, ``F(theta+omega)^{-1} gamma(theta) F(theta)``."""
    F = s.frame(check) if frame is None else frame
    Fs = s.shifted(c.omega).frame(check=False)
    return np.linalg.solve(Fs, c.values @ F), F, Fs


def project_blocks(c: Cocycle, s: TrichotomySplitting):
    """Ambient blocks ``Pi^sigma(theta+omega) gamma Pi^sigma'(theta)`` as FourierSeries."""
    if c.dim != s.m:
        raise ValueError("splitting and cocycle dimensions differ")
    L, F, Fs = frame_blocks(c, s)
    Finv = np.linalg.inv(F)
    names = ("s", "c", "u")
    sl = s.slices()
    n = (c.grid.n_grid - 1) // 2
    out = {}
    for a, sa in zip(names, sl):
        for b, sb in zip(names, sl):
            blk = Fs[:, :, sa] @ L[:, sa, sb] @ Finv[:, sb, :]
            out[(a, b)] = FourierSeries.from_grid(blk, n)
    return out


def _ambient_offdiag_norm(c, s, rho):
    L, F, Fs = frame_blocks(c, s, check=False)
    Finv = np.linalg.inv(F)
    names = ("s", "c", "u")
    worst = 0.0
    for a, sa in zip(names, s.slices()):
        for b, sb in zip(names, s.slices()):
            if a == b or sa.stop == sa.start or sb.stop == sb.start:
                continue
            blk = Fs[:, :, sa] @ L[:, sa, sb] @ Finv[:, sb, :]
            worst = max(worst, c.grid.norm(blk, rho))
    return worst


def splitting_invariance_error(c: Cocycle, s: TrichotomySplitting, rho: float = 0.0) -> float:
    """Max over sigma != sigma' of the analytic norm of the off-diagonal blocks."""
    return _ambient_offdiag_norm(c, s, rho)


# ----------------------------------------------------------------------------- graph transform

def _lower_update(A, g, gT_shift, a, b, grid, omega, inv_bb):
    """Invariance of span[I; A] (A: b <- a) : A = g_bb^{-1} (A(th+w) (g_aa + g_ab A) - g_ba)."""
    Ap = grid.shift(A, omega)
    X = g[:, a, a] + g[:, a, b] @ A
    return inv_bb @ (Ap @ X - g[:, b, a])


def _upper_update(A, gm, a, b, grid, omega, inv_bb_m):
    """Invariance of span[A; I] (A: a <- b), written at theta - omega."""
    Am = grid.shift(A, -omega)
    X = gm[:, a, b] + gm[:, a, a] @ Am
    Y = gm[:, b, a] @ Am
    return (X - A @ Y) @ inv_bb_m


def _sup(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def graph_residuals(c: Cocycle, s: TrichotomySplitting):
    """Residuals of the four graph-map fixed-point equations (sup norm)."""
    new = _graph_step(c, s, _precompute(c, s))
    return {k: _sup(new[k] - v) for k, v in s.graph_maps().items()}


def _precompute(c, s):
    g = reference_coordinates(c, s)
    gm = c.grid.shift(g, -c.omega, truncate=False)
    ds, dc, du = s.dims
    m = s.m
    sl_s, sl_sh = slice(0, ds), slice(ds, m)
    sl_uh, sl_u = slice(0, m - du), slice(m - du, m)
    pre = {"g": g, "gm": gm, "s": (sl_s, sl_sh), "u": (sl_uh, sl_u)}
    # a graph map whose forcing block vanishes identically stays at zero
    pre["forced"] = {"s": bool(np.any(g[:, sl_sh, sl_s])), "sh": bool(np.any(gm[:, sl_s, sl_sh])),
                     "uh": bool(np.any(g[:, sl_u, sl_uh])), "u": bool(np.any(gm[:, sl_uh, sl_u]))}
    try:
        if ds:
            pre["inv_shsh"] = np.linalg.inv(g[:, sl_sh, sl_sh])
            pre["inv_shsh_m"] = np.linalg.inv(gm[:, sl_sh, sl_sh])
        if du:
            pre["inv_uu"] = np.linalg.inv(g[:, sl_u, sl_u])
            pre["inv_uu_m"] = np.linalg.inv(gm[:, sl_u, sl_u])
    except np.linalg.LinAlgError as exc:
        raise HyperbolicityError("diagonal cocycle block not invertible") from exc
    return pre


def _graph_step(c, s, pre):
    g, gm = pre["g"], pre["gm"]
    grid, w = c.grid, c.omega
    ds, dc, du = s.dims
    out = {"s": s.A_s, "sh": s.A_sh, "u": s.A_u, "uh": s.A_uh}
    live = lambda k: pre["forced"][k] or bool(np.any(out[k]))
    if ds:
        a, b = pre["s"]
        if live("s"):
            out["s"] = _lower_update(s.A_s, g, None, a, b, grid, w, pre["inv_shsh"])
        if live("sh"):
            out["sh"] = _upper_update(s.A_sh, gm, a, b, grid, w, pre["inv_shsh_m"])
    if du:
        a, b = pre["u"]  # a = u-hat, b = u
        if live("uh"):
            out["uh"] = _lower_update(s.A_uh, g, None, a, b, grid, w, pre["inv_uu"])
        if live("u"):
            out["u"] = _upper_update(s.A_u, gm, a, b, grid, w, pre["inv_uu_m"])
    return out


@dataclass
class ClosingLog:
    iterations: list
    converged: bool
    dist_to_seed: float
    seed_error: float
    final_error: float
    distance_constant: float

    def json_lines(self):
        import json
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.iterations)


def graph_distance(s1: TrichotomySplitting, s2: TrichotomySplitting, rho: float = 0.0) -> float:
    g = s1.grid
    d = 0.0
    for k, a in s1.graph_maps().items():
        b = s2.graph_maps()[k]
        if a.size:
            d = max(d, g.norm(a - b, rho))
    return d


def close_splitting(c: Cocycle, s_initial: TrichotomySplitting, tol_split: float = 1e-11,
                    max_iter: int = 200, lipschitz_window: int = 20, rho: float = 0.0,
                    tail_budget: Optional[float] = None, estimate: bool = False,
                    horizon_J: int = 60, sample_count: int = 64, seed_error: Optional[float] = None):
    """Iterate the four graph transforms jointly until the splitting is invariant.

    Returns ``(splitting, log)``.  Raises :class:`HyperbolicityError` when the
    iteration stops contracting, :class:`ResolutionError` when the graph maps
    are not resolved by the grid.
    """
    pre = _precompute(c, s_initial)
    grid = c.grid
    seed_err = splitting_invariance_error(c, s_initial, rho) if seed_error is None else seed_error
    s = s_initial
    diffs = []
    log = []
    converged = False
    for it in range(max_iter + 1):
        if it == 0 and seed_err <= tol_split:
            converged = True
            break
        # the update shifts (and thereby truncates) its input, so the
        # high modes created by the products never feed back; one final
        # truncation below returns band-limited maps
        new = _graph_step(c, s, pre)
        diff = max(_sup(new[k] - v) for k, v in s.graph_maps().items())
        s = s.with_maps(new["s"], new["sh"], new["u"], new["uh"])
        diffs.append(diff)
        rec = {"iter": it + 1, "residual": diff}
        log.append(rec)
        if not np.isfinite(diff):
            raise HyperbolicityError("hyperbolicity too weak: graph transform diverged")
        if diff <= 0.05 * tol_split:
            converged = True
            break
        if len(diffs) > lipschitz_window:
            prev = diffs[-1 - lipschitz_window]
            if diff >= prev:
                if diff < 100 * tol_split:
                    # stagnation at the rounding floor: accept it
                    converged = True
                    break
                raise HyperbolicityError(
                    f"hyperbolicity too weak: Lipschitz estimate {(diff / prev):.3g} >= 1 "
                    f"after {lipschitz_window} iterations")
    if log:
        tr = {k: (grid.truncate(v) if v.size else v) for k, v in s.graph_maps().items()}
        s = s.with_maps(tr["s"], tr["sh"], tr["u"], tr["uh"], rates=s.rates)
    if tail_budget is not None:
        for k, v in s.graph_maps().items():
            if v.size and grid.tail_norm(v, rho) > tail_budget:
                raise ResolutionError(f"resolution exhausted: tail of graph map A_{k} too large")
    final = splitting_invariance_error(c, s, rho)
    if not converged or final > tol_split:
        if not converged:
            raise HyperbolicityError(f"graph transform did not converge in {max_iter} iterations")
    dist = graph_distance(s, s_initial, rho)
    if log:
        log[-1]["dist_to_seed"] = dist
    const = dist / seed_err if seed_err > 0 else 0.0
    if estimate:
        s = replace(s, rates=estimate_rates(c, s, horizon_J, sample_count))
    return s, ClosingLog(log, converged, dist, seed_err, final, const)


# ----------------------------------------------------------------------------- rates

def _block_growth(blocks, logs_forward=True):
    """Accumulate QR log-diagonals and norm ratios along sampled orbits.

    ``blocks`` has shape (J, S, k, k): the block evaluated at theta_i + j omega.
    Returns per-sample exponents (S, k) and the per-step log norms / log
    smallest singular values of the products (J+1, S).
    """
    J, S, k, _ = blocks.shape
    Q = np.broadcast_to(np.eye(k, dtype=complex), (S, k, k)).copy()
    U = Q.copy()
    scale = np.zeros(S)
    acc = np.zeros((S, k))
    Us = np.empty((J, S, k, k), dtype=complex)
    scales = np.empty((J, S))
    for j in range(J):
        Y = blocks[j] @ Q
        Q, Rm = np.linalg.qr(Y)
        diag = np.abs(np.diagonal(Rm, axis1=-2, axis2=-1))
        with np.errstate(divide="ignore"):
            acc += np.log(diag)
        U = Rm @ U
        mx = np.max(np.abs(U), axis=(1, 2))
        mx = np.where(mx > 0, mx, 1.0)
        U = U / mx[:, None, None]
        scale += np.log(mx)
        Us[j] = U
        scales[j] = scale
    sv = np.linalg.svd(Us, compute_uv=False)
    lognorm = np.zeros((J + 1, S))
    logsmin = np.zeros((J + 1, S))
    with np.errstate(divide="ignore"):
        lognorm[1:] = np.log(sv[..., 0]) + scales
        logsmin[1:] = np.log(sv[..., -1]) + scales
    return acc / J, lognorm, logsmin


def estimate_rates(c: Cocycle, s: TrichotomySplitting, horizon_J: int = 60, sample_count: int = 64,
                   frame=None) -> Rates:
    """Growth-rate bounds for the three diagonal blocks of an invariant splitting.

    Forward rates come from the largest QR exponent, backward rates from the
    smallest, over all sampled orbits.  ``C0`` is the smallest constant that
    makes every sampled product satisfy the rate inequalities.
    """
    L, F, _ = frame_blocks(c, s, frame)
    theta0 = np.arange(sample_count) / sample_count
    pts = theta0[None, :] + c.omega * np.arange(horizon_J)[:, None]
    ev = c.grid.evaluate(L, pts, all_modes=True)  # (J, S, m, m)
    j = np.arange(horizon_J + 1)[:, None]
    detail = {}
    consts = []
    res = {}
    for name, sl in zip(("s", "c", "u"), s.slices()):
        k = sl.stop - sl.start
        if k == 0:
            continue
        blk = ev[:, :, sl, sl]
        expo, lognorm, logsmin = _block_growth(blk)
        fwd = float(np.exp(np.max(expo)))
        bwd = float(np.exp(np.min(expo)))
        cf = float(np.exp(np.max(lognorm - j * np.log(fwd))))
        cb = float(np.exp(np.max(j * np.log(bwd) - logsmin)))
        detail[name] = {"forward_rate": fwd, "backward_rate": bwd, "C_forward": cf, "C_backward": cb}
        res[name] = (fwd, bwd, cf, cb)
    lam_minus = res["s"][0] if "s" in res else 0.0
    lam_plus = res["u"][1] if "u" in res else np.inf
    lam_c_plus = res["c"][0]
    lam_c_minus = res["c"][1]
    if "s" in res:
        consts.append(res["s"][2])
    if "u" in res:
        consts.append(res["u"][3])
    consts += [res["c"][2], res["c"][3]]
    return Rates(lam_minus, lam_c_minus, lam_c_plus, lam_plus, float(max(consts)), detail)


@dataclass
class RateBound:
    xi_tilde: float
    C0_tilde: float
    lemma: str
    C: Optional[float] = None


def perturbed_rate_bound(C0: float, xi: float, a: float, C: Optional[float] = None,
                         margin: Optional[float] = None, perturbed_norms=None) -> RateBound:
    """Growth bound of a perturbed cocycle, ``xi~ = xi + C a``.

    The constant ``C`` defaults to ``4 C0`` which makes the Dyson operator a
    contraction of norm 1/4.  ``C0_tilde`` is the bound
    ``4 C0^2 a xi^{-1} xi~/(xi~ - xi)`` on the deviation ``Gamma~ - Gamma`` in
    the rate-``xi~`` norm.  ``margin`` fixes ``xi~ - xi`` directly.

    If ``a > 1/(4 C0)`` the quantitative bound does not apply; the coarse
    constants (``xi~ = 2^{-1/N}``, ``C0~ = 2 max_{l<=N} |Gamma~^l|``) are
    returned when the norms ``|Gamma~^l|, l = 1, 2, ...`` are supplied.
    """
    if a < 0 or C0 <= 0 or xi <= 0:
        raise ValueError("need a >= 0, C0 > 0 and xi > 0")
    if a > 1.0 / (4.0 * C0):
        if perturbed_norms is None:
            raise ValueError(f"precondition a <= 1/(4 C0) = {1 / (4 * C0):.3g} violated (a = {a:.3g})")
        norms = np.asarray(perturbed_norms, dtype=float)
        hit = np.nonzero(norms <= 0.5)[0]
        if hit.size == 0:
            raise ValueError("no power of the perturbed cocycle has norm <= 1/2")
        N = int(hit[0]) + 1
        return RateBound(0.5 ** (1.0 / N), 2.0 * float(np.max(norms[:N])), "general")
    C = 4.0 * C0 if C is None else C
    if a == 0:
        return RateBound(xi, C0, "precise", C)
    if margin is None:
        # a / (xi~ - xi) = 1 / C exactly; avoids 0/0 when C a underflows against xi
        xt = xi + C * a
        return RateBound(xt, 4.0 * C0 ** 2 / xi * xt / C, "precise", C)
    xt = xi + margin
    return RateBound(xt, 4.0 * C0 ** 2 * a / xi * xt / margin, "precise", C)


# ----------------------------------------------------------------------------- geometry checks

def omega_orthogonality(s: TrichotomySplitting, J):
    """Symplectic pairings between bundles, for unit basis vectors.

    Returns a dict with max |Omega(s,c)|, |Omega(u,c)|, |Omega(s_i,s_j)|,
    |Omega(u_i,u_j)| and the condition number of Omega restricted to E^c.
    """
    Bs, Bc, Bu = s.bases()
    unit = lambda B: B / np.linalg.norm(B, axis=1, keepdims=True) if B.shape[-1] else B
    Bs, Bc, Bu = unit(Bs), unit(Bc), unit(Bu)
    pair = lambda X, Y: float(np.max(np.abs(np.swapaxes(X, 1, 2) @ J @ Y))) if X.shape[-1] and Y.shape[-1] else 0.0
    Jc = np.swapaxes(Bc, 1, 2) @ J @ Bc
    return {"s_c": pair(Bs, Bc), "u_c": pair(Bu, Bc), "s_s": pair(Bs, Bs), "u_u": pair(Bu, Bu),
            "center_cond": float(np.max(np.linalg.cond(Jc)))}


def _orth_projector(B):
    Q, _ = np.linalg.qr(B)
    return Q @ np.conj(np.swapaxes(Q, 1, 2))


def splitting_distances(s1: TrichotomySplitting, s2: TrichotomySplitting):
    """Three measures of the distance between two splittings (sup over the grid).

    ``orthogonal``: max over bundles of ``|P1 - P2|`` for orthogonal projectors;
    ``cross``: max over bundles of ``|(Id - Pi1^sigma) Pi2^sigma|``;
    ``graph``: max norm of the difference of graph maps.
    """
    b1, b2 = s1.bases(), s2.bases()
    orth = 0.0
    for B1, B2 in zip(b1, b2):
        if B1.shape[-1]:
            orth = max(orth, float(np.max(np.linalg.norm(_orth_projector(B1) - _orth_projector(B2), ord=2, axis=(1, 2)))))
    p1, p2 = s1.projections(), s2.projections()
    eye = np.eye(s1.m)
    cross = max(float(np.max(np.linalg.norm((eye - p1[k]) @ p2[k], ord=2, axis=(1, 2)))) for k in p1)
    graph = max((_sup(a - s2.graph_maps()[k]) for k, a in s1.graph_maps().items() if a.size), default=0.0)
    return {"orthogonal": orth, "cross": cross, "graph": graph}
