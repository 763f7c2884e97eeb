"""Lindstedt series in eps for the torus, the drift and the invariant bundles.

Order by order, the Taylor coefficient ``F_j`` of ``f_{mu(eps), eps}(K(eps))``
computed with the unknown ``K_j, mu_j`` set to zero is exact (jets of the
closed-form model), and the new terms solve the linearized invariance
equation along the eps = 0 torus

    Df_0 K_j + D_mu f mu_j - K_j(theta + omega) = -F_j,

with the same center / stable / unstable decomposition as the Newton step.
Bundle coefficients then follow from the graph-map invariance equations,
linearized around the eps = 0 (exactly invariant) reference splitting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cocycle import HyperbolicityError, TrichotomySplitting
from .fourier import SpectralGrid
from .jets import Jet
from .models import ConformalMapFamily
from .newton import LinearizedProblem, exact_torus, reference_splitting
from .torus import TorusEmbedding


class LindstedtError(ArithmeticError):
    pass


def _jets_from_orders(orders, order):
    """Stack a list of (G, m) arrays into m component jets of the given order."""
    arr = np.zeros((order + 1,) + orders[0].shape, dtype=complex)
    for n, a in enumerate(orders[: order + 1]):
        arr[n] = a
    return [Jet(arr[..., i]) for i in range(arr.shape[-1])]


def _stack(parts, order, shape):
    """Nested list (or list) of jets / scalars -> Jet with trailing matrix axes."""
    flat = np.zeros((order + 1,) + shape, dtype=complex)
    if isinstance(parts[0], (list, tuple)):
        for i, row in enumerate(parts):
            for j, x in enumerate(row):
                flat[(slice(None), slice(None), i, j)] = _coeffs(x, order, shape[0])
    else:
        for i, x in enumerate(parts):
            flat[(slice(None), slice(None), i)] = _coeffs(x, order, shape[0])
    return Jet(flat)


def _coeffs(x, order, G):
    if isinstance(x, Jet):
        c = x.c if x.c.ndim > 1 else x.c[:, None]
        out = np.zeros((order + 1, G), dtype=complex)
        n = min(order + 1, c.shape[0])
        out[:n] = c[:n]
        return out
    out = np.zeros((order + 1, G), dtype=complex)
    out[0] = x
    return out


def _shift_jet(jet: Jet, grid: SpectralGrid, omega: float, truncate=True):
    c = np.moveaxis(jet.c, 0, 1)  # grid axis first
    return Jet(np.moveaxis(grid.shift(c, omega, truncate=truncate), 1, 0))


@dataclass
class LindstedtExpansion:
    fam: ConformalMapFamily
    grid: SpectralGrid
    order_N: int
    K: list                  # periodic parts, K[0] = P_0
    mu: list
    lift: np.ndarray
    omega: float
    A: dict = field(default_factory=dict)    # sigma -> list of (G, ., .) arrays
    order_residuals: list = field(default_factory=list)
    bundle_residuals: dict = field(default_factory=dict)
    R: Optional[np.ndarray] = None
    dims: Optional[tuple] = None

    def torus_at(self, eps, grid: Optional[SpectralGrid] = None, order: Optional[int] = None) -> TorusEmbedding:
        order = self.order_N if order is None else order
        P = sum(self.K[j] * eps ** j for j in range(order + 1))
        mu = sum(self.mu[j] * eps ** j for j in range(order + 1))
        K = TorusEmbedding(P.astype(complex), mu, self.omega, self.grid, self.lift)
        same = grid is None or (grid.n_modes == self.grid.n_modes and grid.n_grid == self.grid.n_grid)
        return K if same else K.with_grid(grid)

    def mu_at(self, eps, order: Optional[int] = None):
        order = self.order_N if order is None else order
        return sum(self.mu[j] * eps ** j for j in range(order + 1))

    def splitting_at(self, eps, grid: Optional[SpectralGrid] = None, order: Optional[int] = None):
        order = self.order_N if order is None else order
        grid = grid or self.grid
        s = TrichotomySplitting.reference(grid, self.omega, self.R[0] if _const(self.R) else self.R, self.dims)
        maps = {}
        for k, terms in self.A.items():
            val = sum(terms[j] * eps ** j for j in range(min(order, len(terms) - 1) + 1))
            if grid is not self.grid:
                val = _regrid(val, self.grid, grid)
            maps[k] = val
        if not maps:
            return s
        return s.with_maps(maps["s"], maps["sh"], maps["u"], maps["uh"])

    # ----------------------------------------------------------------- residuals
    def residual_coefficients(self, extra: int = 30, order: Optional[int] = None):
        """Taylor coefficients r_n (n = 0..N+extra) of the invariance error of the truncated series."""
        order = self.order_N if order is None else order
        M = order + extra
        fam = self.fam
        orders = [self.grid.theta[:, None] * self.lift + self.K[0]] + list(self.K[1:order + 1])
        parts = _jets_from_orders(orders, M)
        mu = Jet.from_list(self.mu[: order + 1], M)
        eps = Jet.variable(M)
        disp = fam.displacement_jet(parts, mu, eps)
        Pj = _jets_from_orders([self.K[0]] + list(self.K[1:order + 1]), M)
        res = []
        for i in range(len(parts)):
            e = Pj[i] + disp[i] - _shift_jet(Pj[i], self.grid, self.omega, truncate=False) - self.omega * self.lift[i]
            res.append(e.c)
        return np.stack(res, axis=-1)  # (M+1, G, m)

    def residual_at(self, eps, rho: float = 0.0, coeffs=None, order: Optional[int] = None):
        """Truncation residual at eps, summed from the Taylor coefficients."""
        if coeffs is None:
            coeffs = self.residual_coefficients(order=order)
        val = np.zeros(coeffs.shape[1:], dtype=complex)
        for n in range(coeffs.shape[0] - 1, -1, -1):
            val = val * eps + coeffs[n]
        return self.grid.norm(val, rho)

    def direct_residual_at(self, eps, rho: float = 0.0, order: Optional[int] = None):
        """Truncation residual at eps by direct evaluation of the map (rounding floor ~1e-16)."""
        from .newton import invariance_error
        K = self.torus_at(eps, order=order)
        return invariance_error(K, self.fam.with_eps(eps), rho, check=False)[1]

    def to_json(self):
        ser = lambda a: self.grid.to_series(a).to_json()
        d = {"order_N": self.order_N, "omega": self.omega, "lift": self.lift.tolist(),
             "mu": [[complex(m).real, complex(m).imag] for m in self.mu],
             "K": [ser(k) for k in self.K],
             "order_residuals": self.order_residuals}
        if self.A:
            d["A"] = {k: [ser(a) if a.size else None for a in v] for k, v in self.A.items()}
            d["bundle_residuals"] = self.bundle_residuals
        return d


def _const(R):
    return R is not None and bool(np.all(R == R[:1]))


def _regrid(vals, g_from: SpectralGrid, g_to: SpectralGrid):
    if vals.size == 0:
        return np.zeros((g_to.n_grid,) + vals.shape[1:], dtype=complex)
    s = g_from.to_series(vals)
    return g_to.from_series(s)


def lindstedt_torus_expansion(fam: ConformalMapFamily, order_N: int = 6, grid: Optional[SpectralGrid] = None,
                              K0: Optional[TorusEmbedding] = None, splitting0: Optional[TrichotomySplitting] = None,
                              exact_tol: float = 1e-13, order_tol: float = 1e-10,
                              max_twist_inv: float = 1e6, refine: int = 0) -> LindstedtExpansion:
    """Torus and drift coefficients K_0..K_N, mu_0..mu_N."""
    grid = grid or SpectralGrid(max(32, 4 * order_N))
    fam0 = fam.with_eps(0.0)
    if K0 is None:
        K0 = exact_torus(fam0, grid)
    from .newton import invariance_error
    e0, r0 = invariance_error(K0, fam0, 0.0, check=False)
    if r0 > exact_tol:
        raise LindstedtError(f"eps = 0 torus is not exactly invariant (residual {r0:.3e})")
    s0 = splitting0 or reference_splitting(fam0, grid)
    lp = LinearizedProblem.build(K0, fam0, s0)
    orders = [K0.P.copy()]
    mus = [complex(K0.mu)]
    res_log = [float(r0)]
    base = grid.theta[:, None] * K0.lift + K0.P
    for j in range(1, order_N + 1):
        parts = _jets_from_orders([base] + orders[1:], j)
        mu = Jet.from_list(mus, j)
        eps = Jet.variable(j)
        disp = fam.displacement_jet(parts, mu, eps)
        Fj = np.stack([d.c[j] for d in disp], axis=-1)
        Kj, bj, _ = lp.solve(Fj, tol=1e-18, max_twist_inv=max_twist_inv)
        for _ in range(refine):
            # iterative refinement against the (exact-arithmetic) linear equation
            rj = lp.linear_residual(Kj, bj, Fj)
            dK, db, _ = lp.solve(rj, tol=1e-18, max_twist_inv=max_twist_inv)
            Kj, bj = Kj - dK, bj - db
        r = grid.norm(lp.linear_residual(Kj, bj, Fj))
        res_log.append(float(r))
        if r > order_tol:
            raise LindstedtError(f"order {j} residual {r:.3e} exceeds {order_tol:.1e}")
        orders.append(Kj)
        mus.append(complex(bj))
    R = s0.R
    return LindstedtExpansion(fam, grid, order_N, orders, mus, K0.lift.copy(), K0.omega,
                              order_residuals=res_log, R=R, dims=s0.dims)


# ----------------------------------------------------------------------------- bundles

def _graph_residual_lower(A, g, a, b, grid, omega):
    """(A o T)(g_aa + g_ab A) - g_ba - g_bb A  for span[I; A]."""
    At = _shift_jet(A, grid, omega)
    return At.matmul(g[:, a, a] + g[:, a, b].matmul(A)) - g[:, b, a] - g[:, b, b].matmul(A)


def _graph_residual_upper(A, g, a, b, grid, omega):
    """(A o T)(g_ba A + g_bb) - g_aa A - g_ab  for span[A; I]."""
    At = _shift_jet(A, grid, omega)
    return At.matmul(g[:, b, a].matmul(A) + g[:, b, b]) - g[:, a, a].matmul(A) - g[:, a, b]


def _jet_slice(g: Jet, a, b):
    return Jet(g.c[:, :, a, b])


class _JetMatrix:
    """Helper giving g[:, a, b] slicing on a Jet with (G, m, m) trailing shape."""

    def __init__(self, jet: Jet):
        self.jet = jet

    def __getitem__(self, idx):
        _, a, b = idx
        return Jet(self.jet.c[:, :, a, b])


def _sum_series(b, step, tol, max_terms):
    total = b.copy()
    term = b
    sizes = [float(np.max(np.abs(term))) if term.size else 0.0]
    for k in range(max_terms):
        if sizes[-1] <= tol:
            return total, k, sizes
        term = step(term)
        total = total + term
        sizes.append(float(np.max(np.abs(term))))
        if len(sizes) > 30 and sizes[-1] >= sizes[-30] and sizes[-1] > tol:
            raise HyperbolicityError("non-contractive diagonal block in bundle expansion")
    return total, max_terms, sizes


def lindstedt_bundle_expansion(fam: ConformalMapFamily, expansion: LindstedtExpansion,
                               splitting0: Optional[TrichotomySplitting] = None,
                               order_N: Optional[int] = None, tol: float = 1e-17,
                               max_terms: int = 400, residual_tol: float = 1e-10):
    """Graph-map coefficients A^sigma_j, j = 0..N, for sigma in {s, sh, u, uh}.

    Mutates and returns ``expansion`` (fields ``A`` and ``bundle_residuals``).
    """
    order_N = expansion.order_N if order_N is None else order_N
    grid, w = expansion.grid, expansion.omega
    s0 = splitting0 or reference_splitting(fam.with_eps(0.0), grid)
    ds, dc, du = s0.dims
    m = s0.m
    G = grid.n_grid
    R = s0.R[0]
    if not _const(s0.R):
        raise NotImplementedError("bundle expansion needs a constant reference frame")
    Rinv = np.linalg.inv(R)
    M = order_N
    orders = [grid.theta[:, None] * expansion.lift + expansion.K[0]] + list(expansion.K[1:M + 1])
    parts = _jets_from_orders(orders, M)
    mu = Jet.from_list(expansion.mu[: M + 1], M)
    eps = Jet.variable(M)
    rows = fam.jacobian_jet(parts, mu, eps)
    gam = _stack(rows, M, (G, m, m))
    g = _JetMatrix(Jet(np.matmul(np.matmul(Rinv[None, None], gam.c), R[None, None])))
    g0 = g.jet.c[0]
    blocks = {"s": ("lower", slice(0, ds), slice(ds, m)), "sh": ("upper", slice(0, ds), slice(ds, m)),
              "uh": ("lower", slice(0, m - du), slice(m - du, m)), "u": ("upper", slice(0, m - du), slice(m - du, m))}
    dims_of = {"s": (m - ds, ds), "sh": (ds, m - ds), "uh": (du, m - du), "u": (m - du, du)}
    A = {}
    residuals = {}
    for name, (kind, a, b) in blocks.items():
        shp = dims_of[name]
        coeffs = np.zeros((M + 1, G) + shp, dtype=complex)
        if 0 in shp:
            A[name] = [coeffs[j] for j in range(M + 1)]
            residuals[name] = [0.0] * (M + 1)
            continue
        inv_bb = np.linalg.inv(g0[:, b, b])
        g_aa = g0[:, a, a]
        res_list = [0.0]
        for j in range(1, M + 1):
            Aj = Jet(coeffs.copy())
            if kind == "lower":
                rho_j = _graph_residual_lower(Aj, g, a, b, grid, w).c[j]
                # g_bb A - (A o T) g_aa = rho
                first = inv_bb @ rho_j
                step = lambda X: inv_bb @ (grid.shift(X, w) @ g_aa)
            else:
                rho_j = _graph_residual_upper(Aj, g, a, b, grid, w).c[j]
                # (A o T) g_bb - g_aa A = -rho
                inv_m = grid.shift(inv_bb, -w, truncate=False)
                gaa_m = grid.shift(g_aa, -w, truncate=False)
                first = -grid.shift(rho_j @ inv_bb, -w)
                step = lambda X, gm=gaa_m, im=inv_m: (gm @ grid.shift(X, -w)) @ im
            val, _, _ = _sum_series(first, step, tol, max_terms)
            coeffs[j] = grid.truncate(val)
            chk = Jet(coeffs.copy())
            fn = _graph_residual_lower if kind == "lower" else _graph_residual_upper
            r = float(np.max(np.abs(fn(chk, g, a, b, grid, w).c[j])))
            res_list.append(r)
            if r > residual_tol:
                raise LindstedtError(f"bundle {name} order {j} residual {r:.3e}")
        A[name] = [coeffs[j] for j in range(M + 1)]
        residuals[name] = res_list
    expansion.A = A
    expansion.bundle_residuals = residuals
    return expansion


def bundle_series_tail(fam, expansion, name: str = "s", order: int = 1, terms=range(1, 12)):
    """Residual of the order-``order`` bundle equation when the inner sum is cut after k terms."""
    out = []
    for k in terms:
        tmp = LindstedtExpansion(expansion.fam, expansion.grid, expansion.order_N, expansion.K, expansion.mu,
                                 expansion.lift, expansion.omega, R=expansion.R, dims=expansion.dims)
        lindstedt_bundle_expansion(fam, tmp, order_N=order, tol=0.0, max_terms=k, residual_tol=np.inf)
        out.append(tmp.bundle_residuals[name][order])
    return np.array(out)
