"""Conformally symplectic map families.

Two families ship:

* :class:`CoupledStandardWhiskerMap` on T x R^3, coordinates ``(x, y, u, v)``:
  a kick by the potential ``V(x, u) = cos(2 pi x) (a0 + a1 u)``, then the twist
  ``x += y`` together with the hyperbolic scaling ``(u, v) -> (kappa u, v / kappa)``,
  then the dissipation ``(y, v) -> (lam y + mu, lam v)``.
* :class:`DissipativeStandardMap` on T x R, the same construction without the
  hyperbolic pair.

Both are written once against :mod:`whiskered.jets` so the formulas evaluate
on numpy arrays and on power series in ``eps``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import jets
from .diophantine import GOLDEN_MEAN

TWO_PI = 2.0 * np.pi


class DomainMarginError(ValueError):
    """A point left the declared domain of the map (margin below eta/2)."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


@dataclass(frozen=True)
class LambdaSpec:
    """Conformal factor as a function of eps.

    ``kind='fixed'`` gives ``lam(eps) = value``; ``kind='power'`` gives
    ``lam(eps) = 1 + alpha * eps**power``.
    """

    kind: str = "fixed"
    value: float = 0.9
    alpha: float = -1.0
    power: int = 1

    def __post_init__(self):
        if self.kind not in ("fixed", "power"):
            raise ValueError(f"unknown lambda kind {self.kind!r}")
        if self.kind == "power" and (int(self.power) != self.power or self.power < 1):
            raise ValueError("lambda power must be a positive integer")

    def __call__(self, eps):
        if self.kind == "fixed":
            return complex(self.value) if np.iscomplexobj(eps) else self.value
        return 1.0 + self.alpha * eps ** int(self.power)

    def jet(self, eps_jet: jets.Jet) -> jets.Jet:
        if self.kind == "fixed":
            return jets.Jet.constant(self.value, eps_jet.order)
        return 1.0 + self.alpha * eps_jet ** int(self.power)

    def as_dict(self):
        return {"kind": self.kind, "value": self.value, "alpha": self.alpha, "power": self.power}


def _wrap(z, dtype=None):
    z = np.asarray(z)
    return z if dtype is None else z.astype(dtype)


@dataclass(frozen=True)
class ConformalMapFamily:
    """Base class: subclasses provide ``_displacement`` and ``_jacobian``.

    ``displacement(z, mu) = f(z) - z`` is the primitive: it avoids the
    cancellation inherent to the lift of the angle variable.
    """

    eps: complex = 0.0
    lam_spec: LambdaSpec = field(default_factory=LambdaSpec)
    omega: float = GOLDEN_MEAN
    eta: float = 0.05
    rho_model: float = 0.5
    fiber_radius: float = 0.5

    n: int = 0  # half of the phase-space dimension
    d: int = 1
    name: str = "abstract"

    # ----------------------------------------------------------------- basic data
    @property
    def phase_dim(self) -> int:
        return 2 * self.n

    @property
    def lam(self):
        return self.lam_spec(self.eps)

    @property
    def J(self) -> np.ndarray:
        j2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
        return np.kron(np.eye(self.n), j2)

    def with_eps(self, eps):
        return replace(self, eps=eps)

    @property
    def lift(self) -> np.ndarray:
        """Integer translation generated by one turn of the angle."""
        e = np.zeros(self.phase_dim)
        e[0] = 1.0
        return e

    # ----------------------------------------------------------------- evaluation
    def _split(self, z):
        return [z[..., i] for i in range(self.phase_dim)]

    def displacement(self, z, mu, check: bool = True):
        z = np.asarray(z)
        if check:
            self.check_domain(z)
        parts = self._displacement(self._split(z), mu, self.eps, self.lam)
        return np.stack(np.broadcast_arrays(*parts), axis=-1)

    def evaluate(self, z, mu, check: bool = True):
        z = np.asarray(z)
        return z + self.displacement(z, mu, check)

    def jacobian(self, z, mu, check: bool = True):
        z = np.asarray(z)
        if check:
            self.check_domain(z)
        rows = self._jacobian(self._split(z), mu, self.eps, self.lam)
        shape = z.shape[:-1]
        out = np.zeros(shape + (self.phase_dim, self.phase_dim), dtype=np.result_type(z, self.lam, self.eps, float))
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                out[..., i, j] = entry
        return out

    def mu_derivative(self, z=None, mu=None):
        """d f / d mu; constant for the shipped families."""
        e = np.zeros((self.phase_dim, self.d))
        e[1, 0] = 1.0
        if z is None:
            return e
        return np.broadcast_to(e, np.shape(z)[:-1] + e.shape)

    # jet variants (used for Lindstedt series)
    def displacement_jet(self, parts, mu, eps_jet):
        return self._displacement(parts, mu, eps_jet, self.lam_spec.jet(eps_jet))

    def jacobian_jet(self, parts, mu, eps_jet):
        return self._jacobian(parts, mu, eps_jet, self.lam_spec.jet(eps_jet))

    def lam_jet(self, eps_jet):
        return self.lam_spec.jet(eps_jet)

    # ----------------------------------------------------------------- domain
    def domain_margin(self, z) -> float:
        z = np.asarray(z)
        m = [self.rho_model - np.abs(np.imag(z[..., 0])),
             self.fiber_radius - np.abs(z[..., 1] - self.omega)]
        for i in range(2, self.phase_dim):
            m.append(self.fiber_radius - np.abs(z[..., i]))
        return float(np.min([np.min(a) for a in m]))

    def check_domain(self, z):
        m = self.domain_margin(z)
        if m < self.eta / 2:
            raise DomainMarginError(f"domain margin {m:.3g} below eta/2 = {self.eta / 2:.3g}", margin=m)

    def random_points(self, count: int, rng=None, imag: float = 0.0):
        rng = np.random.default_rng(rng)
        r = self.fiber_radius - self.eta
        z = np.empty((count, self.phase_dim), dtype=complex if imag else float)
        z[:, 0] = rng.uniform(0, 1, count)
        if imag:
            z[:, 0] = z[:, 0] + 1j * rng.uniform(-imag, imag, count)
        z[:, 1] = self.omega + rng.uniform(-r, r, count)
        for i in range(2, self.phase_dim):
            z[:, i] = rng.uniform(-r, r, count)
        return z

    # ----------------------------------------------------------------- structure
    def reference_splitting(self):
        """Constant reference frame ``R`` (columns ordered stable|center|unstable) and dims."""
        raise NotImplementedError

    def exact_torus(self, omega: Optional[float] = None):
        """Periodic part of K_0 (K_0(theta) = theta e_x + P_0) and mu_0 at eps=0."""
        omega = self.omega if omega is None else omega
        p = np.zeros(self.phase_dim)
        p[1] = omega
        lam0 = self.lam_spec(0.0)
        return p, omega * (1.0 - lam0)

    def config_dict(self):
        return {"model": self.name, "eps": [complex(self.eps).real, complex(self.eps).imag],
                "lambda": self.lam_spec.as_dict(), "omega": self.omega, "eta": self.eta}

    def _displacement(self, parts, mu, eps, lam):
        raise NotImplementedError

    def _jacobian(self, parts, mu, eps, lam):
        raise NotImplementedError


@dataclass(frozen=True)
class CoupledStandardWhiskerMap(ConformalMapFamily):
    kappa: float = 3.0
    a0: float = 1.0 / TWO_PI
    a1: float = 0.3
    n: int = 2
    name: str = "coupled-standard-whisker"

    def _kick(self, x, u):
        s, c = jets.sincos(TWO_PI * x)
        w = self.a0 + self.a1 * u
        vx = -TWO_PI * s * w
        vu = self.a1 * c
        return s, c, w, vx, vu

    def _displacement(self, parts, mu, eps, lam):
        x, y, u, v = parts
        _, _, _, vx, vu = self._kick(x, u)
        yk = y + eps * vx
        return [yk,
                lam * yk + mu - y,
                (self.kappa - 1.0) * u,
                (lam / self.kappa) * (v + eps * vu) - v]

    def _jacobian(self, parts, mu, eps, lam):
        x, y, u, v = parts
        s, c, w, _, _ = self._kick(x, u)
        vxx = -(TWO_PI ** 2) * c * w
        vxu = -TWO_PI * self.a1 * s
        one, zero = 1.0, 0.0
        lk = lam / self.kappa
        return [[one + eps * vxx, one, eps * vxu, zero],
                [lam * eps * vxx, lam, lam * eps * vxu, zero],
                [zero, zero, self.kappa, zero],
                [lk * eps * vxu, zero, zero, lk]]

    def reference_splitting(self):
        # columns: e_v (stable) | e_x, e_y (center) | e_u (unstable)
        R = np.zeros((4, 4))
        R[3, 0] = 1.0
        R[0, 1] = 1.0
        R[1, 2] = 1.0
        R[2, 3] = 1.0
        return R, (1, 2, 1)

    def config_dict(self):
        d = super().config_dict()
        d.update(kappa=self.kappa, a0=self.a0, a1=self.a1)
        return d


@dataclass(frozen=True)
class DissipativeStandardMap(ConformalMapFamily):
    """(x, y) -> (x + y', lam y' + mu) with y' = y - eps a sin(2 pi x) * 2 pi a0."""

    a0: float = 1.0 / TWO_PI
    n: int = 1
    name: str = "dissipative-standard"

    def _displacement(self, parts, mu, eps, lam):
        x, y = parts
        yk = y - eps * TWO_PI * self.a0 * jets.sin(TWO_PI * x)
        return [yk, lam * yk + mu - y]

    def _jacobian(self, parts, mu, eps, lam):
        x, y = parts
        vxx = -(TWO_PI ** 2) * self.a0 * jets.cos(TWO_PI * x)
        return [[1.0 + eps * vxx, 1.0], [lam * eps * vxx, lam]]

    def reference_splitting(self):
        return np.eye(2), (0, 2, 0)

    def config_dict(self):
        d = super().config_dict()
        d.update(a0=self.a0)
        return d


MODELS = {
    CoupledStandardWhiskerMap.name: CoupledStandardWhiskerMap,
    DissipativeStandardMap.name: DissipativeStandardMap,
}


def make_model(name: str, **kwargs) -> ConformalMapFamily:
    try:
        cls = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return cls(**kwargs)


def conformal_residuals(fam: ConformalMapFamily, points, mu=0.0):
    """Per-point ``max row sum |Df^T J Df - lam J|``."""
    Df = fam.jacobian(points, mu, check=False)
    J = fam.J
    lhs = np.swapaxes(Df, -1, -2) @ J @ Df
    r = np.abs(lhs - fam.lam * J).sum(axis=-1).max(axis=-1)
    return r


def check_conformal(fam: ConformalMapFamily, sample_count: int = 1000, rng=0, mu=None) -> float:
    """Max conformality residual over random points of the domain."""
    mu = fam.exact_torus()[1] if mu is None else mu
    pts = fam.random_points(sample_count, rng)
    return float(np.max(conformal_residuals(fam, pts, mu)))
