"""Parameterized tori K(theta) = theta * lift + P(theta) together with the drift mu."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .fourier import FourierSeries, SpectralGrid


@dataclass
class TorusEmbedding:
    """Embedding of the circle plus drift, stored as grid values of the periodic part.

    ``P`` has shape ``(n_grid, 2n)`` and is band-limited to ``grid.n_modes``.
    """

    P: np.ndarray
    mu: complex
    omega: float
    grid: SpectralGrid
    lift: np.ndarray
    rho: float = 0.0

    @classmethod
    def from_constant(cls, p0, mu, omega, grid: SpectralGrid, lift, rho=0.0):
        p0 = np.asarray(p0, dtype=complex)
        P = np.broadcast_to(p0, (grid.n_grid,) + p0.shape).copy()
        return cls(P, mu, omega, grid, np.asarray(lift, dtype=float), rho)

    @classmethod
    def from_series(cls, series: FourierSeries, mu, omega, lift, grid: Optional[SpectralGrid] = None, rho=0.0):
        grid = grid or SpectralGrid(series.n_modes)
        return cls(grid.from_series(series).astype(complex), mu, omega, grid, np.asarray(lift, float), rho)

    @classmethod
    def from_function(cls, func, mu, omega, grid: SpectralGrid, lift, rho=0.0):
        """``func(theta)`` returns the periodic part on an array of angles."""
        P = grid.truncate(np.asarray(func(grid.theta), dtype=complex))
        return cls(P, mu, omega, grid, np.asarray(lift, float), rho)

    @property
    def phase_dim(self) -> int:
        return self.P.shape[-1]

    @property
    def series(self) -> FourierSeries:
        return self.grid.to_series(self.P)

    def values(self):
        return self.grid.theta[:, None] * self.lift + self.P

    def shifted_values(self, sigma: float):
        return (self.grid.theta[:, None] + sigma) * self.lift + self.grid.shift(self.P, sigma)

    def DK(self):
        """Tangent vectors, shape ``(G, 2n, 1)``."""
        return (self.lift + self.grid.derivative(self.P))[:, :, None]

    def translate(self, sigma: float) -> "TorusEmbedding":
        """``K o T_sigma`` as a new embedding."""
        return replace(self, P=self.grid.shift(self.P, sigma) + sigma * self.lift)

    def with_grid(self, grid: SpectralGrid) -> "TorusEmbedding":
        return TorusEmbedding.from_series(self.series.truncate(grid.n_modes), self.mu, self.omega,
                                          self.lift, grid, self.rho)

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(np.imag(self.P))) <= tol and abs(np.imag(self.mu)) <= tol)

    def realified(self):
        return replace(self, P=self.P.real.astype(complex), mu=complex(self.mu).real)

    def to_json(self):
        mu = complex(self.mu)
        return {"omega": self.omega, "mu": [mu.real, mu.imag], "lift": self.lift.tolist(),
                "rho": self.rho, "periodic_part": self.series.to_json()}

    @classmethod
    def from_json(cls, d, grid: Optional[SpectralGrid] = None):
        s = FourierSeries.from_json(d["periodic_part"])
        return cls.from_series(s, complex(*d["mu"]), d["omega"], d["lift"], grid, d.get("rho", 0.0))
