"""Fourier representation of analytic functions on the torus.

Two layers live here.  :class:`FourierSeries` is the user-facing object: a
truncated Fourier series with dense coefficients indexed ``k = -N..N`` and a
weighted ``l1`` analytic norm.  :class:`SpectralGrid` is the workhorse used by
the solvers: it keeps functions as values on an equispaced grid and performs
shifts, derivatives and truncations through the FFT.

Norm convention: for a scalar series ``sum_k c_k exp(2 pi i k theta)``

    ||f||_rho = sum_k |c_k| exp(2 pi rho |k|),

vector-valued series use the max over components and matrix-valued series the
max row sum of the entry norms, so that the norm is submultiplicative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class ResonanceError(ArithmeticError):
    """A small divisor vanished to working precision."""

    def __init__(self, message, k=None, divisor=None):
        super().__init__(message)
        self.k = k
        self.divisor = divisor


class CohomologyError(ArithmeticError):
    """The cohomology equation has no solution (nonzero average at lambda=1)."""


# small-divisor magnitude below which we refuse to divide
RESONANCE_FLOOR = 1e-15


def _entry_norm_to_range_norm(entry):
    """Combine per-entry norms (shape = range shape) into one number."""
    entry = np.asarray(entry, dtype=float)
    if entry.ndim == 0:
        return float(entry)
    if entry.ndim == 1:
        return float(entry.max(initial=0.0))
    rows = entry.reshape(-1, entry.shape[-1])
    return float(rows.sum(axis=-1).max(initial=0.0))


def _weights(k, rho):
    return np.exp(2.0 * np.pi * rho * np.abs(k))


def _bcast(vec, ndim):
    return vec.reshape(vec.shape + (1,) * (ndim - 1))


@dataclass(frozen=True)
class FourierSeries:
    """Truncated Fourier series theta -> C^range_shape.

    ``coeffs[j]`` holds the coefficient of mode ``k = j - N``.
    """

    coeffs: np.ndarray
    real: bool = False
    dim: int = 1

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 0 or c.shape[0] % 2 != 1:
            raise ValueError("coefficient array must have odd leading length 2N+1")
        if self.dim != 1:
            raise NotImplementedError("only one-dimensional tori are supported")
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, n_modes: int, range_shape=(), real=False):
        return cls(np.zeros((2 * n_modes + 1,) + tuple(range_shape), dtype=complex), real=real)

    @classmethod
    def constant(cls, value, n_modes: int = 0, real=None):
        value = np.asarray(value, dtype=complex)
        s = cls.zeros(n_modes, value.shape)
        s.coeffs[n_modes] = value
        if real is None:
            real = bool(np.all(value.imag == 0))
        return cls(s.coeffs, real=real)

    @classmethod
    def from_coefficients(cls, mapping: dict, n_modes: Optional[int] = None, real=False):
        """Build from ``{k: c_k}``."""
        if n_modes is None:
            n_modes = max((abs(int(k)) for k in mapping), default=0)
        first = np.asarray(next(iter(mapping.values()), 0.0))
        s = cls.zeros(n_modes, first.shape)
        for k, c in mapping.items():
            if abs(k) <= n_modes:
                s.coeffs[int(k) + n_modes] += c
        return cls(s.coeffs, real=real)

    @classmethod
    def from_grid(cls, values, n_modes: Optional[int] = None, real=False):
        """Interpolate grid values ``values[j] = f(j/G)``."""
        values = np.asarray(values)
        g = values.shape[0]
        if n_modes is None:
            n_modes = (g - 1) // 2
        if 2 * n_modes + 1 > g:
            raise ValueError("grid too coarse for requested number of modes")
        hat = np.fft.fft(values, axis=0) / g
        idx = np.arange(-n_modes, n_modes + 1) % g
        return cls(hat[idx], real=real)

    @classmethod
    def from_function(cls, func: Callable, n_modes: int, n_grid: Optional[int] = None, real=False):
        n_grid = n_grid or max(4 * n_modes, 16)
        theta = np.arange(n_grid) / n_grid
        return cls.from_grid(func(theta), n_modes, real=real)

    # basic properties -----------------------------------------------------
    @property
    def n_modes(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def range_shape(self):
        return self.coeffs.shape[1:]

    @property
    def wavenumbers(self):
        return np.arange(-self.n_modes, self.n_modes + 1)

    def grid(self, n_grid: Optional[int] = None):
        """Values on the equispaced grid of ``n_grid`` points."""
        n = self.n_modes
        n_grid = n_grid or max(4 * n, 16)
        if n_grid < 2 * n + 1:
            raise ValueError("grid too coarse")
        hat = np.zeros((n_grid,) + self.range_shape, dtype=complex)
        hat[self.wavenumbers % n_grid] = self.coeffs
        vals = np.fft.ifft(hat, axis=0) * n_grid
        return vals.real if self.real else vals

    def __call__(self, theta):
        theta = np.asarray(theta)
        ph = np.exp(2j * np.pi * np.multiply.outer(theta, self.wavenumbers))
        out = np.tensordot(ph, self.coeffs, axes=(theta.ndim, 0))
        return out.real if self.real else out

    # algebra ----------------------------------------------------------------
    def _like(self, coeffs, real=None):
        return FourierSeries(coeffs, real=self.real if real is None else real)

    def truncate(self, n_modes: int):
        n = self.n_modes
        if n_modes >= n:
            out = FourierSeries.zeros(n_modes, self.range_shape)
            out.coeffs[n_modes - n:n_modes + n + 1] = self.coeffs
            return self._like(out.coeffs)
        return self._like(self.coeffs[n - n_modes:n + n_modes + 1].copy())

    def _aligned(self, other):
        n = max(self.n_modes, other.n_modes)
        return self.truncate(n), other.truncate(n)

    def __add__(self, other):
        if isinstance(other, FourierSeries):
            a, b = self._aligned(other)
            return FourierSeries(a.coeffs + b.coeffs, real=self.real and other.real)
        c = self.coeffs.copy()
        c[self.n_modes] = c[self.n_modes] + other
        return self._like(c, real=self.real and np.isrealobj(other))

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FourierSeries):
            return self.product(other)
        return self._like(self.coeffs * other, real=self.real and np.isrealobj(other))

    __rmul__ = __mul__

    def product(self, other: "FourierSeries") -> "FourierSeries":
        """Exact pointwise (or matrix) product with ``N_a + N_b`` modes.

        Scalars broadcast; matrix @ matrix and matrix @ vector use the
        matrix product; equal-shape vectors multiply entrywise.  Call
        :meth:`truncate` to return to a working resolution.
        """
        n = self.n_modes + other.n_modes
        g = max(2 * n + 1, 16)
        sa, sb = self.range_shape, other.range_shape
        if len(sa) == 0 or len(sb) == 0 or (len(sa) == 1 and sa == sb):
            op = np.multiply
        elif len(sa) == 2 and len(sb) in (1, 2) and sa[1] == sb[0]:
            op = np.matmul if len(sb) == 2 else (lambda x, y: np.einsum("gij,gj->gi", x, y))
        else:
            raise ValueError(f"incompatible range shapes {sa} and {sb}")
        va = self.grid(g)
        vb = other.grid(g)
        vals = op(va, vb) if op is not np.multiply else _broadcast_mul(va, vb)
        return FourierSeries.from_grid(vals, n, real=self.real and other.real)

    def shift(self, omega: float) -> "FourierSeries":
        """Return f(theta + omega)."""
        ph = np.exp(2j * np.pi * self.wavenumbers * omega)
        return self._like(self.coeffs * _bcast(ph, self.coeffs.ndim))

    def derivative(self) -> "FourierSeries":
        fac = 2j * np.pi * self.wavenumbers
        return self._like(self.coeffs * _bcast(fac, self.coeffs.ndim))

    def average(self):
        c = self.coeffs[self.n_modes]
        return c.real if self.real else c

    def entry_norms(self, rho=0.0, kmin=0):
        k = self.wavenumbers
        w = _weights(k, rho) * (np.abs(k) > kmin if kmin else 1.0)
        return np.tensordot(w, np.abs(self.coeffs), axes=(0, 0))

    def norm(self, rho: float = 0.0) -> float:
        """Weighted l1 analytic norm ||f||_rho."""
        return _entry_norm_to_range_norm(self.entry_norms(rho))

    def tail_norm(self, rho: float = 0.0) -> float:
        """Norm of the modes with |k| > N/2 (resolution health monitor)."""
        return _entry_norm_to_range_norm(self.entry_norms(rho, kmin=self.n_modes // 2))

    # serialization -----------------------------------------------------------
    def to_json(self) -> dict:
        rows = []
        for k, c in zip(self.wavenumbers, self.coeffs):
            c = np.asarray(c)
            rows.append([int(k), c.real.tolist(), c.imag.tolist()])
        return {
            "dim": self.dim,
            "n_modes": self.n_modes,
            "range_shape": list(self.range_shape),
            "real_flag": bool(self.real),
            "coeffs": rows,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FourierSeries":
        n = int(data["n_modes"])
        shape = tuple(data.get("range_shape", ()))
        s = cls.zeros(n, shape)
        for k, re, im in data["coeffs"]:
            s.coeffs[int(k) + n] = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
        return cls(s.coeffs, real=bool(data.get("real_flag", False)), dim=int(data.get("dim", 1)))


def _broadcast_mul(a, b):
    # align trailing range dims: a scalar-valued series has shape (G,)
    if a.ndim < b.ndim:
        a = a.reshape(a.shape + (1,) * (b.ndim - a.ndim))
    elif b.ndim < a.ndim:
        b = b.reshape(b.shape + (1,) * (a.ndim - b.ndim))
    return a * b


def frob_condition(F) -> float:
    """Largest Frobenius condition number ``|F| |F^-1|`` over a stack of square matrices.

    An upper bound for the 2-norm condition number (within a factor equal to
    the matrix size) that costs one batched inverse instead of an SVD.
    """
    F = np.asarray(F)
    try:
        Fi = np.linalg.inv(F)
    except np.linalg.LinAlgError:
        return np.inf
    c = np.linalg.norm(F, axis=(-2, -1)) * np.linalg.norm(Fi, axis=(-2, -1))
    return float(np.max(c))


def matrix_norm(entries) -> float:
    """Max row sum of an array of entry norms."""
    return _entry_norm_to_range_norm(entries)


class SpectralGrid:
    """Equispaced grid on the circle with FFT-based operations.

    Functions are arrays of shape ``(n_grid, ...)``.  Operations that can
    create high modes (shifts are exact, products are not) are followed by
    a truncation to ``|k| <= n_modes`` where the caller requests it.
    """

    def __init__(self, n_modes: int, n_grid: Optional[int] = None):
        if n_modes < 1:
            raise ValueError("n_modes must be positive")
        self.n_modes = int(n_modes)
        self.n_grid = int(n_grid or max(4 * n_modes, 16))
        if self.n_grid < 2 * self.n_modes + 1:
            raise ValueError("grid must have at least 2N+1 points")
        self.theta = np.arange(self.n_grid) / self.n_grid
        self.k = np.rint(np.fft.fftfreq(self.n_grid) * self.n_grid).astype(int)
        self.keep = np.abs(self.k) <= self.n_modes
        self._phase_cache = {}

    # transforms
    def fft(self, values):
        return np.fft.fft(values, axis=0) / self.n_grid

    def ifft(self, hat):
        return np.fft.ifft(hat, axis=0) * self.n_grid

    def _col(self, vec, ndim):
        return _bcast(vec, ndim)

    def phases(self, omega: float):
        key = float(omega)
        ph = self._phase_cache.get(key)
        if ph is None:
            ph = np.exp(2j * np.pi * self.k * omega)
            if len(self._phase_cache) < 64:
                self._phase_cache[key] = ph
        return ph

    def truncate(self, values):
        hat = self.fft(values)
        hat[~self.keep] = 0.0
        return self.ifft(hat)

    def shift(self, values, omega: float, truncate: bool = True):
        hat = self.fft(values)
        hat = hat * self._col(self.phases(omega), hat.ndim)
        if truncate:
            hat[~self.keep] = 0.0
        return self.ifft(hat)

    def derivative(self, values, truncate: bool = True):
        hat = self.fft(values)
        hat = hat * self._col(2j * np.pi * self.k, hat.ndim)
        if truncate:
            hat[~self.keep] = 0.0
        return self.ifft(hat)

    @staticmethod
    def mean(values):
        return np.mean(values, axis=0)

    def entry_norms(self, values, rho: float = 0.0, all_modes: bool = True):
        hat = self.fft(values)
        w = _weights(self.k, rho)
        if not all_modes:
            w = w * self.keep
        # the Nyquist-adjacent modes are kept: they measure aliasing honestly
        return np.tensordot(w, np.abs(hat), axes=(0, 0))

    def norm(self, values, rho: float = 0.0, all_modes: bool = True) -> float:
        return _entry_norm_to_range_norm(self.entry_norms(values, rho, all_modes))

    def tail_norm(self, values, rho: float = 0.0) -> float:
        hat = self.fft(values)
        w = _weights(self.k, rho) * (np.abs(self.k) > self.n_modes // 2)
        return _entry_norm_to_range_norm(np.tensordot(w, np.abs(hat), axes=(0, 0)))

    def to_series(self, values, real=False) -> FourierSeries:
        return FourierSeries.from_grid(values, self.n_modes, real=real)

    def from_series(self, series: FourierSeries):
        return series.truncate(self.n_modes).grid(self.n_grid)

    def evaluate(self, values, theta, all_modes: bool = False):
        """Evaluate the (truncated) trigonometric interpolant of ``values`` at theta."""
        hat = self.fft(values)
        ks = self.k
        if not all_modes:
            hat, ks = hat[self.keep], ks[self.keep]
        theta = np.asarray(theta)
        ph = np.exp(2j * np.pi * np.multiply.outer(theta.ravel(), ks))
        out = ph @ hat.reshape(hat.shape[0], -1)
        return out.reshape(theta.shape + values.shape[1:])


def solve_cohomology(eta, lam, omega: float, grid: Optional[SpectralGrid] = None,
                     avg_tol: float = 1e-12):
    """Solve ``w(theta + omega) - lam * w(theta) = eta(theta)``.

    ``eta`` is either a :class:`FourierSeries` or grid values (then ``grid``
    is required).  Mode by mode ``w_k = eta_k / (exp(2 pi i k omega) - lam)``.
    When ``lam == 1`` the average of ``eta`` must vanish (checked against
    ``avg_tol`` times the size of ``eta``) and the solution is normalized to
    zero average.
    """
    if isinstance(eta, FourierSeries):
        k = eta.wavenumbers
        hat = eta.coeffs
        scale = max(eta.norm(0.0), 1.0)
        hat = _divide_modes(hat, k, lam, omega, hat[eta.n_modes], scale, avg_tol)
        return FourierSeries(hat, real=eta.real and np.isrealobj(lam))
    if grid is None:
        raise ValueError("grid values need a SpectralGrid")
    hat = grid.fft(eta)
    scale = max(float(np.abs(hat).sum(axis=0).max(initial=0.0)), 1.0)
    hat = _divide_modes(hat, grid.k, lam, omega, hat[0], scale, avg_tol)
    return grid.ifft(hat)


def _divide_modes(hat, k, lam, omega, mean, scale, avg_tol):
    div = np.exp(2j * np.pi * k * omega) - lam
    at_one = np.abs(lam - 1.0) == 0.0
    zero = k == 0
    if at_one:
        if np.max(np.abs(mean)) > avg_tol * scale:
            raise CohomologyError(
                f"non-solvable: nonzero average {np.max(np.abs(mean)):.3e} with lambda = 1")
        check = ~zero
    else:
        check = np.ones_like(zero)
    small = check & (np.abs(div) < RESONANCE_FLOOR)
    if np.any(small):
        kk = int(k[np.argmax(small)])
        raise ResonanceError(f"resonant divisor at k={kk}", k=kk, divisor=complex(div[np.argmax(small)]))
    safe = np.where(check, div, 1.0)
    out = hat / _bcast(safe, hat.ndim)
    if at_one:
        out[zero] = 0.0
    return out
