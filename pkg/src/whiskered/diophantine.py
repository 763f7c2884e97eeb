"""Diophantine constants of a frequency and of a conformal factor relative to it.

For a frequency ``omega`` and an exponent ``tau`` we use the truncated sups

    nu(omega; tau)         = max_{0<|k|<=k_max} |exp(2 pi i k omega) - 1|^{-1} |k|^{-tau}
    nu(lam; omega, tau)    = max_{0<|k|<=k_max} |exp(2 pi i k omega) - lam|^{-1} |k|^{-tau}

Truncation at ``k_max`` gives a lower bound of the true constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .fourier import RESONANCE_FLOOR, ResonanceError

GOLDEN_MEAN = float((np.sqrt(5.0) - 1.0) / 2.0)


@dataclass(frozen=True)
class DiophantineParams:
    omega: float = GOLDEN_MEAN
    tau: float = 1.2
    k_max: int = 100_000
    # exponent used for the lambda-relative constant; defaults to tau
    tau_lambda: Optional[float] = None

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.tau_lambda is not None and not self.tau_lambda > 0:
            raise ValueError("tau_lambda must be positive")

    @property
    def tau_lam(self) -> float:
        return self.tau if self.tau_lambda is None else self.tau_lambda


@dataclass(frozen=True)
class DomainSetParams:
    threshold_A: float = 1.0
    order_N: int = 6
    r0: float = 0.1
    # accept epsilon = 0 when the limit map is symplectic and omega Diophantine
    symplectic_limit: bool = True

    def __post_init__(self):
        if not self.threshold_A > 0:
            raise ValueError("threshold A must be positive")
        if self.order_N < 1:
            raise ValueError("order N must be >= 1")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")


@lru_cache(maxsize=8)
def _mode_table(omega: float, k_max: int):
    k = np.arange(1, k_max + 1, dtype=float)
    # reduce k*omega mod 1 before exponentiating to keep the phase accurate
    frac = np.mod(k * omega, 1.0)
    e = np.exp(2j * np.pi * frac)
    e.setflags(write=False)
    return k, e


@lru_cache(maxsize=16)
def _weights(k_max: int, tau: float):
    k = np.arange(1, k_max + 1, dtype=float)
    w = k ** (-tau)
    w.setflags(write=False)
    return w


def nu_omega(p: DiophantineParams, tau: Optional[float] = None) -> float:
    """Diophantine constant of ``p.omega`` with exponent ``tau`` (default ``p.tau``)."""
    tau = p.tau if tau is None else tau
    k, e = _mode_table(float(p.omega), int(p.k_max))
    div = np.abs(e - 1.0)
    bad = div < RESONANCE_FLOOR
    if np.any(bad):
        kk = int(k[np.argmax(bad)])
        raise ResonanceError(f"resonant frequency: exp(2 pi i k omega) = 1 at k={kk}", k=kk,
                             divisor=float(div[np.argmax(bad)]))
    # |e^{-2 pi i k w} - 1| = |e^{2 pi i k w} - 1| so positive k suffice
    return float(np.max(_weights(int(p.k_max), float(tau)) / div))


def nu_lambda(lam: complex, p: DiophantineParams, tau: Optional[float] = None,
              return_argmax: bool = False):
    """Diophantine constant of ``lam`` relative to ``p.omega``."""
    tau = p.tau_lam if tau is None else tau
    k, e = _mode_table(float(p.omega), int(p.k_max))
    lam = complex(lam)
    if lam == 1.0:
        val = nu_omega(p, tau)
        return (val, None) if return_argmax else val
    vals = []
    worst = None
    for sign, ee in ((1, e), (-1, np.conj(e))):
        div = np.abs(ee - lam)
        j = int(np.argmin(div))
        if div[j] < RESONANCE_FLOOR:
            raise ResonanceError(f"near-resonance: |exp(2 pi i k omega) - lambda| = {div[j]:.2e} at k={sign * int(k[j])}",
                                 k=sign * int(k[j]), divisor=float(div[j]))
        terms = _weights(int(p.k_max), float(tau)) / div
        i = int(np.argmax(terms))
        vals.append(terms[i])
        if worst is None or terms[i] > worst[0]:
            worst = (terms[i], sign * int(k[i]))
    val = float(max(vals))
    return (val, worst[1]) if return_argmax else val


@dataclass
class DomainDiagnostics:
    epsilon: complex
    lam: complex
    nu: float
    lam_distance_power: float
    product: float
    reason: str = ""
    worst_k: Optional[int] = None

    def as_dict(self):
        return {
            "epsilon": [self.epsilon.real, self.epsilon.imag],
            "lambda": [self.lam.real, self.lam.imag],
            "nu": self.nu,
            "lambda_distance_power": self.lam_distance_power,
            "product": self.product,
            "reason": self.reason,
            "worst_k": self.worst_k,
        }


def in_domain_G(epsilon: complex, lambda_of_eps: Callable[[complex], complex],
                dp: DiophantineParams, sp: DomainSetParams, symplectic_at_zero: bool = True):
    """Membership of ``epsilon`` in the domain set G(A, N).

    Returns ``(inside, diagnostics)``.  Near-resonance of ``lambda(epsilon)``
    raises :class:`ResonanceError`.
    """
    epsilon = complex(epsilon)
    if abs(epsilon) > sp.r0 * (1 + 1e-12):
        raise ValueError(f"|epsilon| = {abs(epsilon):.3g} exceeds r0 = {sp.r0}")
    lam = complex(lambda_of_eps(epsilon))
    if epsilon == 0 or lam == 1.0:
        # 0 * infinity form: defer to the symplectic-limit convention
        nu = nu_omega(dp)
        ok = bool(sp.symplectic_limit and symplectic_at_zero and np.isfinite(nu))
        return ok, DomainDiagnostics(epsilon, lam, nu, 0.0, 0.0,
                                     "symplectic-limit" if ok else "diophantine-threshold")
    nu, kk = nu_lambda(lam, dp, return_argmax=True)
    dist = abs(lam - 1.0) ** (sp.order_N + 1)
    prod = nu * dist
    ok = bool(prod <= sp.threshold_A)
    return ok, DomainDiagnostics(epsilon, lam, nu, dist, prod,
                                 "" if ok else "diophantine-threshold", kk)
