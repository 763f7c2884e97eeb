"""Automatic reducibility of the linearized dynamics on the center bundle.

With ``N = (DK^T DK)^{-1}``, ``P = DK N`` and ``v = Pi^c J^{-1} DK N`` the
frame ``M = [DK | v]`` conjugates the center block of ``Df o K`` to
``[[1, S], [0, lam]]`` up to terms controlled by the invariance error, where

    S(theta) = P(theta+w)^T Df(K(theta)) v(theta) - lam P(theta+w)^T v(theta+w).

Projecting ``J^{-1} DK N`` onto the invariant center bundle makes
``Omega(DK, v) = DK^T J v = 1`` because the center is Omega-orthogonal to the
hyperbolic bundles.  This is the center-frame form of ``(J^c)^{-1} DK N``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cocycle import FrameError, TrichotomySplitting
from .fourier import FourierSeries, SpectralGrid, frob_condition, solve_cohomology
from .models import ConformalMapFamily
from .torus import TorusEmbedding

M_COND_LIMIT = 1e8


def _T(a):
    return np.swapaxes(a, -1, -2)


@dataclass
class ReducibilityFrame:
    """Grid values of the center-frame quantities (d = 1: N, chi, S are scalars)."""

    grid: SpectralGrid
    DK: np.ndarray      # (G, m, 1)
    N: np.ndarray       # (G, 1, 1)
    P: np.ndarray       # (G, m, 1)
    v: np.ndarray       # (G, m, 1)
    M: np.ndarray       # (G, m, 2)
    chi: np.ndarray     # (G, 1, 1)
    Jc: np.ndarray      # (G, 2, 2)  Omega in the frame M
    Pi_c: np.ndarray    # (G, m, m)
    lam: complex
    S: Optional[np.ndarray] = None  # (G,)
    M_cond: float = np.nan
    Jc_cond: float = np.nan

    @property
    def M_inv(self):
        """Left inverse of M on the center bundle (rows dual to [DK | v])."""
        return np.linalg.pinv(self.M)

    @property
    def S_bar(self):
        return np.mean(self.S)

    def series(self, name: str) -> FourierSeries:
        return self.grid.to_series(getattr(self, name))

    def summary(self):
        Sb = complex(self.S_bar) if self.S is not None else None
        return {"M_cond": self.M_cond, "Jc_cond": self.Jc_cond,
                "S_bar": [Sb.real, Sb.imag] if Sb is not None else None,
                "N_norm": self.grid.norm(self.N[:, 0, 0])}


def center_projection(splitting: TrichotomySplitting, check: bool = True):
    return splitting.projections(check)["c"]


def build_frame(K: TorusEmbedding, fam: ConformalMapFamily, splitting: TrichotomySplitting,
                with_torsion: bool = True, cond_limit: float = M_COND_LIMIT,
                check: bool = True) -> ReducibilityFrame:
    """Frame [DK | Pi^c J^{-1} DK N] of the center bundle along K."""
    grid = K.grid
    DK = K.DK()
    gram = _T(DK) @ DK
    if np.min(np.abs(gram)) < 1e-14:
        raise FrameError("DK is rank deficient on the grid")
    N = np.linalg.inv(gram)
    P = DK @ N
    Pi_c = center_projection(splitting, check)
    Jinv = np.linalg.inv(fam.J)
    v = Pi_c @ (Jinv @ P)
    M = np.concatenate([DK, v], axis=2)
    Jc = _T(M) @ fam.J @ M
    chi = _T(DK) @ v @ np.linalg.inv(N)
    jc_cond = m_cond = np.nan
    if check:
        jc_cond = frob_condition(Jc)
        if not np.isfinite(jc_cond) or jc_cond > cond_limit:
            raise FrameError(f"Omega restricted to the center is near singular (cond {jc_cond:.3e})")
        # M is m x 2: condition of the Gram matrix is cond(M)^2
        m_cond = float(np.sqrt(frob_condition(_T(M) @ M)))
        if not np.isfinite(m_cond) or m_cond > cond_limit:
            raise FrameError(f"center frame M is near singular (cond {m_cond:.3e})")
    fr = ReducibilityFrame(grid, DK, N, P, v, M, chi, Jc, Pi_c, fam.lam, None, m_cond, jc_cond)
    if with_torsion:
        fr.S = torsion(fr, fam, K, splitting)
    return fr


def shifted_frame(frame: ReducibilityFrame, K: TorusEmbedding, fam, splitting, omega):
    """The frame evaluated at theta + omega (rebuilt from shifted ingredients)."""
    Ks = K.translate(omega)
    return build_frame(Ks, fam, splitting.shifted(omega), with_torsion=False, check=False)


def torsion(frame: ReducibilityFrame, fam: ConformalMapFamily, K: TorusEmbedding,
            splitting: TrichotomySplitting, Df=None):
    """S(theta) on the grid."""
    if Df is None:
        Df = fam.jacobian(K.values(), K.mu, check=False)
    fs = shifted_frame(frame, K, fam, splitting, K.omega)
    lam = fam.lam
    S = _T(fs.P) @ (Df @ frame.v) - lam * _T(fs.P) @ fs.v
    return S[:, 0, 0]


def torsion_average(frame: ReducibilityFrame):
    return complex(np.mean(frame.S))


def reducibility_residual(frame: ReducibilityFrame, fam: ConformalMapFamily, K: TorusEmbedding,
                          splitting: TrichotomySplitting, rho: float = 0.0, Df=None):
    """``E_R = Df M - M(theta+w) [[1, S], [0, lam]]`` and its norm."""
    if Df is None:
        Df = fam.jacobian(K.values(), K.mu, check=False)
    fs = shifted_frame(frame, K, fam, splitting, K.omega)
    G = frame.grid.n_grid
    B = np.zeros((G, 2, 2), dtype=complex)
    B[:, 0, 0] = 1.0
    B[:, 0, 1] = frame.S
    B[:, 1, 1] = fam.lam
    ER = Df @ frame.M - fs.M @ B
    return ER, frame.grid.norm(ER, rho)


def isotropy_error(K: TorusEmbedding, fam: ConformalMapFamily, rho: float = 0.0) -> float:
    """Norm of DK^T J DK (a 1x1 antisymmetric matrix for circles)."""
    DK = K.DK()
    a = _T(DK) @ fam.J @ DK
    return K.grid.norm(a, rho)


def reduce_center_to_constant(S, lam, omega: float, grid: Optional[SpectralGrid] = None):
    """Solve ``S - lam B(theta+w) + B(theta) = 0`` for B.

    Rewritten as ``B(theta+w) - B(theta)/lam = S/lam`` and solved mode by mode.
    For ``lam = 1`` the average of S must vanish.  The output grows like
    ``1/|lam - 1|`` as lam approaches 1.
    """
    lam = complex(lam) if np.iscomplexobj(lam) else float(lam)
    if isinstance(S, FourierSeries):
        B = solve_cohomology(S * (1.0 / lam), 1.0 / lam, omega)
    else:
        B = solve_cohomology(np.asarray(S) / lam, 1.0 / lam, omega, grid)
    return B
