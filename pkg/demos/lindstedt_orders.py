"""Lindstedt series: truncation residual against eps for several orders.

The residual of the order-N polynomial should shrink like eps^(N+1).
Run: python demos/lindstedt_orders.py
"""
import numpy as np

from whiskered import CoupledStandardWhiskerMap, SpectralGrid, lindstedt_torus_expansion

fam = CoupledStandardWhiskerMap()
grid = SpectralGrid(32)
eps = np.logspace(-3, -1, 9)

print("eps      " + "  ".join(f"{e:9.2e}" for e in eps))
for N in (2, 4, 6):
    ex = lindstedt_torus_expansion(fam, N, grid)
    coeffs = ex.residual_coefficients(extra=34)
    r = np.array([ex.residual_at(e, coeffs=coeffs) for e in eps])
    slope = np.polyfit(np.log(eps), np.log(r), 1)[0]
    print(f"N={N}      " + "  ".join(f"{x:9.2e}" for x in r) + f"   slope {slope:.2f}")

ex = lindstedt_torus_expansion(fam, 6, grid)
print("drift coefficients mu_j:", ", ".join(f"{complex(m).real:+.6e}" for m in ex.mu))
