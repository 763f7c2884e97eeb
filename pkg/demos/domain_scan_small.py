"""A coarse scan of the complex eps disc |eps| <= 0.1 with lambda(eps) = 1 - eps.

Every sample is either accepted (Newton converged from the series seed with
all checks green) or rejected with one reason.  Lowering A reuses the Newton
verdicts.  Run: python demos/domain_scan_small.py  (about 10 s)
"""
from whiskered import (CoupledStandardWhiskerMap, GridSpec, LambdaSpec, SpectralGrid,
                       lindstedt_bundle_expansion, lindstedt_torus_expansion, restrict_raster,
                       scan_analyticity_domain)

fam = CoupledStandardWhiskerMap(lam_spec=LambdaSpec("power", alpha=-1.0, power=1))
ex = lindstedt_bundle_expansion(fam, lindstedt_torus_expansion(fam, 6, SpectralGrid(64)))

raster = scan_analyticity_domain(fam, ex, GridSpec("cartesian", 15, 0.1), workers=1)
print("A = 1:   ", raster.counts())
print("A = 1e-9:", restrict_raster(raster, 1e-9).counts())

worst = max(r.residual for r in raster.results if r.accepted)
print(f"largest accepted residual {worst:.2e}")
