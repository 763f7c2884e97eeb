"""Solve the benchmark torus at eps = 0.05 and show the Newton error sequence.

Run: python demos/solve_benchmark.py
"""
from whiskered import CoupledStandardWhiskerMap, SolverConfig, exact_torus, reference_splitting, run_kam_iteration

fam = CoupledStandardWhiskerMap()  # kappa = 3, lambda = 0.9, golden omega
cfg = SolverConfig(n_modes=256)
grid = cfg.grid()
fe = fam.with_eps(0.05)

# the eps = 0 torus is exact and seeds the iteration
res = run_kam_iteration(exact_torus(fam, grid), fe, reference_splitting(fe, grid), cfg)

print(f"converged={res.converged} after {res.iterations} iterations, mu = {complex(res.K.mu).real:.15f}")
for k, e in enumerate(res.errors):
    print(f"  step {k}: invariance error {e:.3e}")

r = res.splitting.rates
print(f"rates: stable {r.lam_minus:.4f}, center [{r.lam_c_minus:.4f}, {r.lam_c_plus:.4f}], unstable {r.lam_plus:.4f}")
print(f"pairing lam_- * lam_+ = {r.lam_minus * r.lam_plus:.12f} (lambda = 0.9)")
