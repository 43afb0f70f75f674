# Characteristic roots at both equilibria via the argument principle.
from gogrow import ModelParams
from gogrow import spectral as sp

p = ModelParams(20.0)
print("leading real root at zero:", sp.leading_real_root_at_zero(p))

for r in sp.find_roots(sp.AT_STAR, p, sp.Rectangle(-1, 1, 0, 13)):
    print(f"  {r.lam.real:+.6f} {r.lam.imag:+.6f}i   residual {r.residual:.1e}")

# unstable dimension at zero grows by two at each threshold rho_j
for j in (1, 2, 3):
    rc = sp.rho_crit(j)
    below = sp.unstable_count_winding(ModelParams(rc - 0.05))
    above = sp.unstable_count_winding(ModelParams(rc + 0.05))
    print(f"rho_{j} = {rc:.4f}: {below} -> {above}")

# large rho: the leading pairs at x* approach 2 k pi i
scan = sp.spectral_limit_scan([1, 10, 100, 1000])
for rho, d in zip(scan.rhos, scan.distances):
    print(f"rho={rho:6.0f}  |lambda_k - 2k pi i| =", " ".join(f"{v:.4f}" for v in d))
