# Stochastic lattice model against its mean-field limit.
from gogrow import abm

lp = abm.LatticeParams(n_dims=2, side=100, seeding=0.05, switch_rate=1.0, cycle_delay=1.0)
res = abm.ensemble(lp, abm.spawn_seeds(2024, 20), t_end=10.0, record_dt=1.0)
mf = abm.mean_field_density(lp, 10.0)

step = round(1.0 / (mf.t[1] - mf.t[0]))
for k, t in enumerate(res.t):
    m, s = res.mean["total_density"][k], res.std["total_density"][k]
    print(f"t={t:4.1f}  abm {m:.4f} +- {s:.4f}   mean-field {mf.total_density[k * step]:.4f}")

# the gap is the pair-correlation error of the closure: agents cluster
# near their parents, so crowding bites earlier than in the mean field
