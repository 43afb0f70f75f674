# At large rho the solution wanders for a long time in near-periodic
# patterns with period close to the delay before settling on x*.
from gogrow import IntegratorConfig, ModelParams, integrate
from gogrow.analysis import cosine_history, shape_gallery, transient_diagnostics

p = ModelParams(100.0)
traj, _ = integrate(p, cosine_history(), IntegratorConfig(200, 2000.0, record_diagnostics=False))

for window in ((40, 60), (400, 420), (1800, 1820)):
    d = transient_diagnostics(traj, window, p, with_spectrum=False)
    print(f"{window}: period={d.dominant_period:.4f}  amplitude={d.envelope_amplitude:.2e}")

d = transient_diagnostics(traj, (200, 2000), p)
print("envelope rate", d.envelope_rate, "vs Re of leading pair", d.leading_pair.real)

# different histories, different waveforms, same period
for e in shape_gallery(p):
    print(e.name, round(e.diagnostics.dominant_period, 4), round(float(e.trajectory.values.max()), 4))
