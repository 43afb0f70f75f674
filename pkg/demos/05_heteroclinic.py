# Connecting orbit from 0 to x*, launched along the unstable eigenfunction.
import math

from gogrow import IntegratorConfig, ModelParams
from gogrow.analysis import crossing_time, heteroclinic

p = ModelParams(20.0)
cfg = IntegratorConfig(200, 300.0)
res = heteroclinic(p, 1e-5, cfg)
print(res.to_dict())

# halving c only delays the orbit, by ln 2 / lambda0
half = heteroclinic(p, 5e-6, cfg)
shift = crossing_time(half.trajectory, p.x_star / 2) - crossing_time(res.trajectory, p.x_star / 2)
print(f"shift {shift:.5f}  expected {math.log(2) / res.lambda0:.5f}")
