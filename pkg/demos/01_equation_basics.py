# The scaled go-or-grow equation has one parameter, rho = r * tau.
# Start with the two equilibria and the total-density functional theta.
import numpy as np

from gogrow import HistoryFunction, ModelParams, equilibria, in_omega, rhs, theta

p = ModelParams(2.0)
print("equilibria:", equilibria(p))

# constant histories: f(c) = rho c (1 - (1 + rho) c)
for c in (0.0, 0.1, p.x_star, 0.5):
    phi = HistoryFunction.constant(c)
    print(f"c={c:.4f}  f={rhs(phi, p):+.5f}  theta={theta(phi, p):.4f}  in Omega: {in_omega(phi, p)}")

# anything sampled on [-1, 0] works, with N even
phi = HistoryFunction.from_callable(lambda s: 0.05 * (1 + np.sin(6 * s)))
print("wavy history theta =", theta(phi, p))
