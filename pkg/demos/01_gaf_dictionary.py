"""From a conductivity to its generalized analytic functions and back.

Run with ``python3 demos/01_gaf_dictionary.py``.
"""
import numpy as np

from moutard import ConductivitySolution, Grid, q_to_sigma, residual, sigma_to_q, stream_function, u_to_psi

g = Grid.unit(129)
sigma = g.sample(lambda a, b: np.exp(-2 * a))

# q = -dz(log sigma)/2 is constant 1/2 here
q = sigma_to_q(sigma)
print("q range:", q.q.values.real.min(), q.q.values.real.max())
print("compatibility defect:", q.compat_defect)

# and the quadrature brings sigma back
back = q_to_sigma(q, sigma_base=sigma.at(None))
print("round trip max relative error:", np.abs(back.sigma.values / sigma.values - 1).max())

# a solution of div(sigma grad u) = 0
K = 1 + np.sqrt(2)
u = g.sample(lambda a, b: np.exp(K * a) * np.cos(b))
print(residual("hc1", sigma=sigma, u=u).line())

# psi = sqrt(sigma) dz u solves dzbar psi = q conj(psi)
psi = u_to_psi(u, sigma)
print(residual("gan1", psi=psi, q=q.q).line())

# the stream function solves the conjugate equation
v = stream_function(ConductivitySolution(sigma, u))
print(residual("conj1.3", sigma=sigma, v=v).line())

# a function that is not a solution fails on both sides
bad = g.sample(lambda a, b: a * a)
print(residual("hc1", sigma=sigma, u=bad).line())
print(residual("gan1", psi=u_to_psi(bad, sigma), q=q.q).line())
