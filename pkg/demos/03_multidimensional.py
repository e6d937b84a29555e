"""The transform sigma -> w^2 sigma, u -> u/w in any dimension.

Also shows that transforms compose, and that the zero-energy potential
Q = lap(sqrt(sigma))/sqrt(sigma) is left unchanged by them.

Run with ``python3 demos/03_multidimensional.py``.
"""
import numpy as np

from moutard import Grid, NdTransform, check_Q_invariance, compose, q_defect, residual, theorem3_transform

g = Grid.unit(33, 3)
x1, x2 = g.coord(0), g.coord(1)
one = g.constant(1.0)

# w = 2 + x1 is harmonic, so it is a valid seed for sigma = 1
t = NdTransform(2 + x1, one)
sigma_t, u_t = theorem3_transform(t, x2)
print("3D:", residual("mdhc2", sigma=sigma_t.sigma, u=u_t).line())

# two steps collapse into one seeded by the product of the seeds
u1, u2 = x1 + 2, x2 + 5
t1 = NdTransform(u1, one)
t2 = NdTransform(u2 / u1, t1.apply_sigma())
s_c, v_c = compose(t2, t1).apply(x1 * x2)
s_r, v_r = NdTransform(u2, one).apply(x1 * x2)
print("composition difference:", np.abs(v_c.values - v_r.values).max())

# the potential survives the transform
print("Q defect under w = 2 + x1:", check_Q_invariance(t))

# but not a transform of the stream-function kind: sigma~ = (x2 + 2)^-2
g2 = Grid.unit(129)
v1 = g2.coord(1) + 2
print("Q defect for sigma~ = (x2 + 2)^-2:", q_defect(g2.constant(1.0), 1 / (v1 * v1)))
