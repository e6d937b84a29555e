"""Building a new conductivity and its solutions by quadratures.

The seed is a solution u1 of the original equation.  The transform produces
sigma~ and carries any other solution u to a solution u~ of the new
equation, along with its stream function v~.

Run with ``python3 demos/02_transform_pipeline.py``.
"""
import numpy as np

from moutard import Conductivity, Grid, Moutard2D, TransformPlan2D, convergence_study, residual

K = 1 + np.sqrt(2)


def build(g, variant="I"):
    sigma = Conductivity(g.sample(lambda a, b: np.exp(-2 * a)))
    if variant == "I":
        seed = g.sample(lambda a, b: np.exp(K * a) * np.cos(b))
    else:
        # a stream function of the same family
        seed = g.sample(lambda a, b: np.exp((np.sqrt(2) - 1) * a) * np.cos(b))
    t = Moutard2D(sigma, TransformPlan2D(variant, seed))
    ut, vt = t.recover(t.transform_solution(g.sample(lambda a, b: np.exp(2 * a))))
    return t, ut, vt


g = Grid.unit(129)
for variant in ("I", "R"):
    t, ut, vt = build(g, variant)
    print(f"variant {variant}: sigma~ in [{t.sigma_tilde.sigma0:.3g}, {t.sigma_tilde.sigma1:.3g}], "
          f"min |omega| = {t.omega.min_abs():.3g}")
    print("  ", residual("hcm1", sigma=t.sigma_tilde.sigma, u=ut).line())
    print("  ", residual("hcm1bis", sigma=t.sigma_tilde.sigma, v=vt).line())

# the residual shrinks like h^2 as the grid is refined
for eq, key in (("hcm1", "u"), ("hcm1bis", "v")):
    def gen(grid, key=key):
        t, ut, vt = build(grid)
        return {"sigma": t.sigma_tilde.sigma, key: ut if key == "u" else vt}

    rep = convergence_study(eq, gen, Grid.unit(129), levels=4)
    print(eq, "norms", ["%.2e" % n for n in rep.norms], "order %.2f" % rep.estimated_order)
