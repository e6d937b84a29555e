import numpy as np
import pytest

from moutard.conductivity import Conductivity
from moutard.conductivity2d import (
    ConductivitySolution,
    Moutard2D,
    TransformPlan2D,
    current,
    example2_solution,
    example3_solution,
    psi_to_u,
    seed_to_f,
    special_fplus,
    stream_from_current,
    stream_function,
    theorem1_recover,
    theorem1_transform,
    theorem2_MI,
    theorem2_MR,
    u_to_psi,
)
from moutard.errors import PositivityError, PreconditionError, SingularOmega, ZeroDivisor
from moutard.field import Grid, wirtinger_dz
from moutard.gaf import check_gaf, sigma_to_q
from moutard.verify import default_tolerance, interior_mask, residual

K = 1 + np.sqrt(2.0)


@pytest.fixture(scope="module")
def g():
    return Grid.unit(129)


def interior_max(F, band=3):
    vals = np.abs(F.values)
    return float(vals[interior_mask(F.grid, band) & F.valid()].max())


# Conductivity container

def test_conductivity_bounds_and_mask(g):
    s = Conductivity(g.sample(lambda a, b: 1 + a + b))
    assert s.sigma0 == 1.0 and s.sigma1 == 3.0 and not s.degenerate
    with pytest.raises(PositivityError):
        Conductivity(g.coord(0) - 0.5)
    d = Conductivity(g.coord(0) - 0.5, singular=True)
    assert d.degenerate and d.sigma0 > 0
    assert np.all(np.isnan(d.sigma.values[d.mask]))
    assert Conductivity(g.constant(4.0 + 0j)).sigma.is_complex is False


# dictionary between u, v and psi

def test_special_fplus_examples(g):
    one = g.constant(1.0)
    assert np.all(special_fplus(one, "R").values == 1)
    assert np.all(special_fplus(one, "I").values == 1j)
    assert np.all(special_fplus(g.constant(4.0), "I").values == 0.5j)
    s = g.sample(lambda a, b: np.exp(-2 * a))
    fr = special_fplus(s, "R")
    assert np.abs(fr.values - np.exp(-g.coord(0).values)).max() <= 1e-15
    assert residual("gan2", psi_plus=fr, q=sigma_to_q(s).q).passed
    with pytest.raises(ValueError):
        special_fplus(s, "X")


def test_u_to_psi_examples(g):
    one = g.constant(1.0)
    assert np.abs(u_to_psi(g.coord(0), one).values - 0.5).max() <= 1e-15
    assert np.abs(u_to_psi(g.coord(1), one).values + 0.5j).max() <= 1e-15
    assert u_to_psi(g.constant(3.0), one).max_abs() == 0


def test_psi_to_u_examples(g):
    one = g.constant(1.0)
    u = psi_to_u(g.constant(0.5 + 0j), one)
    assert np.abs(u.values - g.coord(0).values).max() <= 1e-12
    u = psi_to_u(g.constant(0j), one, value_at_base=2.5)
    assert np.all(u.values == 2.5)


def test_psi_to_u_roundtrip_harmonic(g):
    one = g.constant(1.0)
    u = g.sample(lambda a, b: np.exp(a) * np.sin(b))
    back = psi_to_u(u_to_psi(u, one), one, value_at_base=u.at(None))
    assert np.abs(back.values - u.values).max() <= default_tolerance(g, u.max_abs())


def test_stream_function_examples(g):
    one = g.constant(1.0)
    v = stream_function(ConductivitySolution.build(one, g.coord(0)))
    assert np.abs(v.values - g.coord(1).values).max() <= 1e-12
    v = stream_function(ConductivitySolution.build(one, g.coord(1)))
    assert np.abs(v.values + g.coord(0).values).max() <= 1e-12


FAMILIES = {
    "one": (lambda a, b: 1.0 + 0 * a, [lambda a, b: np.exp(a) * np.cos(b), lambda a, b: a * b,
                                        lambda a, b: a ** 2 - b ** 2]),
    "exp": (lambda a, b: np.exp(-2 * a), [lambda a, b: np.exp(K * a) * np.cos(b), lambda a, b: np.exp(2 * a),
                                          lambda a, b: np.exp((np.sqrt(1.25) + 1) * a) * np.sin(0.5 * b)]),
    # sigma = w^2 with w harmonic; solutions phi / w for harmonic phi
    "w2": (lambda a, b: (2 + a) ** 2, [lambda a, b: b / (2 + a), lambda a, b: 1 / (2 + a),
                                       lambda a, b: np.exp(b) * np.cos(a) / (2 + a)]),
}


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_stream_function_and_current(g, family):
    fs, us = FAMILIES[family]
    sigma = Conductivity(g.sample(fs))
    for fu in us:
        sol = ConductivitySolution.build(sigma, g.sample(fu))
        assert sol.report_u().passed
        v = stream_function(sol)
        assert residual("conj1.3", sigma=sigma.sigma, v=v).passed
        # independent route through the current density
        v2 = stream_from_current(sigma, sol.u)
        assert np.abs(v.values - v2.values).max() <= default_tolerance(g, max(1.0, v.max_abs()))
        # continuity of the current
        I1, I2 = sol.current
        from moutard.field import divergence
        assert interior_max(divergence([I1, I2])) <= default_tolerance(g, max(I1.max_abs(), I2.max_abs()))
        # psi = sigma^(-1/2) (I1 - i I2) / 2
        psi = u_to_psi(sol.u, sigma)
        alt = 0.5 * (I1 - 1j * I2) / sigma.sqrt()
        assert np.abs(psi.values - alt.values).max() <= 1e-12 * max(1.0, psi.max_abs())


def test_current_definition(g):
    sigma = g.sample(lambda a, b: np.exp(-2 * a))
    u = g.sample(lambda a, b: np.exp(2 * a))
    I1, I2 = current(sigma, u)
    assert np.abs(I1.values - 2).max() <= 50 * g.h ** 2 * 8
    assert np.abs(I2.values).max() <= 1e-12


# theorem1_transform and theorem1_recover

def test_theorem1_variant_I_closed_form(g):
    one = g.constant(1.0)
    c0 = 1.5
    plan = TransformPlan2D("I", 2 * g.coord(0), omega_mode="raw", constant=1j * c0)
    st, qt = theorem1_transform(one, plan)
    exact = (2 * g.coord(0).values + c0) ** 2
    assert np.abs(st.sigma.values - exact).max() <= 1e-12 * exact.max()
    assert np.abs(qt.q.values - sigma_to_q(st).q.values)[3:-3, 3:-3].max() <= default_tolerance(g, 2.0)


def test_theorem1_variant_R_closed_form(g):
    # f = i dz(v1) / sqrt(sigma) = 1 for v1 = 2 x2, so omega(f, f+_R) = 2 i x2 + i c0
    one = g.constant(1.0)
    c0 = 1.5
    plan = TransformPlan2D("R", 2 * g.coord(1), omega_mode="raw", constant=1j * c0)
    t = Moutard2D(one, plan)
    assert np.abs(t.f.values - 1).max() <= 1e-12
    exact = 1.0 / (2 * g.coord(1).values + c0) ** 2
    assert np.abs(t.sigma_tilde.sigma.values - exact).max() <= 1e-12


def test_theorem1_consistent_with_theorem2(g):
    sigma = g.sample(lambda a, b: np.exp(-2 * a))
    u1 = g.sample(lambda a, b: np.exp(K * a) * np.cos(b))
    t = Moutard2D(sigma, TransformPlan2D("I", u1))
    u1_used = t.seed_solution
    st, _ = theorem2_MI(sigma, u1_used, u1_used)
    rel = np.abs(t.sigma_tilde.sigma.values - st.sigma.values) / np.abs(st.sigma.values)
    assert rel.max() <= 1e-12


def test_theorem1_recover_matches_theorem2(g):
    one = g.constant(1.0)
    c0 = 1.5
    t = Moutard2D(one, TransformPlan2D("I", 2 * g.coord(0), omega_mode="raw", constant=1j * c0))
    pt = t.transform_solution(g.coord(1))
    ut, vt = t.recover(pt)
    ref = g.coord(1) / (2 * g.coord(0) + c0)
    diff = ut.values - ref.values  # recovered u~ = u / (u1 + c0) up to a constant
    assert np.ptp(diff) <= default_tolerance(g)
    assert residual("hcm1", sigma=t.sigma_tilde.sigma, u=ut).passed
    assert residual("hcm1bis", sigma=t.sigma_tilde.sigma, v=vt).passed


def test_theorem1_recover_zero_psi(g):
    st = Conductivity(g.sample(lambda a, b: (2 + a) ** 2))
    ut, vt = theorem1_recover(st, g.constant(0j), value_u=1.0)
    assert np.all(ut.values == 1.0) and np.all(vt.values == 0.0)
    assert residual("hcm1", sigma=st.sigma, u=ut).norm_max == 0.0


@pytest.mark.parametrize("variant", ["I", "R"])
def test_theorem1_pipeline(g, variant):
    sigma = Conductivity(g.sample(lambda a, b: np.exp(-2 * a)))
    if variant == "I":
        seed = g.sample(lambda a, b: np.exp(K * a) * np.cos(b))
    else:
        seed = g.sample(lambda a, b: np.exp((np.sqrt(2) - 1) * a) * np.cos(b))
    t = Moutard2D(sigma, TransformPlan2D(variant, seed))
    assert t.omega.min_abs() >= 1.0
    assert t.q_tilde.compat_defect <= default_tolerance(g, t.q_tilde.q.max_abs())
    u = g.sample(lambda a, b: np.exp(2 * a))
    pt = t.transform_solution(u)
    assert residual("gan3", psi=pt, q=t.q_tilde.q).passed
    ut, vt = t.recover(pt)
    assert residual("hcm1", sigma=t.sigma_tilde.sigma, u=ut).passed
    assert residual("hcm1bis", sigma=t.sigma_tilde.sigma, v=vt).passed


def test_transform_stream_equals_transform_solution(g):
    sigma = Conductivity(g.sample(lambda a, b: np.exp(-2 * a)))
    u = g.sample(lambda a, b: np.exp(K * a) * np.cos(b))
    v = stream_function(ConductivitySolution(sigma, u))
    t = Moutard2D(sigma, TransformPlan2D("I", g.sample(lambda a, b: np.exp(2 * a))))
    a, b = t.transform_solution(u), t.transform_stream(v)
    assert np.abs(a.values - b.values)[3:-3, 3:-3].max() <= default_tolerance(g, a.max_abs())


def test_seed_to_f_reproduces_seed(g):
    sigma = g.sample(lambda a, b: np.exp(-2 * a))
    u1 = g.sample(lambda a, b: np.exp(K * a) * np.cos(b))
    t = Moutard2D(sigma, TransformPlan2D("I", u1))
    seed = t.seed_solution.values - t.seed_solution.at(None)
    assert np.abs(seed - (u1.values - u1.at(None))).max() <= default_tolerance(g, u1.max_abs())
    f = seed_to_f(sigma, "I", u1)
    assert check_gaf(f, sigma_to_q(sigma)) <= default_tolerance(g, f.max_abs())


def test_singular_omega(g):
    one = g.constant(1.0)
    plan = TransformPlan2D("I", 2 * g.coord(0), omega_mode="raw", constant=-1j)
    with pytest.raises(SingularOmega):
        Moutard2D(one, plan)
    plan.singular = True
    t = Moutard2D(one, plan)
    assert t.sigma_tilde.degenerate and t.sigma_tilde.mask[64].all()


def test_plan_rejects_bad_variant(g):
    with pytest.raises(ValueError):
        TransformPlan2D("X", g.coord(0))


# theorem2_MI and theorem2_MR

def test_theorem2_MI_examples(g):
    one = g.constant(1.0)
    x1, x2 = g.coord(0), g.coord(1)
    st, ut = theorem2_MI(one, x1 + 2, x2)
    assert np.abs(st.sigma.values - (x1.values + 2) ** 2).max() <= 1e-12
    assert residual("hcm1", sigma=st.sigma, u=ut).passed
    _, ut = theorem2_MI(one, x1 + 2, x1 + 2)
    assert np.all(ut.values == 1.0)
    st, ut = theorem2_MI(one, g.constant(1.0), x2)
    assert np.array_equal(st.sigma.values, one.values) and np.array_equal(ut.values, x2.values)
    with pytest.raises(ZeroDivisor):
        theorem2_MI(one, x1 - 0.5, x2)
    st, ut = theorem2_MI(one, x1 - 0.5, x2, singular=True)
    assert st.degenerate and np.isnan(ut.values[64]).all()


def test_theorem2_MR_examples(g):
    one = g.constant(1.0)
    x1, x2 = g.coord(0), g.coord(1)
    st, vt = theorem2_MR(one, x2 + 2, x1)
    assert np.abs(st.sigma.values - (x2.values + 2) ** -2).max() <= 1e-12
    assert np.abs(vt.values - x1.values / (x2.values + 2)).max() <= 1e-15
    assert residual("hcm1bis", sigma=st.sigma, v=vt).passed
    _, vt = theorem2_MR(one, x2 + 2, x2 + 2)
    assert np.all(vt.values == 1.0)
    st, vt = theorem2_MR(one, g.constant(1.0), x1)
    assert np.array_equal(st.sigma.values, one.values)


# closed-form example solutions

def test_example1_cross_module(g):
    w = 2 + g.coord(0)
    phi = g.sample(lambda a, b: np.exp(b) * np.cos(a))
    assert residual("hc1", sigma=w * w, u=phi / w).passed


def test_example2_closed_form(g):
    x1, x2 = g.coord(0), g.coord(1)
    sol = example2_solution(2 + x1, x2, c=0.25)
    exact = -(2 * x1.values + x1.values ** 2 / 2 + x2.values ** 2 / 2) + 0.25
    assert np.abs(sol.u.values - exact).max() <= 1e-12
    assert sol.report_u().passed
    assert np.abs(sol.sigma.sigma.values - (2 + x1.values) ** -2).max() <= 1e-15


def test_example2_antisymmetry(g):
    w = g.sample(lambda a, b: np.exp(a) * np.cos(b) + 2)
    sol = example2_solution(w, w, c=3.0)
    assert np.abs(sol.u.values - 3.0).max() <= 1e-12


def test_example2_phi_one(g):
    sol = example2_solution(2 + g.coord(0), g.constant(1.0))
    assert sol.report_u().passed


def test_example2_requires_harmonic(g):
    x1 = g.coord(0)
    with pytest.raises(PreconditionError):
        example2_solution(2 + x1 * x1, g.coord(1))
    with pytest.raises(PreconditionError):
        example2_solution(2 + x1, x1 * x1)


def test_example3(g):
    x1, x2 = g.coord(0), g.coord(1)
    sol = example3_solution(2 + x1, x2, 5.0, x2, 5.0)
    assert np.abs(sol.u.values - 1.0).max() <= 1e-12
    sol = example3_solution(2 + x1, x2, 5.0, g.constant(1.0))
    assert sol.report_u().passed


def test_example3_degenerate_singular_mode(g):
    x1, x2 = g.coord(0), g.coord(1)
    with pytest.raises(ZeroDivisor):
        example3_solution(x1 - 0.5, x2, 5.0, x1, 1.0)
    sol = example3_solution(x1 - 0.5, x2, 5.0, x1, 1.0, singular=True)
    assert sol.sigma.degenerate
    rep = sol.report_u()
    assert rep.passed and 0 < rep.masked_fraction < 0.5


# u / psi equivalence in both directions

@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_gaf_and_conductivity_residuals_agree(g, family):
    fs, us = FAMILIES[family]
    sigma = Conductivity(g.sample(fs))
    q = sigma_to_q(sigma)
    for fu in us:
        u = g.sample(fu)
        r_u = residual("hc1", sigma=sigma.sigma, u=u)
        psi = u_to_psi(u, sigma)
        r_psi = residual("gan1", psi=psi, q=q.q)
        assert r_u.passed and r_psi.passed
        # a non-solution fails both
        bad = u + g.coord(0) ** 2
        assert not residual("hc1", sigma=sigma.sigma, u=bad).passed
        assert not residual("gan1", psi=u_to_psi(bad, sigma), q=q.q).passed
