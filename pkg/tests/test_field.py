import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moutard.errors import DimensionError, GridMismatch
from moutard.field import (
    Field,
    Grid,
    divergence,
    format_field,
    gradient,
    laplacian,
    parse_field,
    partial,
    path_integrate,
    read_field,
    wirtinger_dz,
    wirtinger_dzbar,
    write_field,
    zero_set,
)


@pytest.fixture
def g2():
    return Grid.box([0.0, 0.0], [1.0, 1.0], [33, 33])


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((0.0,), (0.0,), (5,))
    with pytest.raises(ValueError):
        Grid((0.0,), (0.1,), (2,))
    with pytest.raises(DimensionError):
        Grid((0.0, 0.0), (0.1,), (5, 5))


def test_grid_points_and_refine():
    g = Grid.box([-1.0, 2.0], [1.0, 3.0], [5, 9])
    assert g.dim == 2 and g.size == 45
    assert g.point((4, 8)) == (1.0, 3.0)
    assert g.point((2, 0)) == (0.0, 2.0)
    r = g.refine()
    assert r.shape == (9, 17)
    assert r.spacing == (0.25, 0.0625)
    assert g.normalize_index((-1, -1)) == (4, 8)
    assert g.normalize_index(None) == (0, 0)


def test_field_arithmetic_checks_grid(g2):
    other = Grid.unit(17)
    a = g2.constant(1.0)
    with pytest.raises(GridMismatch):
        a + other.constant(1.0)
    b = (2.0 * a + 1) / 3 - a
    assert np.all(b.values == 0.0)
    assert not b.values.flags.writeable


def test_masks_are_ored_and_nan_filled(g2):
    m = np.zeros(g2.shape, bool)
    m[4, 5] = True
    a = g2.constant(1.0).with_mask(m)
    c = a + g2.constant(2.0)
    assert c.mask[4, 5] and np.isnan(c.values[4, 5])
    assert c.max_abs() == 3.0
    assert g2.constant(1.0).with_mask(np.zeros(g2.shape, bool)).mask is None


def test_conj_involution(g2):
    F = g2.z() * g2.z() + 1j
    assert np.array_equal(F.conj().conj().values, F.values)


@pytest.mark.parametrize("n", [9, 33])
def test_wirtinger_examples(n):
    g = Grid.unit(n)
    z = g.z()
    x1, x2 = g.coord(0), g.coord(1)
    assert np.allclose(wirtinger_dz(z).values, 1, atol=1e-12)
    assert np.allclose(wirtinger_dz(z.conj()).values, 0, atol=1e-12)
    assert np.allclose(wirtinger_dz(x1 * x1).values, x1.values, atol=1e-12)
    assert np.allclose(wirtinger_dzbar(z.conj()).values, 1, atol=1e-12)
    assert np.allclose(wirtinger_dzbar(z).values, 0, atol=1e-12)
    assert np.allclose(wirtinger_dzbar(x2 * x2).values, 1j * x2.values, atol=1e-12)


def test_wirtinger_requires_2d():
    with pytest.raises(DimensionError):
        wirtinger_dz(Grid.unit(5, 3).constant(1.0))
    with pytest.raises(DimensionError):
        wirtinger_dzbar(Grid.unit(5, 1).constant(1.0))


def test_wirtinger_exact_on_quadratics(g2):
    rng = np.random.default_rng(0)
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    x1, x2 = g2.coords()
    F = Field(g2, c[0] + c[1] * x1 + c[2] * x2 + c[3] * x1 ** 2 + c[4] * x1 * x2 + c[5] * x2 ** 2)
    d1 = c[1] + 2 * c[3] * x1 + c[4] * x2
    d2 = c[2] + c[4] * x1 + 2 * c[5] * x2
    assert np.abs(wirtinger_dz(F).values - 0.5 * (d1 - 1j * d2)).max() < 1e-12
    assert np.abs(wirtinger_dzbar(F).values - 0.5 * (d1 + 1j * d2)).max() < 1e-12


def test_conjugation_rule(g2):
    rng = np.random.default_rng(1)
    F = Field(g2, rng.normal(size=g2.shape) + 1j * rng.normal(size=g2.shape))
    lhs = wirtinger_dzbar(F.conj()).values
    rhs = np.conj(wirtinger_dz(F).values)
    assert np.abs(lhs - rhs).max() <= 1e-15


def test_wirtinger_convergence():
    errs, hs = [], []
    for n in (33, 65, 129):
        g = Grid.unit(n)
        F = g.sample(lambda x1, x2: np.exp(x1) * np.cos(x2))
        exact = g.sample(lambda x1, x2: 0.5 * np.exp(x1) * (np.cos(x2) + 1j * np.sin(x2)))
        errs.append(np.abs(wirtinger_dz(F).values - exact.values).max())
        hs.append(g.h)
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order >= 1.9


def test_gradient_and_divergence_examples():
    g3 = Grid.unit(7, 3)
    gx = gradient(g3.coord(0))
    assert all(np.abs(c.values - e).max() < 1e-12 for c, e in zip(gx, (1, 0, 0)))
    assert all(np.all(c.values == 0) for c in gradient(g3.constant(4.0)))
    g = Grid.unit(17)
    x1, x2 = g.coord(0), g.coord(1)
    d = gradient(x1 * x2)
    assert np.abs(d[0].values - x2.values).max() < 1e-12
    assert np.abs(d[1].values - x1.values).max() < 1e-12
    assert np.allclose(divergence([x1, x2]).values, 2, atol=1e-12)
    assert np.allclose(divergence([x2, -x1]).values, 0, atol=1e-12)
    assert np.allclose(divergence(gradient(x1 * x1 + x2 * x2)).values, 4, atol=1e-12)
    assert np.allclose(laplacian(x1 * x1 + x2 * x2).values, 4, atol=1e-12)


def test_divergence_errors():
    g = Grid.unit(9)
    with pytest.raises(GridMismatch):
        divergence([g.coord(0), Grid.unit(11).coord(1)])
    with pytest.raises(DimensionError):
        divergence([g.coord(0)])


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 2 ** 16))
def test_derivative_linearity(a, b, seed):
    g = Grid.unit(9)
    rng = np.random.default_rng(seed)
    F = Field(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    G = Field(g, rng.normal(size=g.shape))
    for op in (wirtinger_dz, wirtinger_dzbar, lambda f: partial(f, 1), laplacian):
        lhs = op(a * F + b * G).values
        rhs = a * op(F).values + b * op(G).values
        scale = max(1.0, np.abs(rhs).max())
        assert np.abs(lhs - rhs).max() <= 1e-12 * scale


def test_path_integrate_linear_examples():
    g = Grid.box([0.0, 0.0], [1.0, 1.0], [17, 17])
    one = g.constant(1.0 + 0j)
    W, defect = path_integrate(1j * one, 1j * one)
    assert np.abs(W.values - 2j * g.coord(0).values).max() < 1e-12 and defect < 1e-12
    W, _ = path_integrate(one, 0 * one, base=(3, 5))
    z = g.z().values
    assert np.abs(W.values - (z - z[3, 5])).max() < 1e-12


def test_path_integrate_quadratic_oracle():
    # P = psi psi+ with psi = z, psi+ = i; the exact primitive is i z^2/2 - conj(i z^2/2)
    g = Grid.unit(65)
    P = 1j * g.z()
    W, defect = path_integrate(P, -P.conj())
    z = g.z().values
    exact = 0.5j * z ** 2 - np.conj(0.5j * z ** 2)
    assert np.abs(W.values - exact).max() <= 50 * g.h ** 2
    assert defect <= 50 * g.h ** 2


def test_path_defect_converges():
    defects, hs = [], []
    for n in (33, 65, 129):
        g = Grid.unit(n)
        P = g.sample(lambda x1, x2: np.exp(x1 + 1j * x2) * (1 + 0j))  # holomorphic, dzbar P = 0 = dz Q
        W, d = path_integrate(P, 0 * P)
        defects.append(d)
        hs.append(g.h)
    assert np.polyfit(np.log(hs), np.log(defects), 1)[0] >= 1.9


def test_path_defect_detects_incompatible_pair():
    g = Grid.unit(33)
    P = g.coord(1).astype_complex()  # dzbar P = i/2 but Q = 0
    _, d = path_integrate(P, 0 * P)
    assert d > 0.1


@pytest.mark.parametrize("dtype", [float, complex])
def test_field_file_roundtrip(tmp_path, dtype):
    g = Grid.box([-0.3, 1.0 / 3.0], [0.7, 2.0], [5, 7])
    rng = np.random.default_rng(3)
    vals = rng.normal(size=g.shape) * 10.0 ** rng.integers(-200, 200, size=g.shape)
    if dtype is complex:
        vals = vals + 1j * rng.normal(size=g.shape)
    vals[1, 2] = np.nan
    F = Field(g, vals)
    path = write_field(F, tmp_path / "f.txt")
    G = read_field(path)
    assert G.grid == g
    assert np.array_equal(G.values, F.values, equal_nan=True)
    assert G.mask is not None and G.mask[1, 2] and G.mask.sum() == 1
    assert format_field(G) == format_field(F)


def test_field_file_header():
    F = Grid.unit(3, 1).constant(1.0)
    text = format_field(F)
    assert text.splitlines()[0] == "# grid d=1 origin=0.0 spacing=0.5 shape=3 kind=real"
    with pytest.raises(ValueError):
        parse_field("1\n2\n")
    with pytest.raises(ValueError):
        parse_field(text + "4\n")


def test_zero_set_catches_sign_change_between_points():
    g = Grid.unit(10, 1)
    F = g.coord(0) - 0.5  # 0.5 lies between grid points
    zs = zero_set(F)
    assert zs.sum() == 2 and zs[4] and zs[5]
