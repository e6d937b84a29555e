import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moutard.expr import Expression, ExpressionError, evaluate
from moutard.field import Grid


@pytest.fixture
def g():
    return Grid.unit(9)


def test_arithmetic_and_functions(g):
    x1, x2 = g.coords()
    cases = {
        "2+x1": 2 + x1,
        "x1^2 - x2^2": x1 ** 2 - x2 ** 2,
        "exp((1+sqrt(2))*x1)*cos(x2)": np.exp((1 + np.sqrt(2)) * x1) * np.cos(x2),
        "-x1/(x2+1)": -x1 / (x2 + 1),
        "log(e)*pi + abs(-x1)": np.pi + np.abs(x1),
        "sinh(x1) + cosh(x2) + tanh(x1*x2) + arctan(x2) + tan(x1/2) + sin(x2)":
            np.sinh(x1) + np.cosh(x2) + np.tanh(x1 * x2) + np.arctan(x2) + np.tan(x1 / 2) + np.sin(x2),
    }
    for text, exact in cases.items():
        assert np.array_equal(evaluate(text, g).values, exact), text


def test_constants_broadcast(g):
    F = evaluate("3", g)
    assert F.values.shape == g.shape and np.all(F.values == 3.0)


def test_coordinates_in_three_dimensions():
    g = Grid.unit(5, 3)
    F = evaluate("x1 + 10*x2 + 100*x3", g)
    x1, x2, x3 = g.coords()
    assert np.array_equal(F.values, x1 + 10 * x2 + 100 * x3)
    with pytest.raises(ExpressionError):
        evaluate("x3", Grid.unit(5))


@pytest.mark.parametrize("text", [
    "__import__('os')", "x1.real", "[x1]", "x1 if x1 else 0", "lambda: 1", "y", "open(x1)",
    "exp(x1, x2)", "x1 // 2", "x1 % 2", "'a'", "True", "x1 < 2", "exp(x=1)", "1 +",
])
def test_rejects_everything_outside_the_grammar(text):
    with pytest.raises(ExpressionError):
        Expression(text)


def test_error_is_a_value_error():
    with pytest.raises(ValueError):
        Expression("1 +")


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), c=st.floats(0.5, 3))
def test_matches_numpy_on_random_coefficients(a, b, c):
    g = Grid.unit(5)
    x1, x2 = g.coords()
    F = evaluate(f"({a!r})*x1 + ({b!r})*x2^2 + exp(-({c!r})*x1)", g)
    assert np.allclose(F.values, a * x1 + b * x2 ** 2 + np.exp(-c * x1), rtol=1e-14, atol=1e-14)
