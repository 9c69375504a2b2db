import numpy as np
import pytest

from fracap.expr import Expression, ExpressionError, complex_step_derivative


def test_basic_grammar():
    e = Expression("1 + 0.5*cos(x) - sin(2*x)**2 / exp(0) + sqrt(4) + pi", ("x",))
    x = np.linspace(0, 1, 5)
    assert np.allclose(e(x), 1 + 0.5 * np.cos(x) - np.sin(2 * x) ** 2 + 2 + np.pi)
    assert Expression("-u**2", ("u",))(3.0) == -9.0


@pytest.mark.parametrize("text", ["__import__('os')", "x.real", "abs(x)", "x if x else 1", "[x]", "y", "'a'", "x ^ 2", "sin(x, x)"])
def test_rejects(text):
    with pytest.raises(ExpressionError):
        Expression(text, ("x",))


def test_syntax_error():
    with pytest.raises(ExpressionError):
        Expression("1 +", ("x",))


def test_complex_step():
    e = Expression("u**3 + exp(u)", ("u",))
    d = complex_step_derivative(e)
    u = np.array([0.0, 0.5, -1.2])
    assert np.allclose(d(u), 3 * u ** 2 + np.exp(u), rtol=1e-14)
