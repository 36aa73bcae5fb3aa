import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from indexgame.expoly import ExpPoly, integrate_term

rates = st.floats(-40.0, 40.0).filter(lambda r: abs(r) > 1e-9 or r == 0.0)


@given(st.floats(-3.0, 3.0), st.integers(0, 3), rates, st.floats(0.1, 5.0))
def test_integrate_term_matches_quad(coef, power, rate, t_end):
    # anchor at t_end keeps the integrand O(1) for large positive rates
    offset = max(rate, 0.0) * t_end
    exact = integrate_term(coef, power, rate, offset, t_end)
    ref, _ = quad(lambda t: coef * t**power * math.exp(rate * t - offset), 0.0, t_end, epsabs=1e-13, epsrel=1e-12)
    assert exact == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_large_curvature_does_not_overflow():
    k, t_n = 500.0, 10.0
    y = ExpPoly.exp(1.0, k, anchor=t_n)
    assert y.integral(t_n) == pytest.approx(1.0 / k, rel=1e-12)
    assert float(y(t_n)) == 1.0


def test_algebra_and_derivative():
    a = ExpPoly.exp(2.0, -0.5) + ExpPoly.linear(3.0)
    b = ExpPoly.const(1.5)
    t = np.linspace(0, 4, 9)
    np.testing.assert_allclose((a * b)(t), a(t) * 1.5)
    np.testing.assert_allclose((a - 1.0)(t), a(t) - 1.0)
    np.testing.assert_allclose((1.0 - a)(t), 1.0 - a(t))
    np.testing.assert_allclose((a * a)(t), a(t) ** 2)
    np.testing.assert_allclose(a.derivative()(t), -np.exp(-0.5 * t) + 3.0)
    values, rates = a.generator()(t)
    np.testing.assert_allclose(rates, a.derivative()(t))


def test_product_integral():
    y = ExpPoly.exp(1.0, 0.7, power=1)
    z = y * y.derivative()
    # d/dt (y^2 / 2) = y y', so the integral is y(T)^2 / 2
    assert z.integral(3.0) == pytest.approx(float(y(3.0)) ** 2 / 2, rel=1e-12)
