import numpy as np
import pytest
from scipy.integrate import quad

from firesale import CurveError, LinearDensity, LinearHaircut, TabulatedDensity, TabulatedHaircut


def test_linear_density_identities():
    f = LinearDensity(0.1, 5.0)
    x = np.linspace(0, 5, 101)
    assert np.allclose(f.integral(x), x - 0.05 * x * x, rtol=0, atol=1e-15)
    assert np.allclose(f.inverse(f.value(x)), x, rtol=0, atol=1e-14)
    assert f.derivative(2.0) == -0.1
    assert f.second_derivative(2.0) == 0.0


def test_linear_density_inverse_range():
    f = LinearDensity(0.1, 5.0)
    with pytest.raises(CurveError):
        f.inverse(0.3)


@pytest.mark.parametrize("alpha,cap", [(0.0, 1.0), (-1.0, 1.0), (0.1, 0.0)])
def test_linear_density_rejects_bad_parameters(alpha, cap):
    with pytest.raises(CurveError):
        LinearDensity(alpha, cap)


def test_tabulated_integral_matches_quadrature():
    f = TabulatedDensity((0.0, 1.0, 2.5, 4.0), (1.0, 0.7, 0.55, 0.5))
    for x in [0.0, 0.3, 1.0, 1.7, 2.5, 3.9, 4.0]:
        ref, _ = quad(lambda t: float(f.value(t)), 0, x, points=[1.0, 2.5], epsabs=1e-14)
        assert f.integral(x) == pytest.approx(ref, abs=1e-13)


def test_tabulated_derivative_and_inverse():
    f = TabulatedDensity((0.0, 1.0, 2.0), (1.0, 0.8, 0.7))
    assert f.derivative(0.5) == pytest.approx(-0.2)
    assert f.derivative(1.0) == pytest.approx(-0.1)  # right slope at a knot
    assert f.derivative(2.0) == pytest.approx(-0.1)  # left slope at the cap
    assert f.inverse(0.75) == pytest.approx(1.5)
    flat = TabulatedDensity((0.0, 1.0, 2.0), (1.0, 0.9, 0.95))
    with pytest.raises(CurveError):
        flat.inverse(0.95)


@pytest.mark.parametrize("knots,values", [((0.0,), (1.0,)), ((0.5, 1.0), (1.0, 0.9)), ((0.0, 1.0, 1.0), (1, 0.9, 0.8))])
def test_tabulated_rejects_bad_knots(knots, values):
    with pytest.raises(CurveError):
        TabulatedDensity(knots, values)


def test_haircuts():
    g = LinearHaircut(0.7, 0.05, 4.0)
    assert g.value(0.0) == 0.7
    assert g.value(2.0) == pytest.approx(0.6)
    assert g.derivative(1.0) == -0.05
    with pytest.raises(CurveError):
        LinearHaircut(1.2, 0.05, 4.0)
    t = TabulatedHaircut((0.0, 2.0, 4.0), (0.6, 0.4, 0.3))
    assert t.value(1.0) == pytest.approx(0.5)
    assert t.derivative(3.0) == pytest.approx(-0.05)
