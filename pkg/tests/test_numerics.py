import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wkbwigner.numerics import (ComplexField1D, Grid1D, GridError, RealField2D, UnsupportedOrderError,
                                airy_phi, conjugate_grid, convolve_along_axis, cosine_taper,
                                inverse_fourier_grid, laguerre, refine_midpoints, spectral_derivative)


def phi_by_quadrature(y):
    # (1/sqrt(pi)) int_0^inf cos(u^3/3 + u y) du, oscillatory tail summed by quadosc
    mpmath.mp.dps = 30
    f = lambda u: mpmath.cos(u ** 3 / 3 + u * y)
    val = mpmath.quadosc(f, [0, mpmath.inf], zeros=lambda n: mpmath.cbrt(3 * mpmath.pi * n))
    return float(val / mpmath.sqrt(mpmath.pi))


@pytest.mark.parametrize("y", [-2.0, 0.0, 2.0, -7.5, 1.0])
def test_airy_phi_matches_defining_integral(y):
    assert airy_phi(y) == pytest.approx(phi_by_quadrature(y), rel=1e-10, abs=1e-14)


def test_airy_phi_at_zero_closed_form():
    expected = math.sqrt(math.pi) * 3 ** (-2 / 3) / math.gamma(2 / 3)
    assert airy_phi(0.0) == pytest.approx(expected, rel=1e-14)
    assert airy_phi(0.0) == pytest.approx(0.62927, abs=1e-5)


def test_airy_phi_decays():
    v = airy_phi(10.0)
    assert 0 < v < 1e-9


def test_airy_phi_wide_range_against_mpmath():
    ys = np.linspace(-50, 50, 201)
    ours = airy_phi(ys)
    ref = np.array([float(mpmath.sqrt(mpmath.pi) * mpmath.airyai(y)) for y in ys])
    # relative to the local envelope on the oscillating side
    env = np.where(ys < 0, np.abs(np.minimum(ys, -1.0)) ** -0.25, np.abs(ref))
    env = np.maximum(env, np.abs(ref))
    assert np.max(np.abs(ours - ref) / env) < 1e-10


def test_airy_phi_rejects_nonfinite():
    with pytest.raises(ValueError):
        airy_phi(float("nan"))


def test_laguerre_examples():
    assert laguerre(0, 3.7) == 1.0
    assert laguerre(1, 2.0) == -1.0
    assert laguerre(8, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_laguerre_order_guard():
    with pytest.raises(UnsupportedOrderError):
        laguerre(65, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 30), st.floats(0, 60))
def test_laguerre_matches_mpmath(n, y):
    ref = float(mpmath.laguerre(n, 0, y))
    assert laguerre(n, y) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, abs(ref)))


def test_grid_validation():
    with pytest.raises(GridError):
        Grid1D(0.0, 1.0, 1)
    with pytest.raises(GridError):
        Grid1D(1.0, 0.0, 5)
    g = Grid1D(-1.0, 1.0, 5)
    assert g.spacing == 0.5
    assert g.index_of(0.5) == 3 and g.index_of(0.25) is None


def test_field_validation():
    g = Grid1D(0, 1, 3)
    with pytest.raises(GridError):
        ComplexField1D(g, [1, 2])
    with pytest.raises(ValueError):
        ComplexField1D(g, [1, np.inf, 2])
    W = RealField2D(g, g, np.arange(9.0))  # flat payload is reshaped row-major
    assert W.values[1, 0] == 3.0


def test_inverse_fourier_gaussian():
    g = Grid1D(-20, 20, 801)
    z = g.points
    f = ComplexField1D(g, np.exp(-(z - 1.0) ** 2 / 2))
    F = inverse_fourier_grid(f)
    t = F.x
    exact = np.exp(-t ** 2 / 2) * np.exp(-1j * t)
    assert np.max(np.abs(F.values - exact)) < 1e-12
    back = inverse_fourier_grid(ComplexField1D(F.grid, F.values), sign=+1)
    assert conjugate_grid(F.grid).n == g.n and back.values.shape == (g.n,)


def test_inverse_fourier_derivative_and_translation_rules():
    g = Grid1D(-20, 20, 801)
    z = g.points
    f = np.exp(-z ** 2 / 2)
    F = inverse_fourier_grid(ComplexField1D(g, f))
    dF = inverse_fourier_grid(ComplexField1D(g, -z * f))
    assert np.max(np.abs(dF.values - 1j * F.x * F.values)) < 1e-12
    shifted = inverse_fourier_grid(ComplexField1D(g, np.exp(-(z + 1) ** 2 / 2)))
    assert np.max(np.abs(shifted.values - np.exp(1j * F.x) * F.values)) < 1e-12


def test_spectral_derivative_of_gaussian():
    g = Grid1D(-15, 15, 512)
    x = g.points
    f = np.exp(-x ** 2)
    d2 = spectral_derivative(f, g.spacing, 2)
    assert np.max(np.abs(d2 - (4 * x ** 2 - 2) * f)) < 1e-9


def test_refine_midpoints_spectral_and_cubic():
    g = Grid1D(-12, 12, 241)
    x = g.points
    f = np.exp(-x ** 2 / 2) * np.exp(0.5j * x)
    fine = refine_midpoints(f, "spectral")
    xf = np.linspace(-12, 12, 481)
    exact = np.exp(-xf ** 2 / 2) * np.exp(0.5j * xf)
    assert np.max(np.abs(fine - exact)) < 1e-12
    assert np.max(np.abs(refine_midpoints(f, "cubic") - exact)) < 1e-3
    with pytest.raises(ValueError):
        refine_midpoints(f, "linear")


def test_cosine_taper_shape():
    w = cosine_taper(100, 0.1)
    assert w[0] == 0 and np.all(w[10:90] == 1) and np.all(np.diff(w[:10]) > 0)


def test_convolve_along_axis_gaussians():
    g = Grid1D(-10, 10, 401)
    X, P = np.meshgrid(g.points, g.points, indexing="ij")
    A = RealField2D(g, g, np.exp(-P ** 2 / 2))
    B = RealField2D(g, g, np.exp(-(P - 1) ** 2 / 2))
    C = convolve_along_axis(A, B, "p")
    exact = math.sqrt(math.pi) * np.exp(-(P - 1) ** 2 / 4)
    assert np.max(np.abs(C.values - exact)) < 1e-10
    assert C.meta["tail_mass_a"] < 1e-10


def test_convolve_requires_symmetric_odd_axis():
    g = Grid1D(-10, 10, 400)
    A = RealField2D(g, g, np.zeros((400, 400)))
    with pytest.raises(GridError):
        convolve_along_axis(A, A, "p")
