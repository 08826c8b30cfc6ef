import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wkbwigner.moyal import (CapabilityError, PolySymbol, SampledSymbol, closedness_check, moyal_bracket,
                             moyal_star, moyal_star_quadrature, star_eigen_residual)
from wkbwigner.numerics import Grid1D, RealField2D
from wkbwigner.potentials import PhysParams, ho_exact_wigner
from wkbwigner.wigner import wigner_transform
from wkbwigner.wkb import assemble_wavefunction, ho_assembly, match_coefficients, quantize_energy
from wkbwigner.potentials import PotentialModel


def gauss2(x0, p0, wx=1.0, wp=1.0):
    return lambda X, P: np.exp(-((X - x0) / wx) ** 2 - ((P - p0) / wp) ** 2)


def sampled(f, g):
    X, P = np.meshgrid(g.points, g.points, indexing="ij")
    return SampledSymbol(g, g, f(X, P))


def test_identity_element():
    H = PolySymbol.harmonic()
    one = PolySymbol.constant(1.0)
    assert np.allclose(moyal_star(H, one, 1.0).coeffs, H.coeffs)
    assert np.allclose(moyal_star(one, H, 1.0).coeffs, H.coeffs)


@pytest.mark.parametrize("hbar", [1.0, 0.3])
def test_canonical_commutator(hbar):
    x, p = PolySymbol.x(), PolySymbol.p()
    comm = moyal_star(x, p, hbar) - moyal_star(p, x, hbar)
    g = Grid1D(-3, 3, 7)
    vals = comm.on_grid(g, g)
    # this kernel's orientation gives x*p - p*x = -i hbar
    assert np.max(np.abs(vals + 1j * hbar)) < 1e-12
    br = moyal_bracket(x, p, hbar).on_grid(g, g)
    assert np.max(np.abs(br + 1)) < 1e-12


def test_commutator_sign_against_kernel_quadrature():
    # x and p are not decaying, so probe with Gaussian-damped versions whose product is dominated near 0
    hbar = 1.0
    A = lambda X, P: X * np.exp(-(X ** 2 + P ** 2) / 8)
    B = lambda X, P: P * np.exp(-(X ** 2 + P ** 2) / 8)
    g = Grid1D(-12, 12, 95)
    a, b = sampled(A, g), sampled(B, g)
    diff = moyal_star(a, b, hbar).values - moyal_star(b, a, hbar).values
    i = g.index_of(0.0)
    q = moyal_star_quadrature(A, B, hbar, 0.0, 0.0, 12.0, 241) - moyal_star_quadrature(B, A, hbar, 0.0, 0.0, 12.0, 241)
    assert diff[i, i] == pytest.approx(q, abs=1e-9)
    assert q.imag < 0


def test_ground_state_star_eigen():
    # evaluated on a wider grid so the derivative taper stays outside [-4, 4]^2
    g = Grid1D(-8, 8, 321)
    W0 = ho_exact_wigner(0, PhysParams(), g, g)
    hw = moyal_star(PolySymbol.harmonic(), W0, 1.0).values
    core = np.abs(g.points) <= 4 + 1e-12
    diff = (hw - 0.5 * W0.values)[np.ix_(core, core)]
    assert np.max(np.abs(diff)) <= 1e-8


def test_associativity_closed_form():
    x, p = PolySymbol.x(), PolySymbol.p()
    for hbar in (1.0, 0.7):
        left = moyal_star(moyal_star(x, x, hbar), p, hbar)
        right = moyal_star(x, moyal_star(x, p, hbar), hbar)
        g = Grid1D(-2, 2, 9)
        assert np.max(np.abs(left.on_grid(g, g) - right.on_grid(g, g))) < 1e-12


def test_associativity_mixed_degrees():
    H = PolySymbol.hamiltonian([0.1, -0.4, 0.5, 0.2], mass=1.3)
    x, p = PolySymbol.x(), PolySymbol.p()
    a = moyal_star(moyal_star(H, p * p, 0.8), x * p, 0.8)
    b = moyal_star(H, moyal_star(p * p, x * p, 0.8), 0.8)
    g = Grid1D(-2, 2, 9)
    assert np.max(np.abs(a.on_grid(g, g) - b.on_grid(g, g))) < 1e-11


def test_hermiticity_sampled():
    g = Grid1D(-9, 9, 91)
    a, b = sampled(gauss2(0.5, -0.3), g), sampled(gauss2(-0.4, 0.6, 1.3, 0.8), g)
    ab, ba = moyal_star(a, b, 1.0).values, moyal_star(b, a, 1.0).values
    assert np.max(np.abs(np.conj(ab) - ba)) <= 1e-10
    br = moyal_bracket(a, b, 1.0).values
    assert np.max(np.abs(br.imag)) <= 1e-10


def test_sampled_pair_sum_matches_kernel():
    g = Grid1D(-9, 9, 91)
    fa, fb = gauss2(0.5, -0.3), gauss2(-0.4, 0.6, 1.3, 0.8)
    ab = moyal_star(sampled(fa, g), sampled(fb, g), 1.0).values
    for (x, p) in ((0.0, 0.0), (0.4, 0.2), (-1.0, 0.6)):
        q = moyal_star_quadrature(fa, fb, 1.0, x, p, 9.0, 181)
        assert ab[g.index_of(x), g.index_of(p)] == pytest.approx(q, abs=1e-6)


def test_pair_sum_guard():
    g = Grid1D(-9, 9, 101)
    a = sampled(gauss2(0, 0), g)
    with pytest.raises(CapabilityError):
        moyal_star(a, a, 1.0)
    with pytest.raises(CapabilityError):
        moyal_star(1.0, a, 1.0)


def test_bracket_self_vanishes():
    g = Grid1D(-7, 7, 95)
    W2 = ho_exact_wigner(2, PhysParams(), g, g)
    assert np.max(np.abs(moyal_bracket(W2, W2, 1.0).values)) <= 1e-12


@pytest.mark.parametrize("n", [0, 2, 8])
def test_exact_wigner_bracket_and_eigen(n):
    g = Grid1D(-10, 10, 257)
    W = ho_exact_wigner(n, PhysParams(), g, g)
    H = PolySymbol.harmonic()
    assert np.max(np.abs(moyal_bracket(H, W, 1.0).values)) <= 1e-7
    rep = star_eigen_residual(H, W, n + 0.5, 1.0, core=(-3, 3, -3, 3))
    assert rep.r_eigen <= 1e-6 and rep.r_bracket <= 1e-7
    wrong = star_eigen_residual(H, W, n + 1.5, 1.0, core=(-3, 3, -3, 3))
    assert wrong.r_eigen == pytest.approx(1.0, abs=1e-6)


def test_residual_rejects_cubic_in_p():
    g = Grid1D(-2, 2, 11)
    W = RealField2D(g, g, np.zeros((11, 11)))
    with pytest.raises(CapabilityError):
        star_eigen_residual(PolySymbol(np.array([[0, 0, 0, 1.0]])), W, 0.0, 1.0)


def test_wkb_residual_improves_with_order():
    pr = PhysParams()
    model = PotentialModel.harmonic(pr)
    E = quantize_energy(model, 8)
    g = Grid1D(-10, 10, 512)
    res = []
    for K in (0, 1):
        psi = assemble_wavefunction(match_coefficients(model, E, K), g)
        W = wigner_transform(psi, 1.0)
        res.append(star_eigen_residual(PolySymbol.harmonic(), W, E, 1.0, core=(-3, 3, -3, 3)).r_eigen)
    assert 0 < res[1] < res[0]


def test_closedness_ground_state():
    g = Grid1D(-8, 8, 95)
    W0 = ho_exact_wigner(0, PhysParams(), g, g)
    star, plain = closedness_check(W0, W0, 1.0)
    assert star.real == pytest.approx(1 / (2 * math.pi), abs=1e-6)
    assert plain.real == pytest.approx(1 / (2 * math.pi), abs=1e-6)


def test_closedness_unit_factor():
    g = Grid1D(-8, 8, 161)
    B = sampled(gauss2(0.3, -0.2), g)
    star, plain = closedness_check(PolySymbol.constant(1.0), B, 1.0)
    total = np.sum(B.values) * g.spacing ** 2
    assert star == pytest.approx(total, rel=1e-12) and plain == pytest.approx(total, rel=1e-12)


def test_closedness_shifted_gaussians():
    g = Grid1D(-9, 9, 91)
    a, b = sampled(gauss2(0.8, -0.3), g), sampled(gauss2(-0.5, 0.4, 1.2, 0.9), g)
    star, plain = closedness_check(a, b, 1.0)
    assert abs(star - plain) <= 1e-6 * abs(plain)


@settings(max_examples=15, deadline=None)
@given(c=st.lists(st.floats(-2, 2), min_size=1, max_size=4), hbar=st.floats(0.2, 2.0))
def test_hamiltonian_bracket_with_x_matches_derivative(c, hbar):
    # {H, x}_M = -dH/dp up to the bracket orientation: for quadratic H it is exactly -(+/-) p / M
    H = PolySymbol.hamiltonian(c, mass=1.0)
    br = moyal_bracket(H, PolySymbol.x(), hbar)
    g = Grid1D(-2, 2, 5)
    X, P = np.meshgrid(g.points, g.points, indexing="ij")
    assert np.allclose(br.on_grid(g, g), P, atol=1e-12)
