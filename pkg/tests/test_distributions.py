import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wkbwigner.distributions import (DistAtom, DistExpr, UnsupportedAtomError, UnsupportedConvolutionError,
                                     conjugate, convolve_atoms, derivative, dist_convolve, dist_fourier,
                                     dist_wigner, modulate, pt_delta_coefficient, pt_exact_wigner,
                                     pt_wigner_expr, pt_wkb_phase, shift, sin_sinh_convolution, substitute)
from wkbwigner.numerics import ComplexField1D, Grid1D
from wkbwigner.potentials import PhysParams, pt_position_dist

SUPPORT = (-14.0, 14.0)


def gauss(t0, width=1.0):
    return lambda t: np.exp(-((np.asarray(t) - t0) / width) ** 2 / 2)


def gauss_inverse_transform(t0, width=1.0):
    # (1/sqrt(2 pi)) int g(t) exp(-i z t) dt for g = gauss(t0, width)
    return lambda z: width * np.exp(-(width * np.asarray(z)) ** 2 / 2 - 1j * np.asarray(z) * t0)


def quad_c(f, lo, hi):
    re = integrate.quad(lambda t: float(np.real(f(t))), lo, hi, limit=400, epsabs=1e-13)[0]
    im = integrate.quad(lambda t: float(np.imag(f(t))), lo, hi, limit=400, epsabs=1e-13)[0]
    return re + 1j * im


ATOMS = [
    DistAtom("delta", 0.7 - 0.2j, center=0.4),
    DistAtom("one", 1.3, freq=0.8),
    DistAtom("tanh", 0.9j, center=-0.3, scale=1.4, freq=0.5),
    DistAtom("pv_csch", 1.1, center=0.6, scale=0.8, freq=-0.7),
    DistAtom("sech2", 0.5 + 0.5j, center=0.2, scale=0.6, freq=1.1),
    DistAtom("xcsch", -0.8, center=-0.5, scale=1.7, freq=0.3),
]


@pytest.mark.parametrize("atom", ATOMS, ids=lambda a: a.kind)
def test_transform_rule_parseval(atom):
    # <F~[f], phi> = <f, F~[phi]> for the same exp(-izt) kernel
    t0 = 0.35
    lhs = dist_fourier(DistExpr((atom,))).pair(gauss(t0), SUPPORT)
    rhs = DistExpr((atom,)).pair(gauss_inverse_transform(t0), SUPPORT)
    assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(rhs))


@pytest.mark.parametrize("atom", [a for a in ATOMS if a.kind not in ("delta", "one")], ids=lambda a: a.kind)
def test_round_trip_pointwise(atom):
    e = DistExpr((atom,))
    back = dist_fourier(dist_fourier(e, "inverse"), "forward")
    t = np.linspace(-3, 3, 23) + 0.013
    assert np.max(np.abs(back(t) - e(t))) < 1e-13


def test_round_trip_delta_and_one():
    e = DistExpr((ATOMS[0], ATOMS[1]))
    back = dist_fourier(dist_fourier(e), "forward")
    assert back.deltas() == pytest.approx(e.deltas())
    t = np.linspace(-2, 2, 9)
    assert np.max(np.abs(back(t) - e(t))) < 1e-14


def test_unknown_kind_rejected():
    with pytest.raises(UnsupportedAtomError):
        DistAtom("gaussian", 1.0)
    with pytest.raises(UnsupportedAtomError):
        dist_fourier(DistExpr((DistAtom("smooth", 1.0, func=np.exp),)))


def test_delta_shift_and_modulation():
    d = DistAtom("delta", 2.0, center=1.0)
    assert shift(d, 0.5).center == pytest.approx(1.5)
    assert modulate(d, 3.0).delta_weight() == pytest.approx(2 * np.exp(3j))
    assert substitute(d, -2.0).delta_weight() == pytest.approx(1.0)
    assert substitute(d, -2.0).center == pytest.approx(-0.5)


@pytest.mark.parametrize("kind", ["tanh", "pv_csch", "sech2", "xcsch"])
def test_negative_substitution_parity(kind):
    a = DistAtom(kind, 0.4 + 1j, center=0.3, scale=0.9, freq=0.6)
    b = substitute(a, -1.7, 0.2)
    u = np.linspace(-2, 2, 17) + 0.011
    assert np.max(np.abs(b(u) - a(-1.7 * u + 0.2))) < 1e-13


def test_tanh_derivative_matches_finite_difference():
    a = DistAtom("tanh", 0.7 - 0.1j, center=0.2, scale=0.8, freq=1.3)
    d = derivative(a)
    t = np.linspace(-2, 2, 21)
    h = 1e-5
    fd = (a(t + h) - a(t - h)) / (2 * h)
    assert np.max(np.abs(d(t) - fd)) < 1e-8
    with pytest.raises(UnsupportedAtomError):
        derivative(DistAtom("sech2", 1.0))


def test_pv_pairing_odd_part_only():
    a = DistAtom("pv_csch", 1.0)
    assert abs(DistExpr((a,)).pair(gauss(0.0), SUPPORT)) < 1e-14
    # pv int csch(t) t exp(-t^2/2) dt is an ordinary integral
    val = DistExpr((a,)).pair(lambda t: np.asarray(t) * np.exp(-np.asarray(t) ** 2 / 2), SUPPORT)
    ref = integrate.quad(lambda t: (t / math.sinh(t) if t else 1.0) * math.exp(-t * t / 2), -20, 20)[0]
    assert val == pytest.approx(ref, rel=1e-10)


def test_pv_pv_convolution_against_fourier_product():
    a1 = DistAtom("pv_csch", 0.8, center=0.3, scale=0.7, freq=0.9)
    a2 = DistAtom("pv_csch", 1.2j, center=-0.1, scale=0.7, freq=-0.4)
    conv = DistExpr(convolve_atoms(a1, a2))
    t0 = 0.25
    lhs = conv.pair(gauss(t0), (-16, 16))
    # <f*g, phi> = int sqrt(2 pi) F~f F~g psi dz with psi the forward transform of phi
    F1, F2 = dist_fourier(DistExpr((a1,))), dist_fourier(DistExpr((a2,)))
    psi = lambda z: np.exp(-np.asarray(z) ** 2 / 2 + 1j * np.asarray(z) * t0)
    rhs = quad_c(lambda z: math.sqrt(2 * math.pi) * F1(z) * F2(z) * psi(z), -12, 12)
    assert abs(lhs - rhs) < 1e-7 * abs(rhs)


def test_pv_pv_at_zero_modulation():
    a = 0.8
    s = 2 * a / math.pi
    pv = DistAtom("pv_csch", 1.0, scale=s)
    conv = DistExpr(convolve_atoms(pv, pv))
    assert conv.deltas() == [(0.0, pytest.approx(-4 * a * a))]
    z = np.linspace(-3, 3, 13) + 0.01
    assert np.max(np.abs(conv(z) - 2 * z / np.sinh(math.pi * z / (2 * a)))) < 1e-14


def test_delta_convolution_shifts():
    f = DistAtom("sech2", 0.6, scale=0.9)
    out = DistExpr(convolve_atoms(DistAtom("delta", 1.5, center=0.7), f))
    z = np.linspace(-2, 2, 9)
    assert np.max(np.abs(out(z) - 1.5 * f(z - 0.7))) < 1e-15


def test_dist_wigner_pairings_are_real():
    pr = PhysParams(k=1.2, a=0.7, hbar=0.9, amplitude=1.0 - 0.4j)
    w = dist_wigner(pt_position_dist(pr), pr.hbar, -0.35)
    for p0 in (-2.0, -1.08, 0.5):
        val = w.pair(gauss(p0, 0.6), (p0 - 6, p0 + 6))
        assert abs(val.imag) <= 1e-10 * abs(val)


def test_pv_pv_unequal_width_rejected():
    with pytest.raises(UnsupportedConvolutionError):
        convolve_atoms(DistAtom("pv_csch", 1.0, scale=1.0), DistAtom("pv_csch", 1.0, scale=2.0))
    with pytest.raises(UnsupportedConvolutionError):
        convolve_atoms(DistAtom("tanh", 1.0), DistAtom("sech2", 1.0))


@pytest.mark.parametrize("delta,s", [(0.5, 0.6366), (2.0, 1.0), (-1.3, 0.4)])
def test_sin_sinh_trapezoid_matches_quad(delta, s):
    u = np.linspace(-6, 6, 7)
    a = sin_sinh_convolution(u, delta, s)
    b = sin_sinh_convolution(u, delta, s, method="quad")
    assert np.max(np.abs(a - b)) < 1e-10


def test_sin_sinh_even_in_u():
    u = np.linspace(0, 5, 11)
    assert np.max(np.abs(sin_sinh_convolution(u, 0.7, 0.8) - sin_sinh_convolution(-u, 0.7, 0.8))) < 1e-14


@pytest.mark.parametrize("k,hbar", [(2.0, 1.0), (-1.5, 0.4)])
def test_plane_wave_wigner_ridge(k, hbar):
    w = dist_wigner(DistExpr((DistAtom("one", 1.0, freq=k),)), hbar, 0.7)
    assert len(w.atoms) == 1
    (loc, weight), = w.deltas()
    assert loc == pytest.approx(-hbar * k)
    assert weight == pytest.approx(1.0)


def test_sampled_gaussian_wigner():
    hbar, sigma, x = 0.8, 1.1, 0.3
    g = Grid1D(-20, 20, 801)
    psi = (math.pi * sigma ** 2) ** -0.25 * np.exp(-g.points ** 2 / (2 * sigma ** 2))
    atom = DistAtom("sampled", 1.0, samples=ComplexField1D(g, psi))
    w = dist_wigner(DistExpr((atom,)), hbar, x)
    p = np.linspace(-2, 2, 41)
    exact = np.exp(-x ** 2 / sigma ** 2 - sigma ** 2 * p ** 2 / hbar ** 2) / (math.pi * hbar)
    assert np.max(np.abs(w(p) - exact)) < 1e-6


def test_conjugate_atoms():
    for a in ATOMS[1:]:
        t = np.linspace(-2, 2, 9) + 0.01
        assert np.max(np.abs(conjugate(a)(t) - np.conj(a(t)))) < 1e-15


def test_pt_delta_coefficient():
    assert pt_delta_coefficient(PhysParams(k=6.0, a=1.0)) == pytest.approx(35 / 37, rel=1e-15)
    assert pt_delta_coefficient(PhysParams(k=1.3, a=1.3)) == 0.0
    assert pt_delta_coefficient(PhysParams(k=6.0, a=1.0, amplitude=2j)) == pytest.approx(4 * 35 / 37)


def test_pt_wigner_expr_matches_fields():
    pr = PhysParams(k=1.4, a=0.9, hbar=0.7, amplitude=0.6 + 0.2j)
    xs = np.array([-0.8, 0.0, 1.1])
    ps = np.linspace(-3, 2, 26) + 0.017
    fields = pt_exact_wigner(pr, xs, ps)
    for i, x in enumerate(xs):
        e = pt_wigner_expr(pr, x)
        total = fields.smooth.values[i] + fields.pv.values[i] + fields.residual.values[i]
        assert np.max(np.abs(e(ps) - total)) < 1e-12
        assert np.max(np.abs(e(ps).imag)) < 1e-14


def test_dist_wigner_of_pt_state_matches_closed_form():
    pr = PhysParams(k=2.0, a=1.4, hbar=0.6, amplitude=0.8 + 0.3j)
    x = 0.45
    w_num = dist_wigner(pt_position_dist(pr), pr.hbar, x)
    w_cf = pt_wigner_expr(pr, x)
    assert dict(w_num.deltas())[round(-pr.k * pr.hbar, 12)] == pytest.approx(pt_delta_coefficient(pr), rel=1e-12)
    phi = gauss(-0.9, 0.7)
    assert abs(w_num.pair(phi, (-8, 6)) - w_cf.pair(phi, (-8, 6))) < 1e-9


def test_pt_wkb_phase_values():
    pr = PhysParams(k=6.0, a=1.0, hbar=0.9)
    g = Grid1D(-3, 3, 601)
    ph = pt_wkb_phase(pr, g)
    s0, s1 = ph.terms[0], ph.terms[1]
    assert abs(s0[300]) < 1e-14
    assert s1[300] == pytest.approx(-0.5 * math.log(pr.hbar * math.sqrt(38)))
    p_loc = pr.hbar * np.sqrt(pr.k ** 2 + 2 * pr.a ** 2 / np.cosh(pr.a * g.points) ** 2)
    assert np.max(np.abs(np.gradient(s0.real, g.spacing)[5:-5] - p_loc[5:-5])) < 1e-3
    assert np.max(np.abs(s1.real + 0.5 * np.log(p_loc))) < 1e-13


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(["tanh", "pv_csch", "sech2", "xcsch"]),
       w=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       c=st.floats(-2, 2), s=st.floats(0.3, 3), nu=st.floats(-2, 2))
def test_round_trip_property(kind, w, c, s, nu):
    e = DistExpr((DistAtom(kind, w, center=c, scale=s, freq=nu),))
    back = dist_fourier(dist_fourier(e), "forward")
    t = c + np.array([-1.3, -0.4, 0.6, 2.1])
    assert np.allclose(back(t), e(t), rtol=1e-12, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.2, 4) | st.floats(-4, -0.2), beta=st.floats(-2, 2))
def test_substitution_composes_pointwise(alpha, beta):
    a = DistAtom("sech2", 1 - 0.5j, center=0.4, scale=1.2, freq=0.9)
    u = np.linspace(-1, 1, 5)
    assert np.allclose(substitute(a, alpha, beta)(u), a(alpha * u + beta), atol=1e-13)


def test_dist_convolve_merges_deltas():
    e = DistExpr((DistAtom("delta", 1.0, center=1.0), DistAtom("delta", 2.0, center=-1.0)))
    c = dist_convolve(e, e)
    assert c.deltas() == pytest.approx([(-2.0, 4.0), (0.0, 4.0), (2.0, 1.0)])
