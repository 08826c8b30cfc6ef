"""Tempered distributions built from a few atom kinds.

An atom is ``weight * exp(i freq t) * base((t - center) / scale)`` with ``base`` one of

    delta    Dirac delta at ``center`` (scale is always 1)
    one      the constant 1
    tanh     tanh(tau)
    pv_csch  principal value of 1 / sinh(tau)
    sech2    1 / cosh(tau)^2
    xcsch    tau / sinh(tau)
    smooth   a vectorised callable ``func``
    sampled  samples on a uniform grid (cubic interpolation)

The inverse transform is (1/sqrt(2 pi)) int f(z) exp(-i z t) dz throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .numerics import ComplexField1D, Grid1D, RealField2D, inverse_fourier_grid

SQRT2PI = math.sqrt(2 * math.pi)

# base -> (transformed base, coefficient, inner scale):  F~[base](q) = coef * base'(q / inner)
_TRANSFORM_RULES = {
    "delta": ("one", 1 / SQRT2PI, 1.0),
    "one": ("delta", SQRT2PI, 1.0),
    "tanh": ("pv_csch", -1j * math.sqrt(math.pi / 2), 2 / math.pi),
    "pv_csch": ("tanh", -1j * math.sqrt(math.pi / 2), 2 / math.pi),
    "sech2": ("xcsch", math.sqrt(2 / math.pi), 2 / math.pi),
    "xcsch": ("sech2", (math.pi ** 2 / 2) / SQRT2PI, 2 / math.pi),
}
_PARITY = {"delta": 1, "one": 1, "tanh": -1, "pv_csch": -1, "sech2": 1, "xcsch": 1}
_CSCH_TAIL = math.log(2e14)  # |csch(tau)| < 1e-14 beyond this


class UnsupportedAtomError(ValueError):
    pass


class UnsupportedConvolutionError(ValueError):
    pass


def _xcsch(tau):
    tau = np.asarray(tau, dtype=float)
    small = np.abs(tau) < 1e-8
    safe = np.where(small, 1.0, tau)
    out = np.where(small, 1.0 - tau ** 2 / 6, safe / np.sinh(np.clip(safe, -700, 700)))
    return out


def _csch(tau):
    tau = np.asarray(tau, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1.0 / np.sinh(np.clip(tau, -700, 700))
    return np.where(tau == 0, np.nan, out)


_BASES = {
    "one": lambda t: np.ones_like(np.asarray(t, dtype=float)),
    "tanh": np.tanh,
    "pv_csch": _csch,
    "sech2": lambda t: 1.0 / np.cosh(np.clip(t, -350, 350)) ** 2,
    "xcsch": _xcsch,
}


@dataclass(frozen=True)
class DistAtom:
    kind: str
    weight: complex
    center: float = 0.0
    scale: float = 1.0
    freq: float = 0.0
    func: Optional[Callable] = None
    samples: Optional[ComplexField1D] = None

    def __post_init__(self):
        if self.kind not in _PARITY and self.kind not in ("smooth", "sampled"):
            raise UnsupportedAtomError(f"unknown atom kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("atom scale must be positive")
        if self.kind == "smooth" and self.func is None:
            raise ValueError("smooth atoms need a callable")
        if self.kind == "sampled" and self.samples is None:
            raise ValueError("sampled atoms need samples")
        if not np.isfinite(complex(self.weight)):
            raise ValueError("atom weight must be finite")

    @property
    def is_delta(self) -> bool:
        return self.kind == "delta"

    def base(self, tau):
        if self.kind == "smooth":
            return self.func(tau)
        if self.kind == "sampled":
            g = self.samples.grid
            tau = np.asarray(tau, dtype=float)
            re = CubicSpline(g.points, self.samples.values.real)(tau)
            im = CubicSpline(g.points, self.samples.values.imag)(tau)
            inside = (tau >= g.x_min) & (tau <= g.x_max)
            return np.where(inside, re + 1j * im, 0.0)
        return _BASES[self.kind](tau)

    def __call__(self, t):
        """Pointwise value (deltas give 0, pv atoms nan at their centre)."""
        t = np.asarray(t, dtype=float)
        if self.is_delta:
            return np.zeros_like(t, dtype=complex)
        return self.weight * np.exp(1j * self.freq * t) * self.base((t - self.center) / self.scale)

    def delta_weight(self) -> complex:
        return self.weight * np.exp(1j * self.freq * self.center)


@dataclass(frozen=True)
class DistExpr:
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def __add__(self, other: "DistExpr") -> "DistExpr":
        return DistExpr(self.atoms + other.atoms)

    def scaled(self, c: complex) -> "DistExpr":
        return DistExpr(tuple(replace(a, weight=a.weight * c) for a in self.atoms))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t, dtype=complex)
        for a in self.atoms:
            out = out + a(t)
        return out

    def deltas(self) -> list:
        """(location, weight) pairs of the delta atoms, merged per location."""
        merged: dict = {}
        for a in self.atoms:
            if a.is_delta:
                key = round(a.center, 12)
                merged[key] = merged.get(key, 0) + a.delta_weight()
        return sorted(merged.items())

    def normalized(self) -> "DistExpr":
        """Merge delta atoms sitting at the same location."""
        rest = tuple(a for a in self.atoms if not a.is_delta)
        deltas = tuple(DistAtom("delta", w, center=c) for c, w in self.deltas() if w != 0)
        return DistExpr(deltas + rest)

    def pair(self, phi: Callable, support: tuple) -> complex:
        """<expr, phi> for a test function negligible outside ``support``."""
        return sum((pair_atom(a, phi, support) for a in self.atoms), 0j)


# ---------------------------------------------------------------------------
# elementary operations on atoms

def substitute(atom: DistAtom, alpha: float, beta: float = 0.0) -> DistAtom:
    """The atom composed with t -> alpha * u + beta, as an atom in u."""
    if alpha == 0:
        raise ValueError("alpha must be non-zero")
    w = atom.weight * np.exp(1j * atom.freq * beta)
    freq = atom.freq * alpha
    center = (atom.center - beta) / alpha
    if atom.is_delta:
        return DistAtom("delta", atom.delta_weight() / abs(alpha), center=center)
    scale = atom.scale / abs(alpha)
    if atom.kind in ("smooth", "sampled"):
        if alpha > 0:
            return replace(atom, weight=w, freq=freq, center=center, scale=scale)
        f = atom.base
        return DistAtom("smooth", w, center=center, scale=scale, freq=freq, func=lambda tau, f=f: f(-tau))
    if alpha < 0:
        w = w * _PARITY[atom.kind]
    return replace(atom, weight=w, freq=freq, center=center, scale=scale)


def shift(atom: DistAtom, c: float) -> DistAtom:
    """u -> atom(u - c)."""
    return substitute(atom, 1.0, -c)


def modulate(atom: DistAtom, nu: float) -> DistAtom:
    """Multiply by exp(i nu t)."""
    if atom.is_delta:
        return replace(atom, weight=atom.weight * np.exp(1j * nu * atom.center))
    return replace(atom, freq=atom.freq + nu)


def conjugate(atom: DistAtom) -> DistAtom:
    w = np.conj(atom.weight)
    if atom.is_delta:
        return DistAtom("delta", np.conj(atom.delta_weight()), center=atom.center)
    if atom.kind == "smooth":
        f = atom.func
        return replace(atom, weight=w, freq=-atom.freq, func=lambda tau, f=f: np.conj(f(tau)))
    if atom.kind == "sampled":
        return replace(atom, weight=w, freq=-atom.freq,
                       samples=ComplexField1D(atom.samples.grid, np.conj(atom.samples.values)))
    return replace(atom, weight=w, freq=-atom.freq)


def derivative(atom: DistAtom) -> DistExpr:
    """d/dt of a tanh or constant atom."""
    out = []
    if atom.kind not in ("tanh", "one"):
        raise UnsupportedAtomError(f"no derivative rule for {atom.kind!r}")
    if atom.freq != 0:
        out.append(replace(atom, weight=atom.weight * 1j * atom.freq))
    if atom.kind == "tanh":
        out.append(replace(atom, kind="sech2", weight=atom.weight / atom.scale))
    return DistExpr(tuple(out))


def _transform_atom(atom: DistAtom) -> DistAtom:
    """Inverse Fourier transform of one atom."""
    if atom.kind == "sampled":
        g = atom.samples.grid
        vals = atom(g.points)
        return DistAtom("sampled", 1.0, samples=inverse_fourier_grid(ComplexField1D(g, vals)))
    if atom.kind not in _TRANSFORM_RULES:
        raise UnsupportedAtomError(f"no transform rule for {atom.kind!r}")
    if atom.is_delta:
        # F~[w delta(z - c)](t) = w exp(-i c t) / sqrt(2 pi)
        return DistAtom("one", atom.delta_weight() / SQRT2PI, freq=-atom.center)
    new_kind, coef, inner = _TRANSFORM_RULES[atom.kind]
    s, nu, c = atom.scale, atom.freq, atom.center
    w = atom.weight * s * np.exp(1j * nu * c) * coef
    if new_kind == "delta":
        return DistAtom("delta", w * inner / s * np.exp(-1j * c * nu), center=nu)
    return DistAtom(new_kind, w, center=nu, scale=inner / s, freq=-c)


def dist_fourier(expr: DistExpr, direction: str = "inverse") -> DistExpr:
    """Atom-wise transform. ``inverse`` uses exp(-izt), ``forward`` exp(+izt)."""
    if direction == "inverse":
        return DistExpr(tuple(_transform_atom(a) for a in expr.atoms))
    if direction == "forward":
        return DistExpr(tuple(substitute(_transform_atom(a), -1.0) for a in expr.atoms))
    raise ValueError("direction must be 'inverse' or 'forward'")


# ---------------------------------------------------------------------------
# pairing with test functions

def _pv_integrand_sum(atom, phi, tau):
    c, s, nu = atom.center, atom.scale, atom.freq
    plus = np.exp(1j * nu * (c + tau)) * phi(c + tau)
    minus = np.exp(1j * nu * (c - tau)) * phi(c - tau)
    return _csch(tau / s) * (plus - minus)


def _quad_complex(f, lo, hi, points=None):
    kw = dict(limit=400, epsabs=1e-13, epsrel=1e-11)
    if points is not None:
        pts = [p for p in points if lo < p < hi]
        if pts:
            kw["points"] = pts
    re = integrate.quad(lambda t: float(np.real(f(t))), lo, hi, **kw)[0]
    im = integrate.quad(lambda t: float(np.imag(f(t))), lo, hi, **kw)[0]
    return re + 1j * im


def pair_atom(atom: DistAtom, phi: Callable, support: tuple) -> complex:
    lo, hi = support
    if atom.is_delta:
        c = atom.center
        return complex(atom.delta_weight() * phi(c)) if lo <= c <= hi else 0j
    if atom.kind == "pv_csch":
        # fold the symmetric excision: pv int = int_0^inf csch(tau/s)[g(c+tau) - g(c-tau)] dtau
        reach = max(hi - atom.center, atom.center - lo, 0.0)
        top = min(reach, _CSCH_TAIL * atom.scale)
        if top <= 0:
            return 0j
        return atom.weight * _quad_complex(lambda tau: _pv_integrand_sum(atom, phi, tau), 0.0, top)
    return _quad_complex(lambda t: atom(t) * phi(t), lo, hi, points=[atom.center])


# ---------------------------------------------------------------------------
# convolution

def sin_csch(v, delta: float, s: float):
    """sin(delta v) / sinh(v / s) with its limit delta * s at v = 0."""
    v = np.asarray(v, dtype=float)
    small = np.abs(v) < 1e-10
    safe = np.where(small, 1.0, v)
    val = np.sin(delta * safe) / np.sinh(np.clip(safe / s, -700, 700))
    return np.where(small, delta * s, val)


def sin_sinh_convolution(u, delta: float, s: float, method: str = "trapezoid"):
    """S(u) = int sin(delta v)/sinh(v/s) * sin(delta (u - v))/sinh((u - v)/s) dv.

    The integrand is analytic in the strip |Im v| < pi s and decays
    exponentially, so the uniform trapezoid rule converges geometrically.
    ``method="quad"`` runs adaptive quadrature point by point instead.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    tail = _CSCH_TAIL * s
    if method == "quad":
        out = np.empty(u_arr.shape)
        for i, ui in enumerate(u_arr.flat):
            f = lambda v: float(sin_csch(v, delta, s) * sin_csch(ui - v, delta, s))
            lo, hi = min(0.0, ui) - tail, max(0.0, ui) + tail
            out.flat[i] = integrate.quad(f, lo, hi, points=sorted({0.0, ui}), limit=400,
                                         epsabs=1e-14, epsrel=1e-11)[0]
    else:
        h = min(s / 6, math.pi / (6 * abs(delta) + 1e-300))
        flat = u_arr.ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, 256):
            chunk = flat[start:start + 256]
            lo = min(0.0, chunk.min()) - tail
            hi = max(0.0, chunk.max()) + tail
            n = int(math.ceil((hi - lo) / h)) + 1
            v = np.linspace(lo, hi, n)
            dv = v[1] - v[0]
            left = sin_csch(v, delta, s)
            right = sin_csch(chunk[:, None] - v[None, :], delta, s)
            out[start:start + chunk.size] = (right @ left) * dv
        out = out.reshape(u_arr.shape)
    return out if np.ndim(u) else float(out[0])


def _pv_pv(a1: DistAtom, a2: DistAtom) -> tuple:
    if not math.isclose(a1.scale, a2.scale, rel_tol=1e-12):
        raise UnsupportedConvolutionError("pv * pv only for equal widths")
    s = a1.scale
    nu1, nu2 = a1.freq, a2.freq
    C = a1.center + a2.center
    P = a1.weight * a2.weight * np.exp(1j * (nu1 * a1.center + nu2 * a2.center))
    nubar, dlt = 0.5 * (nu1 + nu2), 0.5 * (nu1 - nu2)
    atoms = [
        DistAtom("delta", P * (-(math.pi * s) ** 2), center=C),
        DistAtom("xcsch", P * s * np.exp(-1j * nu1 * C), center=C, scale=s, freq=nu1),
        DistAtom("xcsch", P * s * np.exp(-1j * nu2 * C), center=C, scale=s, freq=nu2),
    ]
    if dlt != 0:
        atoms.append(DistAtom("smooth", 2 * P * np.exp(-1j * nubar * C), center=C, freq=nubar,
                              func=lambda u, d=dlt, s=s: sin_sinh_convolution(u, d, s)))
    return tuple(atoms)


def _sampled_sampled(a1: DistAtom, a2: DistAtom) -> tuple:
    g = a1.samples.grid
    if g != a2.samples.grid or g.n % 2 == 0 or not g.is_symmetric():
        raise UnsupportedConvolutionError("sampled convolution needs one symmetric odd grid")
    v1, v2 = a1(g.points), a2(g.points)
    out = np.convolve(v1, v2, mode="same") * g.spacing
    return (DistAtom("sampled", 1.0, samples=ComplexField1D(g, out)),)


def convolve_atoms(a1: DistAtom, a2: DistAtom) -> tuple:
    if a1.is_delta:
        return (replace(shift(a2, a1.center), weight=shift(a2, a1.center).weight * a1.delta_weight()),) \
            if not a2.is_delta else (DistAtom("delta", a1.delta_weight() * a2.delta_weight(),
                                              center=a1.center + a2.center),)
    if a2.is_delta:
        return convolve_atoms(a2, a1)
    if a1.kind == "pv_csch" and a2.kind == "pv_csch":
        return _pv_pv(a1, a2)
    if a1.kind == "sampled" and a2.kind == "sampled":
        return _sampled_sampled(a1, a2)
    raise UnsupportedConvolutionError(f"no convolution channel for {a1.kind} * {a2.kind}")


def dist_convolve(e1: DistExpr, e2: DistExpr) -> DistExpr:
    atoms = []
    for a in e1.atoms:
        for b in e2.atoms:
            atoms.extend(convolve_atoms(a, b))
    return DistExpr(tuple(atoms)).normalized()


# ---------------------------------------------------------------------------
# Wigner functions of distributional states

def dist_wigner(psi: DistExpr, hbar: float, x: float) -> DistExpr:
    """W(x, .) as a distribution in p for a position-space state ``psi``.

    W(x, p) = (1/pi hbar) (conj(h) * h)(-2p/hbar),  h(t) = exp(itx) F~[psi](t).
    """
    h = DistExpr(tuple(modulate(a, x) for a in dist_fourier(psi, "inverse").atoms))
    hc = DistExpr(tuple(conjugate(a) for a in h.atoms))
    conv = dist_convolve(hc, h)
    atoms = tuple(substitute(a, -2.0 / hbar) for a in conv.atoms)
    return DistExpr(atoms).scaled(1.0 / (math.pi * hbar)).normalized()


@dataclass
class PTWigner:
    delta_coefficient: float
    delta_location: float
    smooth: RealField2D
    pv: RealField2D
    residual: RealField2D


def _pt_constants(params):
    A2 = abs(params.amplitude) ** 2
    k, a, hb = params.k, params.a, params.hbar
    return A2, k, a, hb


def pt_delta_coefficient(params) -> float:
    A2, k, a, _ = _pt_constants(params)
    return A2 * (k ** 2 - a ** 2) / (k ** 2 + a ** 2)


def pt_pv_term(params, x, p):
    """-(2|A|^2 k / hbar(a^2+k^2)) cos(2x(k hbar+p)/hbar) csch(pi(k hbar+p)/(a hbar)), pointwise."""
    A2, k, a, hb = _pt_constants(params)
    q = k * hb + p
    return -(2 * A2 * k / (hb * (a ** 2 + k ** 2))) * np.cos(2 * x * q / hb) * _csch(math.pi * q / (a * hb))


def pt_smooth_term(params, x, p):
    A2, k, a, hb = _pt_constants(params)
    q = k * hb + p
    # q / sinh(pi q/(a hbar)) = (a hbar / pi) xcsch(pi q / (a hbar))
    return (2 * A2 / (hb ** 2 * (a ** 2 + k ** 2))) * np.cos(2 * x * q / hb) \
        * (a * hb / math.pi) * _xcsch(math.pi * q / (a * hb))


def pt_residual_term(params, x, p):
    """(|A|^2 / hbar(a^2+k^2)) * S_x(2(k hbar + p)/hbar) with S the sin/sinh self-convolution."""
    A2, k, a, hb = _pt_constants(params)
    s = 2 * a / math.pi
    u = 2 * (k * hb + np.asarray(p, dtype=float)) / hb
    return (A2 / (hb * (a ** 2 + k ** 2))) * sin_sinh_convolution(u, x, s)


def pt_exact_wigner(params, x_samples, p_samples) -> PTWigner:
    """Terms of the exact Poeschl-Teller Wigner function on an (x, p) grid.

    The pv field is set to 0 on a node that hits the singular line p = -k hbar.
    """
    xg = x_samples if isinstance(x_samples, Grid1D) else None
    pg = p_samples if isinstance(p_samples, Grid1D) else None
    xs = xg.points if xg else np.asarray(x_samples, dtype=float)
    ps = pg.points if pg else np.asarray(p_samples, dtype=float)
    X, Pm = np.meshgrid(xs, ps, indexing="ij")
    pv = np.nan_to_num(pt_pv_term(params, X, Pm), nan=0.0)
    smooth = pt_smooth_term(params, X, Pm)
    resid = np.array([pt_residual_term(params, x, ps) for x in xs]).reshape(X.shape)
    xg = xg or Grid1D(xs[0], xs[-1], len(xs)) if len(xs) > 1 else xg
    pg = pg or Grid1D(ps[0], ps[-1], len(ps))
    meta = {"delta_coefficient": pt_delta_coefficient(params), "delta_location": -params.k * params.hbar}
    return PTWigner(
        pt_delta_coefficient(params), -params.k * params.hbar,
        RealField2D(xg, pg, smooth, dict(meta)),
        RealField2D(xg, pg, pv, dict(meta)),
        RealField2D(xg, pg, resid, dict(meta)),
    )


def pt_wigner_expr(params, x: float) -> DistExpr:
    """The closed-form Poeschl-Teller W(x, .) as atoms in p."""
    A2, k, a, hb = _pt_constants(params)
    c = -k * hb
    s_pv = a * hb / math.pi
    pref_pv = -(2 * A2 * k / (hb * (a ** 2 + k ** 2)))
    pref_sm = (2 * A2 / (hb ** 2 * (a ** 2 + k ** 2))) * s_pv
    nu = 2 * x / hb
    atoms = [DistAtom("delta", pt_delta_coefficient(params), center=c)]
    for sgn in (1, -1):
        # cos(nu (p - c)) = (e^{i nu (p-c)} + e^{-i nu (p-c)}) / 2
        ph = np.exp(-1j * sgn * nu * c) / 2
        atoms.append(DistAtom("pv_csch", pref_pv * ph, center=c, scale=s_pv, freq=sgn * nu))
        atoms.append(DistAtom("xcsch", pref_sm * ph, center=c, scale=s_pv, freq=sgn * nu))
    atoms.append(DistAtom("smooth", 1.0, func=lambda p, x=x: pt_residual_term(params, x, p)))
    return DistExpr(tuple(atoms))


def pt_wkb_phase(params, grid: Grid1D):
    """First-order WKB phase terms of the Poeschl-Teller state, base point x = 0."""
    from .wkb import PhaseSeries

    k, a, hb = params.k, params.a, params.hbar
    x = grid.points
    ch, sh = np.cosh(a * x), np.sinh(a * x)
    root = np.sqrt(k ** 2 * ch ** 2 + 2 * a ** 2)
    sigma0 = hb * (math.sqrt(2) * np.arctan(math.sqrt(2) * a * sh / root)
                   + (k / a) * np.arcsinh(k * sh / math.sqrt(2 * a ** 2 + k ** 2)))
    # ln(1/sqrt(p)) with p = hbar sqrt(k^2 cosh^2 + 2a^2) / cosh
    sigma1 = -0.5 * np.log(hb * root / ch)
    return PhaseSeries(region=(grid.x_min, grid.x_max), branch="I", x=x,
                       terms=[sigma0.astype(complex), sigma1.astype(complex)], x_ref=0.0, hbar=hb)
