"""Moyal star product, bracket and star-eigenvalue residuals on the (x, p) plane.

The integral kernel used here,

    (A * B)(x, p) = (1/(pi hbar)^2) int A(x', p') B(x'', p'')
                    exp[(2i/hbar){(x'' - x)(p' - p) - (x' - x)(p'' - p)}] dx' dp' dx'' dp'',

is the bidirectional exponential exp(s (<-dx ->dp - <-dp ->dx)) with s = -i hbar / 2,
so x * p - p * x = -i hbar.  The differential form terminates for polynomial
symbols and is the production path; the kernel is kept for validation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.signal import convolve2d

from .numerics import Grid1D, RealField2D, cosine_taper, spectral_derivative


class CapabilityError(TypeError):
    pass


def star_parameter(hbar: float) -> complex:
    return -0.5j * hbar


@dataclass(frozen=True)
class PolySymbol:
    """sum_ij c[i, j] x^i p^j."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def x(cls):
        return cls(np.array([[0], [1]]))

    @classmethod
    def p(cls):
        return cls(np.array([[0, 1]]))

    @classmethod
    def constant(cls, c=1.0):
        return cls(np.array([[c]]))

    @classmethod
    def hamiltonian(cls, v_coeffs, mass: float = 1.0):
        """p^2/2M + sum_j v_coeffs[j] x^j."""
        v = np.asarray(v_coeffs, dtype=float)
        c = np.zeros((max(len(v), 1), 3), dtype=complex)
        c[:len(v), 0] = v
        c[0, 2] += 1 / (2 * mass)
        return cls(c)

    @classmethod
    def harmonic(cls, mass: float = 1.0, omega: float = 1.0):
        return cls.hamiltonian([0, 0, 0.5 * mass * omega ** 2], mass)

    @property
    def degree(self) -> int:
        nz = np.argwhere(self.coeffs != 0)
        return int(nz.sum(axis=1).max()) if nz.size else 0

    def derivative(self, nx: int, np_: int) -> "PolySymbol":
        c = self.coeffs
        if nx:
            c = P.polyder(c, nx, axis=0) if c.shape[0] > nx else np.zeros((1, c.shape[1]))
        if np_:
            c = P.polyder(c, np_, axis=1) if c.shape[1] > np_ else np.zeros((c.shape[0], 1))
        return PolySymbol(c)

    def __call__(self, x, p):
        return P.polyval2d(np.asarray(x, dtype=float), np.asarray(p, dtype=float), self.coeffs)

    def on_grid(self, x_grid: Grid1D, p_grid: Grid1D) -> np.ndarray:
        X, Pm = np.meshgrid(x_grid.points, p_grid.points, indexing="ij")
        return self(X, Pm)

    def __mul__(self, other):
        if isinstance(other, PolySymbol):
            return PolySymbol(convolve2d(self.coeffs, other.coeffs))
        return PolySymbol(self.coeffs * other)

    __rmul__ = __mul__

    def __add__(self, other: "PolySymbol") -> "PolySymbol":
        a, b = self.coeffs, other.coeffs
        out = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])), dtype=complex)
        out[:a.shape[0], :a.shape[1]] += a
        out[:b.shape[0], :b.shape[1]] += b
        return PolySymbol(out)

    def __sub__(self, other: "PolySymbol") -> "PolySymbol":
        return self + other * -1.0


@dataclass
class SampledSymbol:
    """Complex symbol samples on an (x, p) grid; derivatives are spectral after a cosine taper."""

    x_grid: Grid1D
    p_grid: Grid1D
    values: np.ndarray
    taper: float = 0.1
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.x_grid.n, self.p_grid.n):
            raise ValueError("values do not match the grids")

    @classmethod
    def from_field(cls, W: RealField2D, taper: float = 0.1) -> "SampledSymbol":
        return cls(W.x_grid, W.p_grid, W.values, taper)

    def derivative(self, nx: int, np_: int) -> np.ndarray:
        key = (nx, np_)
        if key not in self._cache:
            v = self.values
            if nx or np_:
                w = np.outer(cosine_taper(self.x_grid.n, self.taper), cosine_taper(self.p_grid.n, self.taper))
                v = v * w
                if nx:
                    v = spectral_derivative(v, self.x_grid.spacing, nx, axis=0)
                if np_:
                    v = spectral_derivative(v, self.p_grid.spacing, np_, axis=1)
            self._cache[key] = v
        return self._cache[key]

    def like(self, values) -> "SampledSymbol":
        return SampledSymbol(self.x_grid, self.p_grid, values, self.taper)

    def real_field(self, meta=None) -> RealField2D:
        return RealField2D(self.x_grid, self.p_grid, self.values.real, meta or {})


def _poly_terms(m: int):
    """(j, coefficient) pairs of (<-dx ->dp - <-dp ->dx)^m: left gets dx^(m-j) dp^j."""
    return [(j, comb(m, j) * (-1) ** j) for j in range(m + 1)]


def _star_poly_poly(A: PolySymbol, B: PolySymbol, s: complex) -> PolySymbol:
    out = A * B
    for m in range(1, min(A.degree, B.degree) + 1):
        for j, c in _poly_terms(m):
            term = A.derivative(m - j, j) * B.derivative(j, m - j)
            out = out + term * (c * s ** m / factorial(m))
    return out


def _star_mixed(A, B, s: complex, poly_left: bool) -> SampledSymbol:
    poly, samp = (A, B) if poly_left else (B, A)
    X, Pm = np.meshgrid(samp.x_grid.points, samp.p_grid.points, indexing="ij")
    out = poly(X, Pm) * samp.values
    for m in range(1, poly.degree + 1):
        for j, c in _poly_terms(m):
            if poly_left:
                term = poly.derivative(m - j, j)(X, Pm) * samp.derivative(j, m - j)
            else:
                term = samp.derivative(m - j, j) * poly.derivative(j, m - j)(X, Pm)
            out = out + c * s ** m / factorial(m) * term
    return samp.like(out)


MAX_PAIR_MODES = 96 * 96


def _star_sampled_sampled(A: SampledSymbol, B: SampledSymbol, s: complex) -> SampledSymbol:
    """Fourier-mode pair sum: e^{ik.z} * e^{il.z} = e^{i(k+l).z} exp(-s(k_x l_p - k_p l_x))."""
    if A.x_grid != B.x_grid or A.p_grid != B.p_grid:
        raise CapabilityError("sampled operands must share grids")
    nx, npn = A.values.shape
    if nx * npn > MAX_PAIR_MODES:
        raise CapabilityError(f"pair sum limited to {MAX_PAIR_MODES} modes")
    kx = 2 * math.pi * np.fft.fftfreq(nx, A.x_grid.spacing)
    kp = 2 * math.pi * np.fft.fftfreq(npn, A.p_grid.spacing)
    # grid origins are not 0: fold the origin offset into the coefficients
    x0, p0 = A.x_grid.x_min, A.p_grid.x_min
    shift = np.exp(-1j * (kx[:, None] * x0 + kp[None, :] * p0))
    a = np.fft.fft2(A.values) / (nx * npn) * shift
    b = np.fft.fft2(B.values) / (nx * npn) * shift
    QX, QP = np.meshgrid(kx, kp, indexing="ij")
    c = np.zeros_like(a)
    for i in range(nx):
        for j in range(npn):
            if a[i, j] == 0:
                continue
            # l = q - k, so k_x l_p - k_p l_x = k_x q_p - k_p q_x
            ph = np.exp(-s * (kx[i] * QP - kp[j] * QX))
            c += a[i, j] * np.roll(b, (i, j), axis=(0, 1)) * ph
    vals = np.fft.ifft2(c / shift) * (nx * npn)
    return A.like(vals)


def moyal_star(A, B, hbar: float):
    """A * B for polynomial and/or sampled operands."""
    s = star_parameter(hbar)
    if isinstance(A, RealField2D):
        A = SampledSymbol.from_field(A)
    if isinstance(B, RealField2D):
        B = SampledSymbol.from_field(B)
    if isinstance(A, PolySymbol) and isinstance(B, PolySymbol):
        return _star_poly_poly(A, B, s)
    if isinstance(A, PolySymbol) and isinstance(B, SampledSymbol):
        return _star_mixed(A, B, s, True)
    if isinstance(A, SampledSymbol) and isinstance(B, PolySymbol):
        return _star_mixed(A, B, s, False)
    if isinstance(A, SampledSymbol) and isinstance(B, SampledSymbol):
        return _star_sampled_sampled(A, B, s)
    raise CapabilityError(f"unsupported operands {type(A).__name__}, {type(B).__name__}")


def moyal_bracket(A, B, hbar: float):
    """(A * B - B * A) / (i hbar)."""
    ab, ba = moyal_star(A, B, hbar), moyal_star(B, A, hbar)
    if isinstance(ab, PolySymbol):
        return (ab - ba) * (1 / (1j * hbar))
    return ab.like((ab.values - ba.values) / (1j * hbar))


def moyal_star_quadrature(A, B, hbar: float, x, p, half_width: float = 8.0, n: int = 161) -> complex:
    """The four-fold kernel integral at one point (x, p) on a uniform [-L, L]^4 lattice.

    ``A`` and ``B`` are vectorised callables of (x, p) that decay inside the box.
    """
    u = np.linspace(-half_width, half_width, n)
    du = u[1] - u[0]
    Xg, Pg = np.meshgrid(u, u, indexing="ij")
    a = A(Xg, Pg)   # a[x', p']
    b = B(Xg, Pg)   # b[x'', p'']
    m1 = np.exp(2j / hbar * np.outer(u - x, u - p))    # [x'', p']
    m2 = np.exp(-2j / hbar * np.outer(u - x, u - p))   # [x', p'']
    inner = a @ (m1.T @ b)                             # [x', p'']
    return complex(np.sum(m2 * inner) * du ** 4 / (math.pi * hbar) ** 2)


@dataclass
class ResidualReport:
    r_eigen: float
    r_bracket: float


def _core_mask(grid: Grid1D, lo: float, hi: float) -> np.ndarray:
    x = grid.points
    return (x >= lo - 1e-12) & (x <= hi + 1e-12)


def star_eigen_residual(H: PolySymbol, W: RealField2D, E: float, hbar: float,
                        core: Optional[tuple] = None, frequency: float = 1.0) -> ResidualReport:
    """r_eigen = max|H * W - E W| / max|W| and r_bracket = max|{H, W}| / (max|W| frequency) on ``core``.

    ``core`` = (x_lo, x_hi, p_lo, p_hi); the default is the whole grid.
    """
    if H.degree > 2 or H.coeffs.shape[1] > 3:
        raise CapabilityError("the Hamiltonian must be at most quadratic in p")
    Ws = SampledSymbol.from_field(W)
    hw = moyal_star(H, Ws, hbar).values
    wh = moyal_star(Ws, H, hbar).values
    if core is None:
        mx = np.ones(W.x_grid.n, bool)
        mp = np.ones(W.p_grid.n, bool)
    else:
        mx = _core_mask(W.x_grid, core[0], core[1])
        mp = _core_mask(W.p_grid, core[2], core[3])
    sel = np.ix_(mx, mp)
    wmax = np.max(np.abs(W.values[sel]))
    r_e = np.max(np.abs(hw - E * W.values)[sel]) / wmax
    r_b = np.max(np.abs((hw - wh) / (1j * hbar))[sel]) / (wmax * frequency)
    return ResidualReport(float(r_e), float(r_b))


def closedness_check(A, B, hbar: float) -> tuple:
    """(int int A * B, int int A B) on the operands' grid."""
    star = moyal_star(A, B, hbar)
    samp = A if isinstance(A, (SampledSymbol, RealField2D)) else B
    if isinstance(samp, RealField2D):
        samp = SampledSymbol.from_field(samp)
    cell = samp.x_grid.spacing * samp.p_grid.spacing
    X, Pm = np.meshgrid(samp.x_grid.points, samp.p_grid.points, indexing="ij")

    def vals(S):
        if isinstance(S, PolySymbol):
            return S(X, Pm)
        if isinstance(S, RealField2D):
            return S.values
        return S.values
    prod = vals(A) * vals(B)
    return complex(np.sum(star.values) * cell), complex(np.sum(prod) * cell)
