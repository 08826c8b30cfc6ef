"""Grids, sampled fields, transforms and special functions shared by every module."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.signal import fftconvolve


class GridError(ValueError):
    """Raised when grids are malformed or incompatible."""


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise GridError(f"grid needs at least 2 nodes, got n={self.n}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_min >= self.x_max:
            raise GridError(f"invalid grid bounds [{self.x_min}, {self.x_max}]")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @classmethod
    def centered(cls, half_width: float, n: int) -> "Grid1D":
        return cls(-half_width, half_width, n)

    @classmethod
    def from_spacing(cls, x_min: float, spacing: float, n: int) -> "Grid1D":
        return cls(x_min, x_min + spacing * (n - 1), n)

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        return abs(self.x_min + self.x_max) <= rtol * max(abs(self.x_min), abs(self.x_max))

    def index_of(self, x: float, tol: float = 1e-9):
        """Index of the node at ``x`` or None if ``x`` is not a node."""
        j = (x - self.x_min) / self.spacing
        i = int(round(j))
        if 0 <= i < self.n and abs(j - i) <= tol:
            return i
        return None


@dataclass
class ComplexField1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise GridError(f"expected {self.grid.n} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing))

    def normalized(self) -> "ComplexField1D":
        return ComplexField1D(self.grid, self.values / self.norm())

    def inner(self, other: "ComplexField1D") -> complex:
        """<self|other> by the rectangle rule."""
        check_same_grid(self.grid, other.grid)
        return complex(np.sum(np.conj(self.values) * other.values) * self.grid.spacing)


@dataclass
class RealField2D:
    x_grid: Grid1D
    p_grid: Grid1D
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = (self.x_grid.n, self.p_grid.n)
        if self.values.shape != shape:
            # row-major flat payloads are accepted as well
            if self.values.size == shape[0] * shape[1]:
                self.values = self.values.reshape(shape)
            else:
                raise GridError(f"expected values of shape {shape}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def cell(self) -> float:
        return self.x_grid.spacing * self.p_grid.spacing

    def total(self) -> float:
        return float(self.values.sum() * self.cell)

    def __add__(self, other: "RealField2D") -> "RealField2D":
        check_same_grid(self.x_grid, other.x_grid)
        check_same_grid(self.p_grid, other.p_grid)
        return RealField2D(self.x_grid, self.p_grid, self.values + other.values)

    def __sub__(self, other: "RealField2D") -> "RealField2D":
        check_same_grid(self.x_grid, other.x_grid)
        check_same_grid(self.p_grid, other.p_grid)
        return RealField2D(self.x_grid, self.p_grid, self.values - other.values)


def check_same_grid(a: Grid1D, b: Grid1D) -> None:
    if a.n != b.n or not np.isclose(a.x_min, b.x_min, rtol=0, atol=1e-12 * max(1.0, abs(a.x_min))) \
            or not np.isclose(a.x_max, b.x_max, rtol=0, atol=1e-12 * max(1.0, abs(a.x_max))):
        raise GridError(f"incompatible grids {a} and {b}")


# ---------------------------------------------------------------------------
# special functions

def airy_phi(y):
    """Airy function in the normalisation Phi(y) = (1/sqrt(pi)) int_0^inf cos(u^3/3 + u y) du.

    This is sqrt(pi) * Ai(y).
    """
    y_arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y_arr)):
        raise ValueError("airy_phi requires finite arguments")
    out = math.sqrt(math.pi) * special.airy(y_arr)[0]
    return float(out) if np.ndim(y) == 0 else out


def airy_phi_prime(y):
    y_arr = np.asarray(y, dtype=float)
    out = math.sqrt(math.pi) * special.airy(y_arr)[1]
    return float(out) if np.ndim(y) == 0 else out


LAGUERRE_MAX_ORDER = 64


class UnsupportedOrderError(ValueError):
    pass


def laguerre(n: int, y):
    """L_n(y) by the three-term recurrence."""
    if n < 0 or n > LAGUERRE_MAX_ORDER:
        raise UnsupportedOrderError(f"Laguerre order {n} outside [0, {LAGUERRE_MAX_ORDER}]")
    y = np.asarray(y, dtype=float)
    l_prev = np.ones_like(y)
    if n == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    l_cur = 1.0 - y
    for m in range(1, n):
        l_prev, l_cur = l_cur, ((2 * m + 1 - y) * l_cur - m * l_prev) / (m + 1)
    return l_cur if l_cur.ndim else float(l_cur)


# ---------------------------------------------------------------------------
# transforms

def conjugate_grid(grid: Grid1D) -> Grid1D:
    """Frequency grid t_j = 2 pi j / (n dz), j = -n//2 .. n - 1 - n//2."""
    dt = 2 * math.pi / (grid.n * grid.spacing)
    return Grid1D.from_spacing(-(grid.n // 2) * dt, dt, grid.n)


def inverse_fourier_grid(f: ComplexField1D, sign: int = -1) -> ComplexField1D:
    """Samples of (1/sqrt(2 pi)) int f(z) exp(sign * i z t) dz on the conjugate grid.

    ``sign=-1`` is the inverse transform used by the distribution code; ``sign=+1``
    undoes it. The input must have decayed inside its window.
    """
    grid = f.grid
    t_grid = conjugate_grid(grid)
    t = t_grid.points
    dz = grid.spacing
    n = grid.n
    j = np.arange(-(n // 2), n - n // 2)
    if sign < 0:
        spec = np.fft.fft(f.values)
    else:
        spec = np.fft.ifft(f.values) * n
    spec = spec[j % n]
    # grid origin x_min is not zero: restore exp(sign i z_min t)
    out = spec * np.exp(sign * 1j * grid.x_min * t) * dz / math.sqrt(2 * math.pi)
    return ComplexField1D(t_grid, out)


def spectral_derivative(values: np.ndarray, spacing: float, order: int = 1, axis: int = -1) -> np.ndarray:
    """Derivative of periodic samples by FFT; caller tapers non-periodic data."""
    values = np.asarray(values)
    n = values.shape[axis]
    k = 2 * math.pi * np.fft.fftfreq(n, d=spacing)
    factor = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        factor[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(values, axis=axis) * factor.reshape(shape), axis=axis)
    if np.isrealobj(values):
        return out.real
    return out


def cosine_taper(n: int, fraction: float = 0.1) -> np.ndarray:
    """Window equal to 1 in the interior and rolling to 0 over ``fraction`` of each end."""
    w = np.ones(n)
    m = int(round(fraction * n))
    if m > 0:
        ramp = 0.5 * (1 - np.cos(np.pi * np.arange(m) / m))
        w[:m] = ramp
        w[n - m:] = ramp[::-1]
    return w


def refine_midpoints(values: np.ndarray, method: str = "spectral") -> np.ndarray:
    """Samples on the grid with the midpoints inserted (2n - 1 nodes)."""
    values = np.asarray(values, dtype=complex)
    n = values.size
    if method == "spectral":
        k = np.fft.fftfreq(n) * 2 * math.pi
        shift = np.exp(1j * k * 0.5)
        if n % 2 == 0:
            shift[n // 2] = math.cos(math.pi / 2)
        mid = np.fft.ifft(np.fft.fft(values) * shift)[:-1]
    elif method == "cubic":
        from scipy.interpolate import CubicSpline
        idx = np.arange(n)
        mid = CubicSpline(idx, values)(idx[:-1] + 0.5)
    else:
        raise ValueError(f"unknown refinement method {method!r}")
    out = np.empty(2 * n - 1, dtype=complex)
    out[0::2] = values
    out[1::2] = mid
    return out


# ---------------------------------------------------------------------------
# convolution

def edge_tail_mass(values: np.ndarray, axis: int, fraction: float = 0.05) -> float:
    """Fraction of sum |values| lying within ``fraction`` of the window edges along ``axis``."""
    a = np.abs(np.asarray(values))
    total = a.sum()
    if total == 0:
        return 0.0
    n = a.shape[axis]
    m = max(1, int(math.ceil(fraction * n)))
    edge = np.take(a, np.r_[0:m, n - m:n], axis=axis).sum()
    return float(edge / total)


def convolve_along_axis(A: RealField2D, B: RealField2D, axis: str = "p") -> RealField2D:
    """C(x, p) = int A(x, p') B(x, p - p') dp' (or the x-axis analogue).

    Values beyond the window are taken as zero. The convolved grid must be
    symmetric about 0 with an odd node count so that differences of nodes are nodes.
    """
    check_same_grid(A.x_grid, B.x_grid)
    check_same_grid(A.p_grid, B.p_grid)
    if axis not in ("x", "p"):
        raise ValueError("axis must be 'x' or 'p'")
    ax = 1 if axis == "p" else 0
    grid = A.p_grid if axis == "p" else A.x_grid
    if not grid.is_symmetric() or grid.n % 2 == 0:
        raise GridError("convolution axis must be symmetric about 0 with an odd node count")
    out = fftconvolve(A.values, B.values, mode="same", axes=ax) * grid.spacing
    meta = {
        "convolved_axis": axis,
        "tail_mass_a": edge_tail_mass(A.values, ax),
        "tail_mass_b": edge_tail_mass(B.values, ax),
    }
    return RealField2D(A.x_grid, A.p_grid, out, meta)
