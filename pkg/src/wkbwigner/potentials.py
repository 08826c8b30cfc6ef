"""Potential models, turning points and closed-form reference solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .numerics import ComplexField1D, Grid1D, RealField2D, laguerre


@dataclass(frozen=True)
class PhysParams:
    """Physical constants. ``omega`` is used by the oscillator, ``a``, ``k`` and
    ``amplitude`` by the Poeschl-Teller model."""

    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    a: float = 1.0
    k: float = 1.0
    amplitude: complex = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "omega", "a", "k"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def pt_energy(self) -> float:
        # E = hbar^2 k^2 / 2M (k stored directly)
        return self.hbar ** 2 * self.k ** 2 / (2 * self.mass)

    def ho_energy(self, n: int) -> float:
        return self.hbar * self.omega * (n + 0.5)

    def ho_turning_point(self, n: int) -> float:
        return math.sqrt((2 * n + 1) * self.hbar / (self.mass * self.omega))


class OutOfWindowError(ValueError):
    pass


class DegenerateTurningPointError(ValueError):
    pass


KINDS = ("harmonic", "poeschl_teller", "linear", "polynomial", "user_sampled")


@dataclass(frozen=True)
class PotentialModel:
    """V(x) for one of a few closed forms or linearly interpolated samples.

    Build instances through the classmethods.
    """

    kind: str
    params: PhysParams = field(default_factory=PhysParams)
    v0: float = 0.0
    force: float = 0.0
    x1: float = 0.0
    coeffs: tuple = ()
    samples: Optional[ComplexField1D] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def harmonic(cls, params: PhysParams = PhysParams()) -> "PotentialModel":
        return cls("harmonic", params)

    @classmethod
    def poeschl_teller(cls, params: PhysParams = PhysParams()) -> "PotentialModel":
        return cls("poeschl_teller", params)

    @classmethod
    def linear(cls, v0: float, force: float, x1: float = 0.0, params: PhysParams = PhysParams()):
        """V(x) = v0 - force * (x - x1)."""
        return cls("linear", params, v0=v0, force=force, x1=x1)

    @classmethod
    def polynomial(cls, coeffs, params: PhysParams = PhysParams()) -> "PotentialModel":
        """V(x) = sum_j coeffs[j] x^j."""
        return cls("polynomial", params, coeffs=tuple(float(c) for c in coeffs))

    @classmethod
    def sampled(cls, samples: ComplexField1D, params: PhysParams = PhysParams()) -> "PotentialModel":
        if np.max(np.abs(samples.values.imag)) > 0:
            raise ValueError("sampled potentials must be real")
        return cls("user_sampled", params, samples=samples)

    @property
    def length_scale(self) -> float:
        pr = self.params
        if self.kind == "harmonic":
            return math.sqrt(pr.hbar / (pr.mass * pr.omega))
        if self.kind == "poeschl_teller":
            return 1.0 / pr.a
        if self.kind == "polynomial":
            deg = len(self.coeffs) - 1
            lead = abs(self.coeffs[-1]) if deg > 0 else 1.0
            return (pr.hbar ** 2 / (pr.mass * lead)) ** (1.0 / (deg + 2)) if deg > 0 else 1.0
        if self.kind == "linear":
            return (pr.hbar ** 2 / (pr.mass * max(abs(self.force), 1e-300))) ** (1 / 3)
        g = self.samples.grid
        return 0.1 * (g.x_max - g.x_min)

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 1):
        """d^order V / dx^order, exact for the closed forms."""
        x = np.asarray(x, dtype=float)
        pr = self.params
        if self.kind == "harmonic":
            c = 0.5 * pr.mass * pr.omega ** 2
            out = [c * x ** 2, 2 * c * x, 2 * c + 0 * x][order] if order <= 2 else 0 * x
        elif self.kind == "polynomial":
            coeffs = np.asarray(self.coeffs)
            out = P.polyval(x, P.polyder(coeffs, order) if order else coeffs)
        elif self.kind == "linear":
            out = [self.v0 - self.force * (x - self.x1), -self.force + 0 * x][order] if order <= 1 else 0 * x
        elif self.kind == "poeschl_teller":
            out = self._pt_derivative(x, order)
        else:
            out = self._sampled_derivative(x, order)
        return float(out) if np.ndim(out) == 0 else out

    def _pt_derivative(self, x, order):
        pr = self.params
        c = pr.hbar ** 2 * pr.a ** 2 / pr.mass
        t = np.tanh(pr.a * x)
        s2 = 1.0 - t ** 2  # sech^2
        a = pr.a
        if order == 0:
            return -c * s2
        if order == 1:
            return 2 * c * a * s2 * t
        if order == 2:
            return 2 * c * a ** 2 * s2 * (1 - 3 * t ** 2)
        if order == 3:
            return 2 * c * a ** 3 * s2 * t * (12 * t ** 2 - 8)
        raise ValueError("Poeschl-Teller derivatives implemented up to order 3")

    def _sampled_derivative(self, x, order):
        g = self.samples.grid
        if np.any(x < g.x_min) or np.any(x > g.x_max):
            raise OutOfWindowError(f"x outside sampled window [{g.x_min}, {g.x_max}]")
        vals = self.samples.values.real
        for _ in range(order):
            vals = np.gradient(vals, g.spacing, edge_order=2)
        return np.interp(x, g.points, vals)

    def default_window(self) -> tuple[float, float]:
        if self.kind == "user_sampled":
            return self.samples.grid.x_min, self.samples.grid.x_max
        centre = self.x1 if self.kind == "linear" else 0.0
        w = 10 * self.length_scale
        return centre - w, centre + w


def eval_potential(model: PotentialModel, x):
    """V(x); sampled models raise OutOfWindowError outside their window."""
    if not np.all(np.isfinite(np.asarray(x, dtype=float))):
        raise ValueError("x must be finite")
    return model(x)


@dataclass(frozen=True)
class TurningPointSet:
    roots: tuple = ()
    slope_signs: tuple = ()

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def turning_points(model: PotentialModel, E: float, window=None, n_scan: int = 20001) -> TurningPointSet:
    """All real roots of V(x) = E in ``window`` (sign scan, then bisection)."""
    if not np.isfinite(E):
        raise ValueError("energy must be finite")
    if model.kind == "linear":
        if model.force == 0:
            return TurningPointSet()
        r = model.x1 + (model.v0 - E) / model.force
        return TurningPointSet((r,), (int(np.sign(-model.force)),))
    lo, hi = window if window is not None else model.default_window()
    xs = np.linspace(lo, hi, n_scan)
    f = model(xs) - E
    roots = []
    for i in range(n_scan - 1):
        if f[i] == 0.0:
            roots.append(xs[i])
        elif f[i] * f[i + 1] < 0:
            roots.append(brentq(lambda y: model(y) - E, xs[i], xs[i + 1], xtol=1e-14, rtol=1e-15, maxiter=200))
    if f[-1] == 0.0:
        roots.append(xs[-1])
    roots = sorted(roots)
    signs = tuple(int(np.sign(model.derivative(r, 1))) for r in roots)
    return TurningPointSet(tuple(float(r) for r in roots), signs)


def validity_radius(model: PotentialModel, x0: float) -> float:
    """(1/2) (hbar^2 / (M |V'(x0)|))^(1/3): the scale that |x - x0| must greatly exceed."""
    slope = abs(model.derivative(x0, 1))
    if slope == 0:
        raise DegenerateTurningPointError(f"V'({x0}) vanishes")
    pr = model.params
    return 0.5 * (pr.hbar ** 2 / (pr.mass * slope)) ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# harmonic oscillator references

def ho_hamiltonian(params: PhysParams, x, p):
    return p ** 2 / (2 * params.mass) + 0.5 * params.mass * params.omega ** 2 * x ** 2


def ho_exact_wigner(n: int, params: PhysParams, x_grid: Grid1D, p_grid: Grid1D) -> RealField2D:
    """((-1)^n / pi hbar) exp(-2H/hbar w) L_n(4H/hbar w) on the grid."""
    if n < 0:
        raise ValueError("n must be non-negative")
    X, Pm = np.meshgrid(x_grid.points, p_grid.points, indexing="ij")
    h = ho_hamiltonian(params, X, Pm) / (params.hbar * params.omega)
    w = (-1) ** n / (math.pi * params.hbar) * np.exp(-2 * h) * laguerre(n, 4 * h)
    return RealField2D(x_grid, p_grid, w, {"source": "ho_exact", "n": n})


def ho_exact_wave(n: int, params: PhysParams, grid: Grid1D) -> ComplexField1D:
    """Normalised n-th Hermite function by the stable recurrence."""
    if n < 0 or n > 64:
        raise ValueError("ho_exact_wave supports 0 <= n <= 64")
    alpha = params.mass * params.omega / params.hbar
    xi = math.sqrt(alpha) * grid.points
    h_prev = np.zeros_like(xi)
    h_cur = (alpha / math.pi) ** 0.25 * np.exp(-xi ** 2 / 2)
    for m in range(n):
        h_prev, h_cur = h_cur, math.sqrt(2.0 / (m + 1)) * xi * h_cur - math.sqrt(m / (m + 1)) * h_prev
    return ComplexField1D(grid, h_cur.astype(complex))


# ---------------------------------------------------------------------------
# Poeschl-Teller references

def pt_exact_wave(params: PhysParams, grid: Grid1D) -> ComplexField1D:
    """A (ik - a tanh(ax)) / (ik + a) exp(ikx)."""
    x = grid.points
    k, a = params.k, params.a
    psi = params.amplitude * (1j * k - a * np.tanh(a * x)) / (1j * k + a) * np.exp(1j * k * x)
    return ComplexField1D(grid, psi)


def pt_momentum_wave(params: PhysParams):
    """Momentum-representation wave as a distribution in p.

    A sqrt(2 pi hbar) (ik/(ik+a)) [delta(p - k hbar) + (1/2k hbar) pv csch(pi (p - k hbar)/(2 a hbar))]
    """
    from .distributions import DistAtom, DistExpr

    k, a, hb = params.k, params.a, params.hbar
    base = params.amplitude * math.sqrt(2 * math.pi * hb) * (1j * k) / (1j * k + a)
    return DistExpr((
        DistAtom("delta", base, center=k * hb),
        DistAtom("pv_csch", base / (2 * k * hb), center=k * hb, scale=2 * a * hb / math.pi),
    ))


def pt_position_dist(params: PhysParams):
    """The Poeschl-Teller position wave written in distribution atoms (for transforms)."""
    from .distributions import DistAtom, DistExpr

    k, a, A = params.k, params.a, params.amplitude
    return DistExpr((
        DistAtom("one", A * 1j * k / (1j * k + a), freq=k),
        DistAtom("tanh", -A * a / (1j * k + a), freq=k, scale=1.0 / a),
    ))
