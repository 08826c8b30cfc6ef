"""WKB phase hierarchy, Airy patches, region matching and quantization.

Phases follow psi = exp((i/hbar) sigma) with sigma = sum_k eps^k sigma_k and
eps = hbar / i.  Writing y_k = sigma_k', the stationary equation
sigma'^2 + eps sigma'' = 2M(E - V) gives

    y_0^2 = 2M(E - V)
    2 y_0 y_k = -(sum_{j=1}^{k-1} y_j y_{k-j} + y_{k-1}')

Branch I takes the principal square root for y_0, branch II its negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Chebyshev
from scipy import integrate
from scipy.optimize import brentq

from .numerics import ComplexField1D, Grid1D, airy_phi
from .potentials import PotentialModel, turning_points, validity_radius

MAX_ORDER = 4
CHEB_DEGREE = 96


class ValidityError(ValueError):
    """A region gets too close to a turning point."""


class QuantizationError(RuntimeError):
    pass


class MatchingError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class CoverageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# phase terms

class _ComplexCheb:
    """Complex function as a pair of Chebyshev series."""

    def __init__(self, re: Chebyshev, im: Chebyshev):
        self.re, self.im = re, im

    @classmethod
    def fit(cls, f: Callable, domain, deg: int = CHEB_DEGREE):
        return cls(Chebyshev.interpolate(lambda x: np.real(f(x)), deg, domain=domain),
                   Chebyshev.interpolate(lambda x: np.imag(f(x)), deg, domain=domain))

    def __call__(self, x):
        return self.re(x) + 1j * self.im(x)

    def deriv(self):
        return _ComplexCheb(self.re.deriv(), self.im.deriv())

    def integ(self, anchor: float):
        re, im = self.re.integ(), self.im.integ()
        return _ComplexCheb(re - re(anchor), im - im(anchor))


def _momentum(model: PotentialModel, E: float, x):
    """y_0 = sqrt(2M(E - V)) with the principal branch (i |p| where forbidden)."""
    return np.sqrt(np.asarray(2 * model.params.mass * (E - model(x)), dtype=complex))


def _cumulative_integral(f: Callable, x_ref: float, xs: np.ndarray) -> np.ndarray:
    """int_{x_ref}^{x} f for each x in ``xs`` by adaptive quadrature over consecutive gaps."""
    xs = np.asarray(xs, dtype=float)
    out = np.zeros(xs.shape, dtype=complex)
    order = np.argsort(xs)
    opts = dict(limit=200, epsabs=1e-13, epsrel=1e-12)

    def seg(a, b):
        re = integrate.quad(lambda t: float(np.real(f(t))), a, b, **opts)[0]
        im = integrate.quad(lambda t: float(np.imag(f(t))), a, b, **opts)[0]
        return re + 1j * im

    up = [i for i in order if xs[i] >= x_ref]
    down = [i for i in order[::-1] if xs[i] < x_ref]
    for chain in (up, down):
        acc, prev = 0j, x_ref
        for i in chain:
            acc += seg(prev, xs[i])
            out[i] = acc
            prev = xs[i]
    return out


@dataclass
class PhaseSeries:
    """Sampled phase terms sigma_0 .. sigma_K of one branch on one region."""

    region: tuple
    branch: str
    x: np.ndarray
    terms: list
    x_ref: float
    hbar: float
    derivs: list = field(default_factory=list, repr=False)

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def total_phase(self) -> np.ndarray:
        """sigma = sum_k (hbar/i)^k sigma_k."""
        eps = self.hbar / 1j
        return sum(eps ** k * s for k, s in enumerate(self.terms))

    def exponent(self) -> np.ndarray:
        """(i/hbar) sigma, the logarithm of the wave piece."""
        return 1j / self.hbar * self.total_phase()

    def other_branch(self) -> "PhaseSeries":
        """Branch relation sigma_k^(II) = (-1)^(k+1) sigma_k^(I)."""
        flip = [(-1) ** (k + 1) * s for k, s in enumerate(self.terms)]
        dflip = [(lambda x, d=d, k=k: (-1) ** (k + 1) * d(x)) for k, d in enumerate(self.derivs)]
        other = "II" if self.branch == "I" else "I"
        return PhaseSeries(self.region, other, self.x, flip, self.x_ref, self.hbar, dflip)


def solve_phase_terms(model: PotentialModel, E: float, branch: str = "I", order: int = 1,
                      region=(-math.inf, math.inf), x=None, x_ref: Optional[float] = None,
                      margin: float = 3.0, window=None) -> PhaseSeries:
    """Phase terms of one branch sampled at ``x`` (points inside ``region``).

    ``x_ref`` defaults to the turning point nearest the region, or 0 when there is none.
    Every region point must stay ``margin`` validity radii away from each turning point.
    """
    if branch not in ("I", "II"):
        raise ValueError("branch must be 'I' or 'II'")
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must lie in [0, {MAX_ORDER}]")
    lo, hi = region
    if x is None:
        raise ValueError("sample points are required")
    x = np.asarray(x, dtype=float)
    if np.any(x < lo) or np.any(x > hi):
        raise ValueError("sample points lie outside the region")
    tps = turning_points(model, E, window=window)
    for t in tps:
        gap = max(lo - t, t - hi, 0.0)
        if gap == 0.0:
            raise ValidityError(f"region [{lo}, {hi}] contains the turning point {t}")
        r = validity_radius(model, t)
        if gap < margin * r:
            raise ValidityError(
                f"region [{lo}, {hi}] is {gap / r:.2f} validity radii from turning point {t}; need {margin}")
    if x_ref is None:
        if len(tps):
            x_ref = min(tps, key=lambda t: max(lo - t, t - hi, 0.0))
        else:
            x_ref = float(np.clip(0.0, lo, hi))
    p0 = _momentum(model, E, x)
    if np.any(np.abs(p0) == 0):
        raise ValidityError("classical momentum vanishes inside the region")

    sign = 1.0 if branch == "I" else -1.0
    M = model.params.mass
    y0 = lambda t: sign * _momentum(model, E, np.asarray(t, dtype=float))
    terms = [sign * _cumulative_integral(lambda t: _momentum(model, E, t), x_ref, x)]
    derivs: list = [y0]
    if order >= 1:
        # sigma_1 = ln(1/sqrt|p|); y_1 = M V' / (2 y_0^2) for either branch
        terms.append(-0.5 * np.log(np.abs(p0)).astype(complex))
        derivs.append(lambda t: M * model.derivative(np.asarray(t, dtype=float), 1) / (2 * y0(t) ** 2))
    if order >= 2:
        a, b = float(x.min()), float(x.max())
        if not (np.isfinite(a) and np.isfinite(b)) or a == b:
            raise ValueError("higher orders need at least two distinct finite sample points")
        anchor = float(np.clip(x_ref, a, b))
        chebs = [None, _ComplexCheb.fit(derivs[1], (a, b))]
        for k in range(2, order + 1):
            prev = chebs[k - 1].deriv()

            def yk(t, k=k, prev=prev, chebs=chebs):
                acc = prev(t)
                for j in range(1, k):
                    acc = acc + chebs[j](t) * chebs[k - j](t)
                return -acc / (2 * y0(t))
            chebs.append(_ComplexCheb.fit(yk, (a, b)))
            derivs.append(chebs[k])
            terms.append(chebs[k].integ(anchor)(x))
    return PhaseSeries((lo, hi), branch, x, terms, float(x_ref), model.params.hbar, derivs)


def phase_residual(series: PhaseSeries, model: PotentialModel, E: float) -> float:
    """max |sigma'^2 + eps sigma'' - 2M(E - V)| over the series' samples (K >= 1)."""
    eps = series.hbar / 1j
    x = series.x
    if series.order < 1:
        raise ValueError("residual needs order >= 1")
    dphi = sum(eps ** k * d(x) for k, d in enumerate(series.derivs))
    # sigma'' from y_0' = -M V'/y_0 and Chebyshev derivatives of y_k, k >= 1
    M = model.params.mass
    y0 = series.derivs[0](x)
    ddphi = -M * model.derivative(x, 1) / y0
    for k in range(1, series.order + 1):
        d = series.derivs[k]
        if isinstance(d, _ComplexCheb):
            ddphi = ddphi + eps ** k * d.deriv()(x)
        else:
            cheb = _ComplexCheb.fit(d, (float(x.min()), float(x.max())))
            ddphi = ddphi + eps ** k * cheb.deriv()(x)
    res = dphi ** 2 + eps * ddphi - 2 * M * (E - model(x))
    return float(np.max(np.abs(res)))


def split_odd_even(series: PhaseSeries):
    """(sigma_odd, sigma_even) with sigma_I = odd + even and sigma_II = odd - even."""
    eps = series.hbar / 1j
    odd = sum(eps ** k * s for k, s in enumerate(series.terms) if k % 2 == 1)
    even = sum(eps ** k * s for k, s in enumerate(series.terms) if k % 2 == 0)
    if series.branch == "II":
        even = -even
    odd = odd if not np.isscalar(odd) else np.zeros_like(series.x, dtype=complex)
    return odd, even


# ---------------------------------------------------------------------------
# quantization

def action_integral(model: PotentialModel, E: float, window=None) -> float:
    """int_{x1}^{x2} sqrt(2M(E - V)) dx between the two turning points."""
    tps = turning_points(model, E, window=window)
    if len(tps) != 2:
        raise QuantizationError(f"expected two turning points at E={E}, found {len(tps)}")
    x1, x2 = tps.roots
    M = model.params.mass

    # divide out the square-root endpoint behaviour and let QUADPACK's algebraic weight handle it
    def g(x):
        den = (x - x1) * (x2 - x)
        if den == 0:
            slope = -model.derivative(x1, 1) if x == x1 else model.derivative(x2, 1)
            val = 2 * M * slope / (x2 - x1)
        else:
            val = 2 * M * (E - model(x)) / den
        return math.sqrt(max(val, 0.0))
    return integrate.quad(g, x1, x2, weight="alg", wvar=(0.5, 0.5), epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def quantize_energy(model: PotentialModel, n: int, window=None, e_max: Optional[float] = None) -> float:
    """Energy with int p dx = pi hbar (n + 1/2)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    target = math.pi * model.params.hbar * (n + 0.5)
    lo_w, hi_w = window if window is not None else model.default_window()
    xs = np.linspace(lo_w, hi_w, 20001)
    vmin = float(np.min(model(xs)))
    vmax = float(min(model(lo_w), model(hi_w)))
    span = (vmax - vmin) if e_max is None else (e_max - vmin)
    f = lambda E: action_integral(model, E, window) - target
    e_lo = vmin + 1e-12 * max(1.0, abs(span))
    e_hi = e_lo
    step = span * 1e-3
    while True:
        e_hi = min(e_hi + step, vmin + span * (1 - 1e-9))
        try:
            val = f(e_hi)
        except QuantizationError:
            val = math.nan
        if val > 0:
            break
        if e_hi >= vmin + span * (1 - 1e-9) or not math.isfinite(val) and e_hi > e_lo + step:
            raise QuantizationError(f"no bracket for level n={n} below E={e_hi}")
        e_lo = e_hi if math.isfinite(val) else e_lo
        step *= 2
    return brentq(f, e_lo, e_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


# ---------------------------------------------------------------------------
# Airy patches

@dataclass(frozen=True)
class LocalAirySolution:
    """C * Phi(kappa * s * (x_t - x)), s = +1 for a left turning point and -1 for a right one."""

    x_t: float
    F: float
    C: complex
    orientation: str
    kappa: float

    def __post_init__(self):
        if not self.F > 0:
            raise ValueError("slope magnitude must be positive")
        if self.orientation not in ("left", "right"):
            raise ValueError("orientation must be 'left' or 'right'")

    @property
    def sign(self) -> int:
        return 1 if self.orientation == "left" else -1

    def argument(self, x):
        return self.kappa * self.sign * (self.x_t - np.asarray(x, dtype=float))

    def __call__(self, x):
        return self.C * airy_phi(self.argument(x))

    def with_scale(self, C: complex) -> "LocalAirySolution":
        return LocalAirySolution(self.x_t, self.F, C, self.orientation, self.kappa)


def airy_patch(model: PotentialModel, E: float, tp: float, orientation: str, C: complex = 1.0) -> LocalAirySolution:
    from .potentials import DegenerateTurningPointError

    slope = model.derivative(tp, 1)
    if slope == 0:
        raise DegenerateTurningPointError(f"V'({tp}) vanishes")
    F = abs(slope)
    pr = model.params
    kappa = (2 * pr.mass * F / pr.hbar ** 2) ** (1.0 / 3.0)
    return LocalAirySolution(float(tp), float(F), complex(C), orientation, kappa)


# ---------------------------------------------------------------------------
# region layout and matching

@dataclass(frozen=True)
class RegionLayout:
    """Region edges as multiples of the half-width h about the well centre c.

    Defaults: A_L = (-inf, c - 5/4 h], B_L = [c - 3/2 h, c - 3/4 h],
    C = [c - 7/8 h, c + 7/8 h], mirrored on the right.
    """

    a_edge: float = 1.25
    b_outer: float = 1.5
    b_inner: float = 0.75
    c_edge: float = 0.875
    margin: float = 1.5
    fit_threshold: float = 0.1

    def intervals(self, x1: float, x2: float) -> dict:
        c, h = 0.5 * (x1 + x2), 0.5 * (x2 - x1)
        return {
            "A_L": (-math.inf, c - self.a_edge * h),
            "B_L": (c - self.b_outer * h, c - self.b_inner * h),
            "C": (c - self.c_edge * h, c + self.c_edge * h),
            "B_R": (c + self.b_inner * h, c + self.b_outer * h),
            "A_R": (c + self.a_edge * h, math.inf),
        }


@dataclass
class WKBPiece:
    """D_I exp((i/hbar) sigma^I) + D_II exp((i/hbar) sigma^II) on one region."""

    model: PotentialModel
    E: float
    region: tuple
    order: int
    x_ref: float
    d_one: complex
    d_two: complex
    margin: float
    window: Optional[tuple] = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        if x.size == 0:
            return out
        s1 = solve_phase_terms(self.model, self.E, "I", self.order, self.region, x,
                               x_ref=self.x_ref, margin=self.margin, window=self.window)
        if self.d_one != 0:
            out = out + self.d_one * np.exp(s1.exponent())
        if self.d_two != 0:
            out = out + self.d_two * np.exp(s1.other_branch().exponent())
        return out

    def scaled(self, c: complex) -> "WKBPiece":
        return WKBPiece(self.model, self.E, self.region, self.order, self.x_ref,
                        self.d_one * c, self.d_two * c, self.margin, self.window)


@dataclass
class AiryPiece:
    region: tuple
    solution: LocalAirySolution

    def __call__(self, x):
        return self.solution(x)

    def scaled(self, c: complex) -> "AiryPiece":
        return AiryPiece(self.region, self.solution.with_scale(self.solution.C * c))


@dataclass
class MatchedAssembly:
    """Ordered region pieces with matched coefficients."""

    names: list
    pieces: list
    coefficients: dict
    normalization: complex
    fit_residuals: dict
    diagnostics: dict = field(default_factory=dict)

    def regions(self) -> list:
        return [p.region for p in self.pieces]


def _fit(basis: np.ndarray, target: np.ndarray):
    """Least-squares c with target ~ c * basis, plus the relative residual."""
    c = np.vdot(basis, target) / np.vdot(basis, basis)
    res = np.linalg.norm(target - c * basis) / np.linalg.norm(target)
    return complex(c), float(res)


def _overlap_points(a: tuple, b: tuple, n: int = 64) -> np.ndarray:
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    if not lo < hi:
        raise CoverageError(f"regions {a} and {b} do not overlap")
    return np.linspace(lo, hi, n)


def match_coefficients(model: PotentialModel, E: float, order: int = 1,
                       layout: RegionLayout = RegionLayout(), window=None,
                       norm_grid: Optional[Grid1D] = None) -> MatchedAssembly:
    """Five-region matching across two turning points.

    Coefficients come from least-squares fits on the region overlaps:
    C_BL = 1, then D_AL, D_C (phase pi/4), C_BR and D_AR in turn.
    """
    tps = turning_points(model, E, window=window)
    if len(tps) != 2:
        raise MatchingError(f"matching needs two turning points, found {len(tps)}", math.inf)
    x1, x2 = tps.roots
    iv = layout.intervals(x1, x2)
    lo_w, hi_w = window if window is not None else model.default_window()
    iv["A_L"] = (lo_w, iv["A_L"][1])
    iv["A_R"] = (iv["A_R"][0], hi_w)
    m = layout.margin

    bl = AiryPiece(iv["B_L"], airy_patch(model, E, x1, "left"))
    br_unit = airy_patch(model, E, x2, "right")
    residuals = {}

    # A_L decays to the left: branch II referenced at x1
    al_unit = WKBPiece(model, E, iv["A_L"], order, x1, 0j, 1.0, m, window)
    xs = _overlap_points(iv["A_L"], iv["B_L"])
    d_al, residuals["A_L|B_L"] = _fit(al_unit(xs), bl(xs))

    # C: D_C sin(S/hbar + pi/4)/sqrt(p) written through both branches
    rot = math.pi / 4
    c_unit = WKBPiece(model, E, iv["C"], order, x1, np.exp(1j * rot) / 2j, -np.exp(-1j * rot) / 2j, m, window)
    xs = _overlap_points(iv["B_L"], iv["C"])
    d_c, residuals["B_L|C"] = _fit(c_unit(xs), bl(xs))
    c_piece = c_unit.scaled(d_c)

    xs = _overlap_points(iv["C"], iv["B_R"])
    c_br, residuals["C|B_R"] = _fit(br_unit(xs), c_piece(xs))
    br = AiryPiece(iv["B_R"], br_unit.with_scale(c_br))

    # right-referenced allowed form, used for the parity diagnostic
    cr_unit = WKBPiece(model, E, iv["C"], order, x2, -np.exp(-1j * rot) / 2j, np.exp(1j * rot) / 2j, m, window)
    d_c_prime, _ = _fit(cr_unit(xs), br(xs))

    ar_unit = WKBPiece(model, E, iv["A_R"], order, x2, 1.0, 0j, m, window)
    xs = _overlap_points(iv["B_R"], iv["A_R"])
    d_ar, residuals["B_R|A_R"] = _fit(ar_unit(xs), br(xs))

    worst = max(residuals.values())
    if worst > layout.fit_threshold:
        raise MatchingError(f"overlap fit above threshold {layout.fit_threshold}", worst)

    pieces = [al_unit.scaled(d_al), bl, c_piece, br, ar_unit.scaled(d_ar)]
    names = ["A_L", "B_L", "C", "B_R", "A_R"]
    coeffs = {"D_AL": d_al, "C_BL": 1.0 + 0j, "D_C": d_c, "delta": rot, "C_BR": c_br, "D_AR": d_ar,
              "D_C_prime": d_c_prime}
    asm = MatchedAssembly(names, pieces, coeffs, 1.0, residuals)

    grid = norm_grid or Grid1D(lo_w, hi_w, 4001)
    raw = _blend(asm, grid.points)
    N = 1.0 / math.sqrt(float(np.sum(np.abs(raw) ** 2) * grid.spacing))
    asm.normalization = N
    asm.pieces = [p.scaled(N) for p in pieces]
    F1 = abs(model.derivative(x1, 1))
    pr = model.params
    asm.diagnostics = {
        "turning_points": (x1, x2),
        "parity_ratio": d_c / d_c_prime,
        "ratio_CBL_DAL": 1.0 / d_al,
        "ratio_CBL_DAL_closed_form": 2 * (2 * pr.mass * F1 * pr.hbar) ** (-1.0 / 6.0),
        # table shape: D_AL, D_I(C), D_AR in units of the normalisation
        "table": {"D_AL": N * d_al, "D_I_C": N * d_c * np.exp(1j * rot) / 2j, "D_AR": N * d_ar},
    }
    return asm


def single_region_assembly(model: PotentialModel, E: float, order: int = 1, window=None,
                           x_ref: float = 0.0) -> MatchedAssembly:
    """One branch-I piece over the whole window (no turning points)."""
    lo, hi = window if window is not None else model.default_window()
    if len(turning_points(model, E, window=(lo, hi))):
        raise ValidityError("the window contains turning points")
    piece = WKBPiece(model, E, (lo, hi), order, x_ref, 1.0, 0j, 0.0, (lo, hi))
    return MatchedAssembly(["I"], [piece], {"D": 1.0 + 0j}, 1.0, {})


def _raised_cosine(x, lo, hi):
    t = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return 0.5 * (1 - np.cos(math.pi * t))


def _blend(asm: MatchedAssembly, x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape, dtype=complex)
    covered = np.zeros(x.shape, dtype=bool)
    regions = asm.regions()
    for i, (piece, (lo, hi)) in enumerate(zip(asm.pieces, regions)):
        inside = (x >= lo) & (x <= hi)
        if not inside.any():
            continue
        w = np.ones(x.shape)
        if i > 0 and regions[i - 1][1] > lo:
            w = w * _raised_cosine(x, lo, regions[i - 1][1])
        if i + 1 < len(regions) and regions[i + 1][0] < hi:
            w = w * (1 - _raised_cosine(x, regions[i + 1][0], hi))
        vals = np.zeros(x.shape, dtype=complex)
        vals[inside] = piece(x[inside])
        out = out + w * vals
        covered |= inside
    if not covered.all():
        bad = x[~covered]
        raise CoverageError(f"{bad.size} grid nodes not covered, first at x={bad[0]}")
    return out


def assemble_wavefunction(asm: MatchedAssembly, grid: Grid1D, normalize: bool = True) -> ComplexField1D:
    vals = _blend(asm, grid.points)
    field_ = ComplexField1D(grid, vals)
    return field_.normalized() if normalize else field_


def ho_assembly(n: int, params, order: int = 1, layout: RegionLayout = RegionLayout(), window=None):
    """Matched WKB assembly for the oscillator level n."""
    model = PotentialModel.harmonic(params)
    E = quantize_energy(model, n, window=window)
    return model, E, match_coefficients(model, E, order, layout, window)
