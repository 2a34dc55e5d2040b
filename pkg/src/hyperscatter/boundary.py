"""Poisson kernel, finite-difference Laplacian and the intertwining multiplier J.

The intertwining operator acts on the circle as a Fourier multiplier ``c_n(lam)``.
Raw coefficients are the Fourier coefficients of ``(2|sin(t/2)|)**(-1-2 lam)/(2 pi)``;
they are multiplied by the scalar ``kappa(lam) = sqrt(2 pi) * 4**lam`` so that

    c_n(lam) c_n(-lam) = -cot(pi lam) / (2 lam)

and the constant-term normalization matches the Eisenstein functional equation
(see ``scattering.eisenstein_functional_check``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gamma, loggamma, rgamma

from .errors import (NoConvergence, PoleAtInteger, StencilOutOfDomain,
                     SymbolVanishes, WeightMismatch)
from .moebius import TWO_PI, BoundaryPoint, Chart

WEIGHT_TOL = 1e-12
POLE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralParam:
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    @classmethod
    def of(cls, lam):
        return lam if isinstance(lam, SpectralParam) else cls(lam)

    @property
    def is_nonpositive_integer_pole(self):
        """True when lam is in {0, 1, 2, ...} (poles of the unnormalized operator)."""
        v = self.value
        return abs(v.imag) < POLE_TOL and v.real > -POLE_TOL and abs(v.real - round(v.real)) < POLE_TOL

    @property
    def is_half_integer(self):
        v = 2 * self.value
        return abs(v.imag) < POLE_TOL and abs(v.real - round(v.real)) < POLE_TOL

    def __neg__(self):
        return SpectralParam(-self.value)


def _lam(lam):
    return SpectralParam.of(lam).value


# -- interior points ----------------------------------------------------------

class InteriorChart(Enum):
    HALFPLANE = "halfplane"
    DISC = "disc"


@dataclass(frozen=True)
class InteriorPoint:
    chart: InteriorChart
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if self.chart is InteriorChart.HALFPLANE and not v.imag > 0:
            raise ValueError("half-plane point needs y > 0")
        if self.chart is InteriorChart.DISC and not abs(v) < 1:
            raise ValueError("disc point needs |z| < 1")
        object.__setattr__(self, "value", v)

    @classmethod
    def halfplane(cls, x, y):
        return cls(InteriorChart.HALFPLANE, complex(x, y))

    @classmethod
    def disc(cls, r, alpha):
        return cls(InteriorChart.DISC, cmath.rect(r, alpha))

    def to_halfplane(self):
        if self.chart is InteriorChart.HALFPLANE:
            return self
        z = self.value
        return InteriorPoint(InteriorChart.HALFPLANE, 1j * (1 + z) / (1 - z))

    def to_disc(self):
        if self.chart is InteriorChart.DISC:
            return self
        w = self.value
        return InteriorPoint(InteriorChart.DISC, (w - 1j) / (w + 1j))

    @property
    def xy(self):
        w = self.to_halfplane().value
        return w.real, w.imag

    @property
    def polar(self):
        z = self.to_disc().value
        return abs(z), cmath.phase(z)


# -- boundary densities -------------------------------------------------------

@dataclass(frozen=True)
class BoundaryDensity:
    """Samples at ``2 pi j / M`` of a section of weight ``weight``."""

    values: np.ndarray
    weight: complex = 0.5

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        M = len(vals)
        if M < 2 or M & (M - 1):
            raise ValueError(f"grid size {M} is not a power of two")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weight", complex(self.weight))

    @classmethod
    def from_function(cls, f, M, weight=0.5):
        return cls(f(angles(M)), weight)

    @classmethod
    def mode(cls, n, M, weight=0.5):
        return cls(np.exp(1j * n * angles(M)), weight)

    @property
    def M(self):
        return len(self.values)

    @property
    def angles(self):
        return angles(self.M)

    def scaled_by_power(self, base, s):
        """Multiply by ``base**s`` (e.g. a power of rho); the weight shifts by ``s``."""
        return BoundaryDensity(self.values * np.asarray(base, dtype=float) ** s, self.weight + s)

    def require_weight(self, lam, where):
        if abs(self.weight - complex(lam)) > WEIGHT_TOL:
            raise WeightMismatch(f"density has weight {self.weight}, expected {complex(lam)}", where)

    def __add__(self, other):
        if abs(self.weight - other.weight) > WEIGHT_TOL:
            raise WeightMismatch("adding densities of different weights", "boundary.BoundaryDensity")
        return BoundaryDensity(self.values + other.values, self.weight)

    def __mul__(self, c):
        return BoundaryDensity(self.values * c, self.weight)

    __rmul__ = __mul__


def angles(M):
    return TWO_PI * np.arange(M) / M


# -- Poisson kernel and Laplacian ---------------------------------------------

def poisson_kernel(lam, p, b):
    """Poisson kernel ``P_lam(p, b)``.

    Line-chart (or plain real) ``b``: ``(y / (y**2 + (x-b)**2))**(lam + 1/2)``.
    Circle-chart ``b``: ``((1-|z|**2) / |e^{i b} - z|**2)**(lam + 1/2)``.
    """
    s = _lam(lam) + 0.5
    if isinstance(b, BoundaryPoint) and b.chart is Chart.CIRCLE:
        z = p.to_disc().value
        base = (1 - abs(z) ** 2) / np.abs(np.exp(1j * np.asarray(b.value)) - z) ** 2
        return base ** s
    bv = b.value if isinstance(b, BoundaryPoint) else b
    x, y = p.xy
    return (y / (y * y + (x - np.asarray(bv, dtype=float)) ** 2)) ** s


def disc_poisson(lam, z, theta):
    """Vectorized circle-chart kernel; ``z`` and ``theta`` broadcast."""
    s = _lam(lam) + 0.5
    z = np.asarray(z)
    base = (1 - np.abs(z) ** 2) / np.abs(np.exp(1j * np.asarray(theta)) - z) ** 2
    return base ** s


def hyperbolic_laplacian_fd(f, p, h):
    """Five-point estimate of ``-y**2 (f_xx + f_yy)`` at a half-plane point; ``f(x, y)``."""
    x, y = p.xy
    if y <= 2 * h:
        raise StencilOutOfDomain(f"stencil step {h} too large at height {y}", "boundary.hyperbolic_laplacian_fd")
    c = f(x, y)
    lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4 * c) / (h * h)
    return -y * y * lap


def eigen_residual(f, lam, p, h):
    """``(Delta - 1/4 + lam**2) f`` at ``p`` by finite differences."""
    lam = _lam(lam)
    x, y = p.xy
    return hyperbolic_laplacian_fd(f, p, h) + (lam * lam - 0.25) * f(x, y)


def poisson_transform(lam, phi, p):
    """Trapezoidal ``(1/2 pi) int P_lam(p, e^{it}) phi(t) dt`` in the disc chart."""
    phi.require_weight(_lam(lam), "boundary.poisson_transform")
    z = p.to_disc().value
    return complex(np.mean(disc_poisson(lam, z, phi.angles) * phi.values))


# -- intertwining multiplier --------------------------------------------------

def kappa(lam):
    """Normalizing scalar applied on top of the raw circle-kernel coefficients."""
    lam = _lam(lam)
    return math.sqrt(TWO_PI) * 4.0 ** lam


def functional_constant(lam):
    """``-cot(pi lam) / (2 lam)``."""
    lam = _lam(lam)
    return -cmath.cos(math.pi * lam) / cmath.sin(math.pi * lam) / (2 * lam)


def raw_closed_form(lam, n):
    """Closed form of ``(1/2 pi) int (2|sin(t/2)|)**(-1-2 lam) e^{-int} dt``.

    ``Gamma(-2 lam) cos(pi lam) / pi * Gamma(1/2 + lam + |n|) / Gamma(1/2 - lam + |n|)``,
    meromorphic in ``lam``; obtained from the rational ratio fit below.
    """
    lam = _lam(lam)
    n = np.abs(np.asarray(n))
    if lam.real < 0:
        # direct form; the reflection form below is 0/0 at negative integers
        head = gamma(-2 * lam) * cmath.cos(math.pi * lam) / math.pi
    else:
        # reflection form, finite at half-integers
        head = -rgamma(1 + 2 * lam) / (2 * cmath.sin(math.pi * lam))
    low = 0.5 - lam + n
    pole = (np.abs(low.imag) < POLE_TOL) & (low.real < POLE_TOL) & (np.abs(low.real - np.round(low.real)) < POLE_TOL)
    safe = np.where(pole, 1.0, low)
    ratio = np.where(pole, 0.0, np.exp(loggamma(0.5 + lam + n) - loggamma(safe)))
    return head * ratio


def _graded_nodes(p, n_pts=24, tmin=1e-12, max_panel=0.04):
    """Gauss-Legendre nodes/weights on ``[tmin, pi]`` graded geometrically toward 0."""
    edges = [math.pi]
    while edges[-1] > tmin:
        nxt = max(edges[-1] * 0.5, tmin) if edges[-1] <= 2 * max_panel else edges[-1] - max_panel
        edges.append(nxt)
    edges = np.array(edges[::-1])
    x, w = np.polynomial.legendre.leggauss(n_pts)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def raw_quadrature(lam, nmax):
    """Quadrature oracle for the raw coefficients, ``Re lam < 0``; returns ``c_0..c_nmax``."""
    lam = _lam(lam)
    if lam.real >= 0:
        raise ValueError("quadrature branch needs Re(lam) < 0")
    p = -1 - 2 * lam
    tmin = 1e-12
    t, w = _graded_nodes(p, tmin=tmin)
    kern = (2 * np.sin(t / 2)) ** p
    n = np.arange(nmax + 1)
    vals = (np.cos(np.outer(n, t)) * (kern * w)).sum(axis=1)
    # [0, tmin]: kernel ~ t**p and cos(n t) ~ 1 there
    vals = vals + tmin ** (p + 1) / (p + 1)
    return vals / math.pi


def fit_ratio(lam, nmax=64, nfit=None):
    """Fit ``c_{n+1}/c_n = (n + a)/(n + b)`` by least squares on quadrature values.

    Returns ``(a, b, max_residual)``; the closed form predicts ``a = 1/2 + lam``,
    ``b = 1/2 - lam``.
    """
    lam = _lam(lam)
    c = raw_quadrature(lam, nmax)
    n = np.arange(nmax, dtype=float)
    r = c[1:] / c[:-1]
    # r (n + b) = n + a  ->  a - r b = r n - n
    A = np.stack([np.ones_like(r), -r], axis=1)
    sol, *_ = np.linalg.lstsq(A, r * n - n, rcond=None)
    a, b = sol
    resid = np.max(np.abs(r - (n + a) / (n + b)))
    return complex(a), complex(b), float(resid)


@dataclass(frozen=True)
class FourierMultiplier:
    lam: SpectralParam
    coeffs: np.ndarray  # c_0 .. c_NF
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def NF(self):
        return len(self.coeffs) - 1

    def __call__(self, n):
        n = np.abs(np.asarray(n))
        return self.coeffs[n]

    def full(self, M):
        """Coefficients in FFT order for an ``M``-point grid, zero beyond ``NF``."""
        n = np.fft.fftfreq(M, 1.0 / M).astype(int)
        out = np.zeros(M, dtype=complex)
        keep = np.abs(n) <= self.NF
        out[keep] = self.coeffs[np.abs(n[keep])]
        return out

    def rows(self):
        return [(n, float(c.real), float(c.imag)) for n, c in enumerate(self.coeffs)]


def j_symbol(lam, NF, method="closed"):
    """Multiplier of the normalized intertwining operator for ``|n| <= NF``.

    ``method="quadrature"`` evaluates the raw integral (Re lam < 0) and continues to
    Re lam >= 0 through the functional equation; ``"closed"`` uses the Gamma form.
    """
    sp = SpectralParam.of(lam)
    if sp.is_nonpositive_integer_pole:
        raise PoleAtInteger(f"lambda = {sp.value} is a pole of the intertwining operator", "boundary.j_symbol")
    lam = sp.value
    n = np.arange(NF + 1)
    if method == "closed":
        coeffs = kappa(lam) * raw_closed_form(lam, n)
    elif method == "quadrature":
        if lam.real < 0:
            coeffs = kappa(lam) * raw_quadrature(lam, NF)
        else:
            mirror = kappa(-lam) * raw_quadrature(-lam, NF)
            if np.min(np.abs(mirror)) < 1e-300:
                raise SymbolVanishes("mirror coefficient vanishes", "boundary.j_symbol")
            coeffs = functional_constant(lam) / mirror
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(coeffs)):
        raise SymbolVanishes(f"non-finite multiplier at lambda = {lam}", "boundary.j_symbol")
    return FourierMultiplier(sp, np.asarray(coeffs, dtype=complex),
                             {"kappa": kappa(lam), "method": method})


def _multiply(mult, values):
    spec = np.fft.fft(values)
    return np.fft.ifft(spec * mult.full(len(values)))


def apply_j(lam, phi, NF=None):
    """Spectral application of J_lam; output weight is ``-lam``. Modes above ``NF`` are dropped."""
    sp = SpectralParam.of(lam)
    phi.require_weight(sp.value, "boundary.apply_j")
    NF = phi.M // 2 - 1 if NF is None else NF
    if phi.M < 2 * NF:
        raise ValueError(f"grid of {phi.M} points cannot carry band {NF}")
    mult = j_symbol(sp, NF)
    return BoundaryDensity(_multiply(mult, phi.values), -sp.value)


def j_renormalized(k, phi, eps=1e-3, NF=None, tol=1e-6, return_stages=False):
    """Limit of ``(lam - k) J_lam`` as ``lam -> k``, by Richardson extrapolation.

    Uses ``lam = k + eps, k + eps/2, k + eps/4`` and two elimination rounds.
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    phi.require_weight(k, "boundary.j_renormalized")
    NF = phi.M // 2 - 1 if NF is None else NF
    levels = []
    for e in (eps, eps / 2, eps / 4):
        mult = j_symbol(k + e, NF)
        levels.append(e * _multiply(mult, phi.values))
    r1 = [2 * levels[1] - levels[0], 2 * levels[2] - levels[1]]
    r2 = (4 * r1[1] - r1[0]) / 3
    scale = max(np.max(np.abs(r2)), 1e-300)
    if np.max(np.abs(r2 - r1[1])) > tol * scale * 1e3:
        raise NoConvergence("Richardson stages disagree", "boundary.j_renormalized")
    out = BoundaryDensity(r2, -k)
    if return_stages:
        return out, {"raw": levels, "first": r1}
    return out
