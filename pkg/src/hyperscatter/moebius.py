"""SL(2,R) acting on the boundary of the hyperbolic plane.

Two charts are used for the boundary:

* the line chart, the extended real line ``R u {inf}`` (boundary of the
  upper half-plane), and
* the circle chart, an angle ``theta`` in ``[0, 2*pi)`` (boundary of the
  Poincare disc).

They are glued by the boundary restriction of ``v = i(1+z)/(1-z)``, which
on ``z = exp(i*theta)`` reads ``v = -cot(theta/2)``. So ``theta = 0`` is
``v = inf`` and ``theta = pi`` is ``v = 0``. The same formula,
``z = (w - i)/(w + i)``, identifies the upper half-plane with the disc.

Matrices carry either exact :class:`fractions.Fraction` entries or floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ConfigError, PoleAtPoint

TWO_PI = 2.0 * math.pi
DET_TOL = 1e-12


class Chart(str, Enum):
    LINE = "line"
    CIRCLE = "circle"


class ElementClass(str, Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def parse_scalar(text, path=None):
    """Parse ``"p/q"``, an integer or a decimal literal into a Fraction.

    Non-string numbers pass through (ints become Fractions, floats stay
    floats).
    """
    if isinstance(text, bool):
        raise ConfigError(f"expected a number, got {text!r}", path)
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, (float, Fraction)):
        return text
    if not isinstance(text, str):
        raise ConfigError(f"expected a number, got {text!r}", path)
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise ConfigError(f"zero denominator in {text!r}", path) from None
    except ValueError:
        raise ConfigError(f"not a rational or decimal literal: {text!r}", path) from None


def _is_exact(x):
    return isinstance(x, Rational)


@dataclass(frozen=True)
class MoebiusMap:
    """A matrix ``[[a, b], [c, d]]`` of determinant one.

    Entries are all exact rationals or all floats; mixing promotes to float.
    """

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        entries = (self.a, self.b, self.c, self.d)
        if all(_is_exact(x) for x in entries):
            for name, x in zip("abcd", entries):
                object.__setattr__(self, name, Fraction(x))
            if self.a * self.d - self.b * self.c != 1:
                raise ValueError(f"determinant {self.det()} != 1")
        else:
            for name, x in zip("abcd", entries):
                object.__setattr__(self, name, float(x))
            if abs(self.det() - 1.0) > DET_TOL:
                raise ValueError(f"determinant {self.det()!r} differs from 1 by more than {DET_TOL}")

    @classmethod
    def normalized(cls, a, b, c, d):
        """Scale an invertible matrix with positive determinant to det 1 (float)."""
        det = float(a) * float(d) - float(b) * float(c)
        if det <= 0:
            raise ValueError("need a positive determinant to normalize into SL(2,R)")
        s = math.sqrt(det)
        return cls(float(a) / s, float(b) / s, float(c) / s, float(d) / s)

    @classmethod
    def identity(cls, exact=True):
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        return cls(one, zero, zero, one)

    @classmethod
    def diagonal(cls, mu):
        """``diag(mu, 1/mu)``; exact when ``mu`` is rational."""
        if _is_exact(mu):
            mu = Fraction(mu)
            return cls(mu, Fraction(0), Fraction(0), 1 / mu)
        return cls(mu, 0.0, 0.0, 1.0 / mu)

    @classmethod
    def rotation(cls, theta):
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, -s, s, c)

    @classmethod
    def parse(cls, entries, path=None):
        """Build from four strings/numbers, e.g. ``["2", "0", "0", "1/2"]``."""
        if len(entries) != 4:
            raise ConfigError("a matrix needs exactly four entries a, b, c, d", path)
        vals = [parse_scalar(e, f"{path}[{i}]" if path else None) for i, e in enumerate(entries)]
        try:
            return cls(*vals)
        except ValueError as exc:
            raise ConfigError(str(exc), path) from None

    @property
    def exact(self):
        return isinstance(self.a, Fraction)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def to_float(self):
        return MoebiusMap(float(self.a), float(self.b), float(self.c), float(self.d))

    def as_array(self):
        return np.array([[float(self.a), float(self.b)], [float(self.c), float(self.d)]])

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other):
        """``self o other`` (matrix product)."""
        if self.exact != other.exact:
            lhs, rhs = self.to_float(), other.to_float()
        else:
            lhs, rhs = self, other
        prod = MoebiusMap.__new__(MoebiusMap)
        a = lhs.a * rhs.a + lhs.b * rhs.c
        b = lhs.a * rhs.b + lhs.b * rhs.d
        c = lhs.c * rhs.a + lhs.d * rhs.c
        d = lhs.c * rhs.b + lhs.d * rhs.d
        if not lhs.exact:
            # renormalise so floating drift in long products stays below DET_TOL
            det = a * d - b * c
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        for name, x in zip("abcd", (a, b, c, d)):
            object.__setattr__(prod, name, x)
        return prod

    def inverse(self):
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def __neg__(self):
        return MoebiusMap(-self.a, -self.b, -self.c, -self.d)

    def is_identity(self):
        """True for +I and -I (both act trivially)."""
        if self.exact:
            return self.b == 0 and self.c == 0 and self.a == self.d and abs(self.a) == 1
        return (abs(self.b) <= DET_TOL and abs(self.c) <= DET_TOL
                and abs(self.a - self.d) <= DET_TOL and abs(abs(self.a) - 1) <= DET_TOL)

    # -- line chart -------------------------------------------------------

    def act(self, v):
        """Boundary action in the line chart; ``math.inf`` is the point at infinity."""
        a, b, c, d = self.a, self.b, self.c, self.d
        if isinstance(v, float) and math.isinf(v):
            return math.inf if c == 0 else a / c
        den = c * v + d
        if den == 0:
            return math.inf
        return (a * v + b) / den

    def dilatation_line(self, v):
        """Derivative of ``v -> (av+b)/(cv+d)``, i.e. ``1/(cv+d)**2``."""
        if isinstance(v, float) and math.isinf(v):
            if self.c == 0:
                return self.a * self.a
            raise PoleAtPoint("infinity has no finite line-chart derivative unless c = 0",
                              "moebius.dilatation")
        den = self.c * v + self.d
        if den == 0:
            raise PoleAtPoint(f"c*v + d = 0 at v = {v}", "moebius.dilatation")
        return 1 / (den * den)

    # -- circle chart -----------------------------------------------------

    def circle_coeffs(self):
        """``(alpha, beta, gamma, delta)`` of the disc map ``z -> (alpha z + beta)/(gamma z + delta)``.

        This is the matrix conjugated through the Cayley map; its determinant is 1.
        """
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        # C = [[i, i], [-1, 1]] sends z to v; h = C^{-1} g C
        alpha = 0.5 * ((a + d) + 1j * (b - c))
        beta = 0.5 * ((a - d) - 1j * (b + c))
        gamma = 0.5 * ((a - d) + 1j * (b + c))
        delta = 0.5 * ((a + d) - 1j * (b - c))
        return alpha, beta, gamma, delta

    def act_circle(self, theta):
        """Boundary action on angles; accepts scalars or numpy arrays."""
        alpha, beta, gamma, delta = self.circle_coeffs()
        z = np.exp(1j * np.asarray(theta, dtype=float))
        w = (alpha * z + beta) / (gamma * z + delta)
        out = np.mod(np.angle(w), TWO_PI)
        return float(out) if np.ndim(out) == 0 else out

    def dilatation_circle(self, theta):
        """Derivative of the induced angle map, ``1/|gamma z + delta|**2``."""
        _, _, gamma, delta = self.circle_coeffs()
        z = np.exp(1j * np.asarray(theta, dtype=float))
        out = 1.0 / np.abs(gamma * z + delta) ** 2
        return float(out) if np.ndim(out) == 0 else out

    def act_disc(self, z):
        """Action on interior points of the disc."""
        alpha, beta, gamma, delta = self.circle_coeffs()
        z = np.asarray(z, dtype=complex)
        out = (alpha * z + beta) / (gamma * z + delta)
        return complex(out) if np.ndim(out) == 0 else out

    def act_halfplane(self, w):
        """Action on interior points ``x + iy`` of the upper half-plane."""
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        w = np.asarray(w, dtype=complex)
        out = (a * w + b) / (c * w + d)
        return complex(out) if np.ndim(out) == 0 else out

    # -- general ----------------------------------------------------------

    def dilatation(self, point):
        """Derivative of the boundary map at ``point`` in that point's chart."""
        if point.chart is Chart.LINE:
            return self.dilatation_line(point.value)
        return self.dilatation_circle(point.value)

    def apply(self, point):
        if point.chart is Chart.LINE:
            return BoundaryPoint.line(self.act(point.value))
        return BoundaryPoint.circle(self.act_circle(point.value))

    def classify(self):
        if self.is_identity():
            return ElementClass.IDENTITY
        tr = abs(self.trace())
        if self.exact:
            if tr > 2:
                return ElementClass.HYPERBOLIC
            return ElementClass.PARABOLIC if tr == 2 else ElementClass.ELLIPTIC
        if tr > 2 + DET_TOL:
            return ElementClass.HYPERBOLIC
        if tr < 2 - DET_TOL:
            return ElementClass.ELLIPTIC
        return ElementClass.PARABOLIC

    def fixed_points(self):
        """Fixed points in the line chart (``math.inf`` allowed); float."""
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        if c == 0:
            pts = [math.inf]
            if a != d:
                pts.append(b / (d - a))
            return pts
        disc = (a - d) ** 2 + 4 * b * c
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return [((a - d) - r) / (2 * c), ((a - d) + r) / (2 * c)]


@dataclass(frozen=True)
class BoundaryPoint:
    chart: Chart
    value: float

    @classmethod
    def line(cls, v):
        return cls(Chart.LINE, v)

    @classmethod
    def circle(cls, theta):
        return cls(Chart.CIRCLE, float(theta) % TWO_PI)

    def to_circle(self):
        if self.chart is Chart.CIRCLE:
            return self
        return BoundaryPoint.circle(line_to_angle(self.value))

    def to_line(self):
        if self.chart is Chart.LINE:
            return self
        return BoundaryPoint.line(angle_to_line(self.value))


def cayley(point):
    """Chart change line -> circle (circle -> line for circle input)."""
    return point.to_circle() if point.chart is Chart.LINE else point.to_line()


def cayley_inv(point):
    return cayley(point)


def line_to_angle(v):
    """``v = -cot(theta/2)`` solved for ``theta`` in ``[0, 2*pi)``; vectorised."""
    v = np.asarray(v, dtype=float)
    out = np.where(np.isinf(v), 0.0, 2.0 * np.arctan2(1.0, -v))
    return float(out) if out.ndim == 0 else out


def angle_to_line(theta):
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    with np.errstate(divide="ignore"):
        out = np.where(theta == 0.0, np.inf, -1.0 / np.tan(theta / 2.0))
    return float(out) if out.ndim == 0 else out


def angle_to_line_derivative(theta):
    """``dv/dtheta = (1 + v**2)/2 = 1/(2 sin(theta/2)**2)``."""
    theta = np.asarray(theta, dtype=float)
    out = 0.5 / np.sin(theta / 2.0) ** 2
    return float(out) if out.ndim == 0 else out


def halfplane_to_disc(w):
    w = np.asarray(w, dtype=complex)
    out = (w - 1j) / (w + 1j)
    return complex(out) if out.ndim == 0 else out


def disc_to_halfplane(z):
    z = np.asarray(z, dtype=complex)
    out = 1j * (1 + z) / (1 - z)
    return complex(out) if out.ndim == 0 else out


def compose_all(maps, exact=None):
    """Left-to-right product ``maps[0] @ maps[1] @ ...``."""
    if not maps:
        return MoebiusMap.identity(True if exact is None else exact)
    out = maps[0]
    for m in maps[1:]:
        out = out @ m
    return out
