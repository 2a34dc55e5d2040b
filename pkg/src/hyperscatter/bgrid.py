"""Quadrature grid on the quotient circles and deep-word transfer moments.

The quotient of the ordinary set is a union of circles obtained by gluing the
fundamental arcs end to end. On each circle we use the invariant arclength
``ds = d theta / rho`` and place equally spaced nodes, so periodic trapezoid
rules and FFT interpolation apply.

Sums over long words ``g`` of ``g'(y)**q * F(g y)`` are evaluated with a
Chebyshev transfer scheme: a word starting with letter ``b`` lands in the arc
``D_b``, so ``F`` is replaced by its polynomial interpolant on ``D_b`` and the
remaining word sum becomes a matrix recursion independent of ``F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import Chebyshev

from .errors import FoldFailure
from .moebius import TWO_PI
from .schottky import rho_eval, rho_with_derivatives


@dataclass(frozen=True)
class GridParams:
    Q: int = 256            # nodes per quotient circle
    cheb: int = 20          # interpolation nodes per arc for deep words
    s0: float = 1.0         # exponent of the rho series
    N_rho: int = 10         # word length of the rho series
    fit_degree: int = 48    # Chebyshev degree of 1/rho on each fundamental arc
    panels: int = 8         # Gauss-Legendre panels per fundamental arc
    panel_nodes: int = 12

    def refined(self):
        """One notch finer in every discretization parameter."""
        return GridParams(self.Q * 2, self.cheb + 8, self.s0, self.N_rho + 2, self.fit_degree,
                          self.panels * 2, self.panel_nodes)


@dataclass(frozen=True)
class Circle:
    arcs: tuple         # fundamental-arc indices in gluing order
    offsets: tuple      # s-coordinate where each arc starts
    length: float


class BoundaryGrid:
    """Quotient circles of a Schottky group with equispaced invariant-arclength nodes."""

    def __init__(self, s, params=GridParams()):
        self.s = s
        self.params = params
        self.fund = _fundamental_unshrunk(s)
        self.arcs = self.fund.arcs
        self._fit_inverse_rho()
        self.circles = self._glue()
        self._place_nodes()

    # -- construction -----------------------------------------------------

    def _fit_inverse_rho(self):
        p = self.params
        self.inv_rho = []
        self.cum = []
        for arc in self.arcs:
            f = Chebyshev.interpolate(
                lambda off, a=arc: 1.0 / rho_eval(self.s, a.start + off, p.s0, p.N_rho, check=False),
                p.fit_degree, domain=[0.0, arc.length])
            self.inv_rho.append(f)
            self.cum.append(f.integ(lbnd=0.0))
        self.arc_slen = np.array([float(c(a.length)) for c, a in zip(self.cum, self.arcs)])

    def _glue(self):
        nxt, prv = self.fund.next_letter, self.fund.prev_letter
        succ = {k: prv.index(-nxt[k]) for k in range(len(self.arcs))}
        seen, circles = set(), []
        for k0 in range(len(self.arcs)):
            if k0 in seen:
                continue
            order, k = [], k0
            while k not in seen:
                seen.add(k)
                order.append(k)
                k = succ[k]
            offs = np.concatenate([[0.0], np.cumsum(self.arc_slen[order])])
            circles.append(Circle(tuple(order), tuple(offs[:-1]), float(offs[-1])))
        self.succ = succ
        return tuple(circles)

    def _place_nodes(self):
        Q = self.params.Q
        thetas, arcid, circ, sloc, h = [], [], [], [], []
        for c, circle in enumerate(self.circles):
            step = circle.length / Q
            svals = (np.arange(Q) + 0.5) * step
            for pos, (k, off) in enumerate(zip(circle.arcs, circle.offsets)):
                hi = off + self.arc_slen[k]
                sel = (svals >= off) & (svals < hi) if pos < len(circle.arcs) - 1 else svals >= off
                thetas.append(self.arcs[k].start + self._invert(k, svals[sel] - off))
                arcid.append(np.full(sel.sum(), k))
                sloc.append(svals[sel])
            circ.append(np.full(Q, c))
            h.append(np.full(Q, step))
        self.theta = np.mod(np.concatenate(thetas), TWO_PI)
        self.arc_of = np.concatenate(arcid)
        self.circle_of = np.concatenate(circ)
        self.s_local = np.concatenate(sloc)
        self.h = np.concatenate(h)
        rho, r1, r2 = rho_with_derivatives(self.s, self.theta, self.params.s0, self.params.N_rho)
        self.rho, self.rho1, self.rho2 = rho, r1, r2

    def _invert(self, k, target):
        """Offsets within arc ``k`` whose invariant length from the arc start equals ``target``."""
        cum, inv, length = self.cum[k], self.inv_rho[k], self.arcs[k].length
        off = np.clip(target / self.arc_slen[k] * length, 0.0, length)
        for _ in range(50):
            step = (cum(off) - target) / inv(off)
            off = np.clip(off - step, 0.0, length)
            if np.max(np.abs(step), initial=0.0) < 1e-15:
                break
        return off

    # -- queries ----------------------------------------------------------

    @property
    def size(self):
        return len(self.theta)

    def circle_slice(self, c):
        Q = self.params.Q
        return slice(c * Q, (c + 1) * Q)

    def locate(self, theta):
        """Fundamental-arc index for each angle (``-1`` outside the fundamental domain)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.full(theta.shape, -1)
        for k, arc in enumerate(self.arcs):
            out[(out < 0) & arc.contains(theta, 1e-13)] = k
        return out

    def theta_to_s(self, theta):
        """``(circle, s)`` for angles inside the fundamental domain."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        k = self.locate(theta)
        if np.any(k < 0):
            raise FoldFailure("angle outside the fundamental domain", "bgrid.theta_to_s")
        circ = np.empty(theta.shape, dtype=int)
        sv = np.empty(theta.shape)
        for c, circle in enumerate(self.circles):
            for kk, off in zip(circle.arcs, circle.offsets):
                sel = k == kk
                if np.any(sel):
                    local = np.clip(self.arcs[kk].offset(theta[sel]), 0.0, self.arcs[kk].length)
                    circ[sel] = c
                    sv[sel] = off + self.cum[kk](local)
        return circ, sv

    def interpolate(self, values, theta):
        """Trigonometric interpolation (in ``s``) of nodal values at fundamental-domain angles."""
        values = np.asarray(values, dtype=complex)
        circ, sv = self.theta_to_s(theta)
        out = np.empty(sv.shape, dtype=complex)
        Q = self.params.Q
        for c, circle in enumerate(self.circles):
            sel = circ == c
            if not np.any(sel):
                continue
            coef = np.fft.fft(values[self.circle_slice(c)]) / Q
            n = np.fft.fftfreq(Q, 1.0 / Q)
            weight = np.where(np.abs(n) == Q // 2, 0.5, 1.0)
            phase = TWO_PI * (sv[sel, None] - 0.5 * circle.length / Q) / circle.length
            # Nyquist mode split evenly between +Q/2 and -Q/2
            out[sel] = (coef[None, :] * weight * (np.exp(1j * n * phase)
                                                  + np.where(np.abs(n) == Q // 2, np.exp(-1j * n * phase), 0.0))
                        ).sum(axis=1)
        return out

    def trig_function(self, modes):
        """Nodal samples of ``sum_k a_k cos(2 pi k s / L) + b_k sin(...)`` on every circle.

        ``modes`` is a list of ``(k, a_k, b_k)``.
        """
        out = np.zeros(self.size)
        for c, circle in enumerate(self.circles):
            sl = self.circle_slice(c)
            t = TWO_PI * self.s_local[sl] / circle.length
            for k, a, b in modes:
                out[sl] += a * np.cos(k * t) + b * np.sin(k * t)
        return out

    def trig_derivative(self, modes):
        """``d/ds`` of :meth:`trig_function` (equals ``rho * d/d theta``)."""
        out = np.zeros(self.size)
        for c, circle in enumerate(self.circles):
            sl = self.circle_slice(c)
            w = TWO_PI / circle.length
            t = w * self.s_local[sl]
            for k, a, b in modes:
                out[sl] += k * w * (-a * np.sin(k * t) + b * np.cos(k * t))
        return out

    def gauss_nodes(self):
        """Composite Gauss-Legendre nodes and ``d theta`` weights over the fundamental arcs."""
        x, w = np.polynomial.legendre.leggauss(self.params.panel_nodes)
        nodes, weights = [], []
        for arc in self.arcs:
            edges = np.linspace(0.0, arc.length, self.params.panels + 1)
            a, b = edges[:-1, None], edges[1:, None]
            nodes.append((arc.start + 0.5 * (b - a) * x + 0.5 * (a + b)).ravel())
            weights.append((0.5 * (b - a) * w).ravel())
        return np.mod(np.concatenate(nodes), TWO_PI), np.concatenate(weights)

    @cached_property
    def transfer_nodes(self):
        return ChebyshevArcs(self.s, self.params.cheb)


def _fundamental_unshrunk(s):
    from dataclasses import replace

    from .schottky import fundamental_arcs
    return fundamental_arcs(replace(s, collar_margin=0.0, _cache={}))


class ChebyshevArcs:
    """Chebyshev points on every arc ``D_b`` and barycentric interpolation."""

    def __init__(self, s, R):
        self.s = s
        self.R = R
        j = np.arange(R)
        self.unit = 0.5 * (1.0 - np.cos((2 * j + 1) * math.pi / (2 * R)))
        self.bary = (-1.0) ** j * np.sin((2 * j + 1) * math.pi / (2 * R))
        self.letters = s.letters
        self.points = {a: s.letter_arc(a).start + s.letter_arc(a).length * self.unit for a in self.letters}

    def lagrange(self, b, theta):
        """Matrix ``L[r, k] = ell_r(theta_k)`` for the nodes on ``D_b``."""
        arc = self.s.letter_arc(b)
        x = np.mod(np.atleast_1d(theta) - arc.start, TWO_PI) / arc.length
        diff = x[None, :] - self.unit[:, None]
        hit = diff == 0.0
        diff = np.where(hit, 1.0, diff)
        terms = self.bary[:, None] / diff
        L = terms / terms.sum(axis=0, keepdims=True)
        cols = hit.any(axis=0)
        if np.any(cols):
            L[:, cols] = hit[:, cols].astype(float)
        return L

    def moments(self, q, ys, N):
        """``m[b][r, j] ~ sum over words g starting with b, |g| <= N, of g'(y_j)**q ell_r(g y_j)``."""
        if N < 1:
            return {b: np.zeros((self.R, len(ys)), dtype=complex) for b in self.letters}
        base, T = {}, {}
        for b in self.letters:
            g = self.s.letter_map(b)
            base[b] = g.dilatation_circle(ys)[None, :] ** q * self.lagrange(b, g.act_circle(ys))
            for c in self.letters:
                if c == -b:
                    continue
                t = self.points[c]
                T[b, c] = g.dilatation_circle(t)[None, :] ** q * self.lagrange(b, g.act_circle(t))
        m = {b: base[b].astype(complex) for b in self.letters}
        for _ in range(N - 1):
            m = {b: base[b] + sum(T[b, c] @ m[c] for c in self.letters if c != -b) for b in self.letters}
        return m
