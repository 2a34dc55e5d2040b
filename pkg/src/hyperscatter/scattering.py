"""Scattering operator on the quotient circles, its continuation, Eisenstein series.

The operator acting on functions on the quotient is discretized by a Nystrom rule
in invariant arclength. With ``q = 1/2 + lam`` its kernel is

    K(x, y) = sum_g kappa' rho(x)**q rho(g y)**q |x - g y|_chord**(-2q)

where ``kappa' = kappa(lam)/(2 pi)`` is the circle-kernel normalization. The
kernel singularity on the diagonal is removed by subtracting the reference
kernel ``kappa' ((L/pi) |sin(pi s/L)|)**(-2q)``, whose action is the exact
Fourier multiplier ``(L/2 pi)**(-2 lam) c_n(lam)``. The smooth remainder gets
the periodic trapezoid rule plus a zeta-function end correction on the diagonal.
Words of length <= 1 are summed explicitly, longer ones through the transfer
moments of :mod:`hyperscatter.bgrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .bgrid import BoundaryGrid, GridParams
from .boundary import (InteriorPoint, SpectralParam, disc_poisson,
                       functional_constant, j_symbol, kappa)
from .errors import FoldFailure, NearSingular, PoleAtInteger
from .moebius import TWO_PI, line_to_angle
from .schottky import rho_eval

NEAR_SINGULAR = 1e-10


def _check_lambda(lam, where):
    sp = SpectralParam.of(lam)
    if sp.is_nonpositive_integer_pole:
        raise PoleAtInteger(f"lambda = {sp.value} is a pole", where)
    return sp.value


@dataclass
class ScatteringOperator:
    lam: complex
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __matmul__(self, phi):
        return self.matrix @ phi

    def export(self, stem):
        """Write ``stem_real.csv``, ``stem_imag.csv`` and ``stem_meta.json``."""
        from .emit import write_json
        np.savetxt(f"{stem}_real.csv", self.matrix.real, delimiter=",", fmt="%.17g")
        np.savetxt(f"{stem}_imag.csv", self.matrix.imag, delimiter=",", fmt="%.17g")
        write_json(f"{stem}_meta.json", {"lambda": [self.lam.real, self.lam.imag], **self.metadata})


class Scattering:
    """Scattering operators for one Schottky group and one discretization."""

    def __init__(self, s, params=GridParams(), N=10, grid=None):
        self.s = s
        self.params = params
        self.N = N
        self.grid = grid if grid is not None else BoundaryGrid(s, params)

    @property
    def metadata(self):
        p = self.params
        return {"N": self.N, "Q": p.Q, "cheb": p.cheb, "rho_s0": p.s0, "rho_N": p.N_rho,
                "fit_degree": p.fit_degree, "nodes": self.grid.size,
                "circle_lengths": [c.length for c in self.grid.circles]}

    # -- kernel pieces ----------------------------------------------------

    def _short_words(self, lam):
        """Explicit sum over words of length <= 1; identity diagonal left out."""
        g = self.grid
        q = 0.5 + lam
        x = g.theta[:, None]
        table = self.s.words(1)
        ys = table.act(g.theta)
        dil = table.dilatation(g.theta)
        out = np.zeros((g.size, g.size), dtype=complex)
        for k in range(len(table)):
            chord = 2.0 * np.abs(np.sin(0.5 * (x - ys[k][None, :])))
            if k == 0:
                np.fill_diagonal(chord, 1.0)
            term = chord ** (-2 * q) * dil[k][None, :] ** q
            if k == 0:
                np.fill_diagonal(term, 0.0)
            out += term
        return out

    def _long_words(self, lam):
        """Words of length 2..N through the transfer moments."""
        g = self.grid
        out = np.zeros((g.size, g.size), dtype=complex)
        if self.N < 2:
            return out
        q = 0.5 + lam
        cheb = g.transfer_nodes
        mom = cheb.moments(q, g.theta, self.N - 1)
        x = g.theta[:, None]
        for a in self.s.letters:
            ga = self.s.letter_map(a)
            for b in self.s.letters:
                if b == -a:
                    continue
                t = cheb.points[b]
                img = ga.act_circle(t)
                G = ga.dilatation_circle(t)[None, :] ** q * \
                    (2.0 * np.abs(np.sin(0.5 * (x - img[None, :])))) ** (-2 * q)
                out += G @ mom[b]
        return out

    def _reference(self, lam, L, Q):
        """Circulant matrix of the reference multiplier on one circle of ``Q`` nodes."""
        n = np.abs(np.fft.fftfreq(Q, 1.0 / Q).astype(int))
        mult = j_symbol(lam, Q // 2)
        m = (L / TWO_PI) ** (-2 * lam) * mult.coeffs[n]
        r = np.fft.ifft(m)
        idx = (np.arange(Q)[:, None] - np.arange(Q)[None, :]) % Q
        return r[idx]

    def _diag_correction(self, lam, L, h, sl):
        """Zeta correction for the smooth remainder's diagonal; per node on one circle."""
        g = self.grid
        q = 0.5 + lam
        p = -2 * q
        kp = kappa(lam) / TWO_PI
        rho, r1, r2 = g.rho[sl], g.rho1[sl], g.rho2[sl]
        # theta(sigma) = x + a1 sigma + a2 sigma^2 + a3 sigma^3 with d theta/d sigma = rho(theta)
        a1 = rho
        a2 = 0.5 * rho * r1
        a3 = (rho * r1 ** 2 + rho ** 2 * r2) / 6.0
        c1 = a2 / rho
        c2 = (a3 - a1 ** 3 / 24.0) / rho
        A = 2 * c1
        B = c1 ** 2 + 2 * c2
        e1 = r1 / rho * a1
        e2 = r1 / rho * a2 + 0.5 * r2 / rho * a1 ** 2
        D1 = A - e1
        D2 = B - A * e1 + e1 ** 2 - e2
        f2 = 2 * kp * (-q * D2 + 0.5 * q * (q + 1) * D1 ** 2)
        fr2 = -kp * p * math.pi ** 2 / (3 * L ** 2)
        zeta = complex(mpmath.zeta(-p - 2))
        return -zeta * (f2 - fr2) * h ** (p + 3)

    # -- operators --------------------------------------------------------

    def matrix(self, lam):
        """Dense Nystrom matrix of ``S(lam)`` on the grid nodes."""
        lam = _check_lambda(lam, "scattering.scattering_matrix")
        g = self.grid
        q = 0.5 + lam
        kp = kappa(lam) / TWO_PI
        K = self._short_words(lam) + self._long_words(lam)
        K *= kp * (g.rho[:, None] ** q) * (g.rho[None, :] ** q)
        A = K * g.h[None, :]
        Q = self.params.Q
        for c, circle in enumerate(g.circles):
            sl = g.circle_slice(c)
            L = circle.length
            h = L / Q
            sig = g.s_local[sl][:, None] - g.s_local[sl][None, :]
            base = (L / math.pi) * np.abs(np.sin(math.pi * sig / L))
            np.fill_diagonal(base, 1.0)
            ref = kp * base ** (-2 * q)
            np.fill_diagonal(ref, 0.0)
            block = A[sl, sl] - h * ref + self._reference(lam, L, Q)
            block[np.diag_indices(Q)] += self._diag_correction(lam, L, h, sl)
            A[sl, sl] = block
        if not np.all(np.isfinite(A)):
            raise FloatingPointError("non-finite scattering matrix entries")
        return A

    def operator(self, lam):
        lam = complex(lam)
        return ScatteringOperator(lam, self.matrix(lam), dict(self.metadata))

    def apply(self, lam, phi):
        return self.matrix(lam) @ np.asarray(phi)


def scattering_matrix(sc, lam):
    return sc.operator(lam)


def scattering_apply(sc, lam, phi):
    return sc.apply(lam, phi)


def continue_s(sc, lam):
    """``-cot(pi lam)/(2 lam) * S(-lam)^{-1}`` for ``Re lam < 0``."""
    lam = complex(lam)
    if lam.real >= 0:
        raise ValueError("continuation is for Re(lambda) < 0")
    mirror = sc.matrix(-lam)
    sv = np.linalg.svd(mirror, compute_uv=False)
    smin = float(sv[-1])
    if smin < NEAR_SINGULAR:
        raise NearSingular(f"S(-lambda) has sigma_min = {smin:.3g}; candidate resonance", smin,
                           "scattering.continue_s")
    mat = functional_constant(lam) * np.linalg.inv(mirror)
    meta = dict(sc.metadata, sigma_min=smin, cond=float(sv[0] / smin), continued=True)
    return ScatteringOperator(lam, mat, meta)


def relative_norm(a, b):
    """``||a - b||_2 / ||b||_2`` for matrices."""
    return float(np.linalg.norm(a - b, 2) / np.linalg.norm(b, 2))


@dataclass
class ResonanceScanResult:
    lambdas: np.ndarray          # shape steps
    sigma_min: np.ndarray
    log_abs_det: np.ndarray
    cond: np.ndarray

    def rows(self):
        out = []
        for lam, a, b, c in zip(self.lambdas.ravel(), self.sigma_min.ravel(),
                                self.log_abs_det.ravel(), self.cond.ravel()):
            out.append((lam.real, lam.imag, a, b, c))
        return out


def resonance_scan(sc, re_range, im_range, steps):
    """``sigma_min``, ``log|det|`` and condition number of ``S(lam)`` on a grid.

    ``steps = (n_re, n_im)``; failing points are reported as NaN.
    """
    nr, ni = steps
    re = np.linspace(re_range[0], re_range[1], nr) if nr > 1 else np.array([re_range[0]])
    im = np.linspace(im_range[0], im_range[1], ni) if ni > 1 else np.array([im_range[0]])
    lams = re[:, None] + 1j * im[None, :]
    smin = np.full(lams.shape, np.nan)
    ldet = np.full(lams.shape, np.nan)
    cond = np.full(lams.shape, np.nan)
    for idx in np.ndindex(lams.shape):
        try:
            m = sc.matrix(lams[idx])
        except (PoleAtInteger, FloatingPointError):
            continue
        sv = np.linalg.svd(m, compute_uv=False)
        smin[idx] = sv[-1]
        ldet[idx] = float(np.sum(np.log(sv)))
        cond[idx] = sv[0] / sv[-1]
    return ResonanceScanResult(lams, smin, ldet, cond)


# -- invariant extension ------------------------------------------------------

@dataclass
class ExtensionField:
    angles: np.ndarray
    values: np.ndarray
    mask: np.ndarray        # True where the point was folded into the fundamental domain
    depth: np.ndarray       # word length used by the fold
    weight: complex
    N: int

    @property
    def covered_fraction(self):
        return float(self.mask.mean())


def fold(s, theta, N, grid=None):
    """Fold angles into the fundamental domain by at most ``N`` inverse letters.

    Returns ``(folded, derivative_of_fold, depth, ok)``.
    """
    grid = grid if grid is not None else BoundaryGrid.__new__(BoundaryGrid)
    from .bgrid import _fundamental_unshrunk
    fund = _fundamental_unshrunk(s)
    x = np.mod(np.atleast_1d(np.asarray(theta, dtype=float)), TWO_PI)
    deriv = np.ones_like(x)
    depth = np.zeros(x.shape, dtype=int)
    done = fund.contains(x)
    for _ in range(N):
        if done.all():
            break
        for a in s.letters:
            sel = ~done & s.letter_arc(a).contains(x)
            if np.any(sel):
                inv = s.letter_map(-a)
                deriv[sel] *= inv.dilatation_circle(x[sel])
                x[sel] = inv.act_circle(x[sel])
                depth[sel] += 1
        done = fund.contains(x)
    return x, deriv, depth, done


def extend_invariant(sc, phi, lam, N, M=4096, strict=False):
    """Equivariant extension ``rho**(lam-1/2) * phi(fold x)`` on an ``M``-point circle grid."""
    lam = complex(lam)
    theta = TWO_PI * np.arange(M) / M
    x, deriv, depth, ok = fold(sc.s, theta, N)
    if strict and not ok.all():
        raise FoldFailure(f"{int((~ok).sum())} grid points not folded within {N} letters",
                          "scattering.extend_invariant")
    vals = np.zeros(M, dtype=complex)
    if np.any(ok):
        base = sc.grid.interpolate(phi, x[ok])
        # rho(x) = rho(fold x) / fold'(x)
        rho_hat = rho_eval(sc.s, x[ok], sc.params.s0, sc.params.N_rho, check=False)
        vals[ok] = (rho_hat / deriv[ok]) ** (lam - 0.5) * base
    return ExtensionField(theta, vals, ok, depth, lam, N)


# -- Eisenstein series ----------------------------------------------------------

class Eisenstein:
    """``E(phi, lam)(p) = sum_g int_F P_lam(p, g b) g'(b)**q rho(b)**(lam-1/2) phi(b) db``.

    ``phi`` is given by nodal values on the grid. ``method="transfer"`` sums words
    of length <= ``K`` explicitly and the rest, up to length ``N``, through transfer
    moments: for ``g = u g~`` with ``|u| = K`` the factor ``P(p, u z) u'(z)**q`` is
    smooth in ``z`` on the arc of the first letter of ``g~`` for any interior ``p``.
    ``method="words"`` sums ``P_lam(g p, b)`` word by word (independent check).
    """

    def __init__(self, sc, phi, lam, N=None, method="transfer", K=3):
        self.sc = sc
        self.lam = complex(lam)
        self.N = sc.N if N is None else N
        self.method = method
        g = sc.grid
        nodes, w = g.gauss_nodes()
        rho = rho_eval(sc.s, nodes, sc.params.s0, sc.params.N_rho, check=False)
        self.nodes = nodes
        self.f = w * rho ** (self.lam - 0.5) * g.interpolate(phi, nodes)
        q = 0.5 + self.lam
        if method == "transfer":
            K = min(K, self.N)
            short = sc.s.words(K)
            self.short_pts = short.act(nodes)
            self.short_f = short.dilatation(nodes) ** q * self.f[None, :]
            pts, wts = [], []
            if self.N > K:
                cheb = g.transfer_nodes
                mom = cheb.moments(q, nodes, self.N - K)
                top = short.select(short.lengths == K)
                last = top.last
                for c in sc.s.letters:
                    keep = last != -c
                    sub = top.select(keep)
                    t = cheb.points[c]
                    pts.append(sub.act(t).ravel())
                    wts.append((sub.dilatation(t) ** q * (mom[c] @ self.f)[None, :]).ravel())
            self.tail_pts = np.concatenate(pts) if pts else np.zeros(0)
            self.tail_w = np.concatenate(wts) if wts else np.zeros(0, dtype=complex)
        elif method != "words":
            raise ValueError(f"unknown method {method!r}")

    def __call__(self, p):
        z = p.to_disc().value
        lam = self.lam
        if self.method == "transfer":
            head = np.sum(disc_poisson(lam, z, self.short_pts) * self.short_f)
            return complex(head + disc_poisson(lam, z, self.tail_pts) @ self.tail_w)
        from .schottky import _word_tables
        total = 0j
        for table in _word_tables(self.sc.s, self.N):
            gz = (table.alpha * z + table.beta) / (table.gamma * z + table.delta)
            for lo in range(0, len(gz), 4096):
                total += (disc_poisson(lam, gz[lo:lo + 4096, None], self.nodes[None, :]) @ self.f).sum()
        return complex(total)


def eisenstein(sc, phi, lam, p, N=None, method="transfer"):
    return Eisenstein(sc, phi, lam, N, method)(p)


def eisenstein_constant(lam):
    """``sqrt(2) Gamma(1/2 - lam) / Gamma(-lam)``."""
    lam = complex(lam)
    return complex(math.sqrt(2) * mpmath.gamma(0.5 - lam) / mpmath.gamma(-lam))


def eisenstein_functional_check(sc, phi, lam, points, tol=5e-2, N=None):
    """Compare ``E(phi, lam)`` with ``C(lam) E(S(lam) phi, -lam)`` at interior points."""
    lam = complex(lam)
    psi = sc.apply(lam, phi)
    left = Eisenstein(sc, phi, lam, N)
    right = Eisenstein(sc, psi, -lam, N)
    C = eisenstein_constant(lam)
    lhs = np.array([left(p) for p in points])
    rhs = np.array([C * right(p) for p in points])
    scale = np.max(np.abs(lhs))
    dev = float(np.max(np.abs(lhs - rhs)) / scale) if scale > 0 else float(np.max(np.abs(rhs)))
    return {"lambda": lam, "lhs": lhs, "rhs": rhs, "relative_deviation": dev, "passed": dev <= tol}


# -- collar coordinates ---------------------------------------------------------

def rho_line(s, v, s0=1.0, N=10):
    """Density in the line chart: ``rho_circle(theta) * dv/d theta``."""
    theta = line_to_angle(v)
    return float(rho_eval(s, theta, s0, N, check=False)) * (1.0 + v * v) / 2.0


def collar_map(r, b, rho, h=1e-5):
    """Half-plane point at collar parameter ``r`` over the real boundary point ``b``.

    ``rho`` is a callable on the real line; its derivative is taken by central differences.
    """
    r0 = rho(b)
    d = (rho(b + h) - rho(b - h)) / (2 * h)
    den = 1.0 + 0.25 * r * r * d * d
    return InteriorPoint.halfplane(b - 0.5 * r * r * r0 * d / den, r * r0 / den)


def collar_map_for(s, r, b, s0=1.0, N=10, check=True):
    if check:
        from .schottky import _check_not_in_limit
        _check_not_in_limit(s, np.atleast_1d(line_to_angle(b)), N)
    return collar_map(r, b, lambda v: rho_line(s, v, s0, N))


def act_halfplane(g, p):
    w = p.to_halfplane().value
    return InteriorPoint.halfplane(*_split(g.act_halfplane(w)))


def _split(w):
    return w.real, w.imag
