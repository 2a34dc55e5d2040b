"""Real Schottky groups: words, limit-set covers, fundamental arcs, Poincare sums.

Conventions
-----------
Generators are numbered ``1..n``. The letter ``+i`` stands for ``g_i`` and
``-i`` for its inverse. Each letter ``a`` owns a closed boundary arc ``D_a``
(``D_{+i}`` is ``I_i^+``, ``D_{-i}`` is ``I_i^-``) and ``g_a`` maps the
closure of the complement of ``D_{-a}`` onto ``D_a``. A word
``(a1, ..., al)`` is the product ``g_{a1} ... g_{al}``. All geometry is done
in the circle chart (angles, ``d theta``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .errors import (BudgetExceeded, NoConvergence, OverlappingArcs,
                     PingPongViolation, PointInLimitSet)
from .moebius import TWO_PI, BoundaryPoint, Chart, MoebiusMap, angle_to_line_derivative

DEFAULT_WORD_CAP = 200_000


@dataclass(frozen=True)
class Arc:
    """Closed counter-clockwise arc ``[start, start + length]`` of the circle."""

    start: float
    length: float

    @classmethod
    def centered(cls, center, halfwidth):
        return cls((center - halfwidth) % TWO_PI, 2.0 * halfwidth)

    @property
    def end(self):
        return (self.start + self.length) % TWO_PI

    @property
    def center(self):
        return (self.start + 0.5 * self.length) % TWO_PI

    def offset(self, theta):
        """Counter-clockwise distance from ``start`` to ``theta``, in ``[0, 2 pi)``."""
        return np.mod(np.asarray(theta, dtype=float) - self.start, TWO_PI)

    def contains(self, theta, tol=0.0):
        off = self.offset(theta)
        return (off <= self.length + tol) | (off >= TWO_PI - tol)

    def image(self, m):
        """Image under an orientation-preserving map (an arc again)."""
        a = m.act_circle(self.start)
        b = m.act_circle(self.start + self.length)
        return Arc(a, float(np.mod(b - a, TWO_PI)))

    def shrink(self, margin):
        return Arc((self.start + margin) % TWO_PI, self.length - 2.0 * margin)


def letters_for(n):
    """Fixed letter order ``1, -1, 2, -2, ...`` used for every enumeration."""
    out = []
    for i in range(1, n + 1):
        out += [i, -i]
    return out


def _three_point_disc(z, w):
    """Complex 2x2 matrix of the Moebius map sending ``z[k]`` to ``w[k]``."""

    def to_std(p):
        p1, p2, p3 = p
        return np.array([[p3 - p2, -p1 * (p3 - p2)], [p3 - p1, -p2 * (p3 - p1)]])

    return np.linalg.solve(to_std(w), to_std(z))


def pairing_map(source, target):
    """The map sending the exterior of ``source`` onto the interior of ``target``.

    Endpoints go ``end(source) -> start(target)``, ``start(source) -> end(target)``,
    and the midpoint of the exterior goes to the midpoint of ``target``.
    """
    zs = np.exp(1j * np.array([source.end, source.start, source.center + math.pi]))
    ws = np.exp(1j * np.array([target.start, target.end, target.center]))
    h = _three_point_disc(zs, ws)
    cay = np.array([[1j, 1j], [-1.0, 1.0]])
    g = cay @ h @ np.linalg.inv(cay)
    g = g / np.sqrt(np.linalg.det(g))
    if abs(g[0, 0].real) < abs(g[0, 0].imag) and abs(g[0, 1].real) < abs(g[0, 1].imag):
        g = g * 1j
    if np.max(np.abs(g.imag)) > 1e-9 * np.max(np.abs(g)):
        raise PingPongViolation("arcs do not define a real Moebius pairing", "schottky.pairing_map")
    g = g.real
    return MoebiusMap.normalized(g[0, 0], g[0, 1], g[1, 0], g[1, 1])


@dataclass(frozen=True)
class SchottkyData:
    """Generators ``g_1..g_n`` with arcs ``I_i^-`` (``minus``) and ``I_i^+`` (``plus``)."""

    generators: tuple
    minus: tuple
    plus: tuple
    word_cap: int = DEFAULT_WORD_CAP
    collar_margin: float = 0.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_arcs(cls, pairs, **kw):
        """Build generators from ``[(I_minus, I_plus), ...]`` so that arcs are paired exactly."""
        gens = tuple(pairing_map(m, p) for m, p in pairs)
        return cls(gens, tuple(m for m, _ in pairs), tuple(p for _, p in pairs), **kw)

    @classmethod
    def symmetric(cls, radius, n=2, **kw):
        """``2n`` arcs of angular half-width ``radius`` centred at ``k*pi/n``; arc k pairs with k+n."""
        centers = [k * math.pi / n for k in range(2 * n)]
        pairs = [(Arc.centered(centers[k + n], radius), Arc.centered(centers[k], radius))
                 for k in range(n)]
        return cls.from_arcs(pairs, **kw)

    @classmethod
    def cyclic(cls, radius, **kw):
        """One hyperbolic generator with fixed points at angles 0 and pi."""
        return cls.symmetric(radius, n=1, **kw)

    @property
    def n(self):
        return len(self.generators)

    @property
    def letters(self):
        return letters_for(self.n)

    def letter_map(self, a):
        g = self.generators[abs(a) - 1]
        return g if a > 0 else g.inverse()

    def letter_arc(self, a):
        return self.plus[a - 1] if a > 0 else self.minus[-a - 1]

    def all_arcs(self):
        return [self.letter_arc(a) for a in self.letters]

    # -- validation -------------------------------------------------------

    def validate(self, tol=1e-9):
        """Check disjointness and ping-pong; return diagnostics.

        Raises OverlappingArcs or PingPongViolation.
        """
        arcs = sorted(self.all_arcs(), key=lambda a: a.start)
        gaps = []
        for i, arc in enumerate(arcs):
            nxt = arcs[(i + 1) % len(arcs)]
            gap = float(np.mod(nxt.start - arc.start, TWO_PI)) - arc.length
            if arc.length <= 0 or gap <= 0:
                raise OverlappingArcs(f"arcs starting at {arc.start:.6g} and {nxt.start:.6g} overlap",
                                      "schottky.validate")
            gaps.append(gap)
        if abs(sum(a.length for a in arcs) + sum(gaps) - TWO_PI) > 1e-9:
            raise OverlappingArcs("arcs wrap around the circle more than once", "schottky.validate")
        ratios = []
        paired = True
        for a in self.letters:
            g = self.letter_map(a)
            src, dst = self.letter_arc(-a), self.letter_arc(a)
            outside = src.end + (TWO_PI - src.length) * np.linspace(0.0, 1.0, 65)
            img = g.act_circle(outside)
            if not np.all(dst.contains(img, tol)):
                raise PingPongViolation(f"letter {a} does not map the exterior of its source arc "
                                        "into its target arc", "schottky.validate")
            if abs(_angdist(img[0], dst.start)) > tol or abs(_angdist(img[-1], dst.end)) > tol:
                paired = False
            others = [self.letter_arc(b) for b in self.letters if b != -a]
            pts = np.concatenate([o.start + o.length * np.linspace(0.0, 1.0, 33) for o in others]) \
                if others else outside
            ratios.append(float(np.max(g.dilatation_circle(pts))))
        return {"gaps": gaps, "min_gap": min(gaps), "contraction": ratios,
                "paired_exactly": paired}

    def canonical(self):
        """Same group with each ``I_i^+`` replaced by the exact image ``g_i(ext I_i^-)``."""
        plus = tuple(_image_arc_of_exterior(g, m) for g, m in zip(self.generators, self.minus))
        return SchottkyData(self.generators, self.minus, plus, self.word_cap, self.collar_margin)

    # -- words ------------------------------------------------------------

    def word_count(self, N):
        m = 2 * self.n
        return 1 + sum(m * (m - 1) ** (l - 1) for l in range(1, N + 1))

    def words(self, N, cap=None):
        """Word table of all reduced words of length <= N (cached)."""
        key = ("words", N)
        if key not in self._cache:
            cap = self.word_cap if cap is None else cap
            count = self.word_count(N)
            if count > cap:
                raise BudgetExceeded(f"{count} words of length <= {N} exceed the cap {cap}",
                                     "schottky.enumerate_words")
            self._cache[key] = WordTable.build(self, N)
        return self._cache[key]

    # -- cached geometry --------------------------------------------------

    @cached_property
    def fundamental(self):
        return fundamental_arcs(self)


def _angdist(x, y):
    return (x - y + math.pi) % TWO_PI - math.pi


def _image_arc_of_exterior(g, src):
    start = float(g.act_circle(src.end))
    end = float(g.act_circle(src.start))
    return Arc(start, float(np.mod(end - start, TWO_PI)))


class WordTable:
    """All reduced words up to a length, in (length, lexicographic) order.

    ``mats[k]`` is the 2x2 float matrix of word ``k``; ``letters[k, :lengths[k]]``
    are its letters, ``first``/``last`` the end letters (0 for the identity).
    """

    def __init__(self, letters, lengths, mats):
        self.letters = letters
        self.lengths = lengths
        self.mats = mats
        a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
        self.alpha = 0.5 * ((a + d) + 1j * (b - c))
        self.beta = 0.5 * ((a - d) - 1j * (b + c))
        self.gamma = 0.5 * ((a - d) + 1j * (b + c))
        self.delta = 0.5 * ((a + d) - 1j * (b - c))

    @classmethod
    def build(cls, s, N):
        levels = list(iter_levels(s, N))
        width = max(N, 1)
        letters = np.concatenate([np.pad(lv.letters, ((0, 0), (0, width - lv.letters.shape[1])))
                                  for lv in levels])
        lengths = np.concatenate([lv.lengths for lv in levels])
        mats = np.concatenate([lv.mats for lv in levels])
        return cls(letters, lengths, mats)

    def __len__(self):
        return len(self.lengths)

    @property
    def first(self):
        return self.letters[:, 0]

    @property
    def last(self):
        idx = np.maximum(self.lengths - 1, 0)
        return self.letters[np.arange(len(self)), idx]

    def word(self, k):
        return tuple(int(x) for x in self.letters[k, :self.lengths[k]])

    def select(self, mask):
        return WordTable(self.letters[mask], self.lengths[mask], self.mats[mask])

    def act(self, theta):
        """Images ``w(theta)``, shape ``(words, points)``."""
        z = np.exp(1j * np.atleast_1d(np.asarray(theta, dtype=float)))[None, :]
        w = (self.alpha[:, None] * z + self.beta[:, None]) / (self.gamma[:, None] * z + self.delta[:, None])
        return np.mod(np.angle(w), TWO_PI)

    def arc_images(self, arc):
        """Images of a short arc under every word as ``(starts, lengths)``; images must stay below pi."""
        a = self.act(arc.start)[:, 0]
        z1, z2 = np.exp(1j * arc.start), np.exp(1j * (arc.start + arc.length))
        # chord of the image from the distortion identity; stays accurate for tiny arcs
        chord = abs(z1 - z2) / (np.abs(self.gamma * z1 + self.delta) * np.abs(self.gamma * z2 + self.delta))
        length = 2.0 * np.arcsin(np.minimum(chord / 2.0, 1.0))
        return a, length

    def dilatation(self, theta):
        """``w'(theta)``, shape ``(words, points)``."""
        z = np.exp(1j * np.atleast_1d(np.asarray(theta, dtype=float)))[None, :]
        return 1.0 / np.abs(self.gamma[:, None] * z + self.delta[:, None]) ** 2

    def dilatation_log_derivs(self, theta):
        """``u = |gamma z + delta|^2`` and ``u'/u``, ``u''/u`` for each word and point."""
        z = np.exp(1j * np.atleast_1d(np.asarray(theta, dtype=float)))[None, :]
        cross = (self.gamma * np.conj(self.delta))[:, None] * z
        u = (np.abs(self.gamma) ** 2 + np.abs(self.delta) ** 2)[:, None] + 2.0 * cross.real
        return u, -2.0 * cross.imag / u, -2.0 * cross.real / u


def iter_levels(s, N):
    """Yield one :class:`WordTable` per word length ``0..N`` without any cap.

    Order inside a level is lexicographic in the letter order, so concatenating
    levels gives the fixed (length, lexicographic) summation order.
    """
    alphabet = np.array(s.letters)
    gens = np.array([s.letter_map(int(a)).as_array() for a in alphabet], dtype=float)
    letters = np.zeros((1, 0), dtype=np.int64)
    mats = np.eye(2)[None]
    yield WordTable(np.zeros((1, 1), dtype=np.int64), np.zeros(1, dtype=np.int64), mats)
    for level in range(1, N + 1):
        last = letters[:, -1] if level > 1 else np.zeros(1, dtype=np.int64)
        keep = last[:, None] != -alphabet[None, :]
        parent, which = np.nonzero(keep)
        # products of det-one factors; recomputing det would only add cancellation error
        mats = np.einsum("kij,kjl->kil", mats[parent], gens[which])
        letters = np.concatenate([letters[parent], alphabet[which][:, None]], axis=1)
        yield WordTable(letters, np.full(len(parent), level, dtype=np.int64), mats)


def enumerate_words(s, N):
    """List of ``(word, MoebiusMap)`` for all reduced words of length <= N."""
    if N < 0:
        raise ValueError("N must be non-negative")
    table = s.words(N)
    return [(table.word(k), MoebiusMap.normalized(*table.mats[k].ravel())) for k in range(len(table))]


# -- limit set covers ---------------------------------------------------------

@dataclass(frozen=True)
class IntervalCover:
    depth: int
    arcs: tuple

    @property
    def total_length(self):
        return float(sum(a.length for a in self.arcs))

    def contains(self, theta):
        hit = np.zeros(np.shape(theta), dtype=bool)
        for a in self.arcs:
            hit |= a.contains(theta)
        return hit

    def rows(self):
        return [(self.depth, a.start, a.start + a.length) for a in self.arcs]


def limit_cover(s, depth):
    """Arcs ``u(D_a)`` over reduced words ``u`` of length ``depth-1`` with ``a`` not cancelling."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    table = s.words(depth - 1).select(s.words(depth - 1).lengths == depth - 1)
    last = table.last if depth > 1 else np.zeros(len(table), dtype=np.int64)
    starts, lengths = [], []
    for a in s.letters:
        st, ln = table.arc_images(s.letter_arc(a))
        ok = last != -a
        starts.append(np.where(ok, st, np.nan))
        lengths.append(ln)
    starts, lengths = np.stack(starts, axis=1), np.stack(lengths, axis=1)
    keep = ~np.isnan(starts)
    arcs = tuple(Arc(float(x), float(y)) for x, y in zip(starts[keep], lengths[keep]))
    return IntervalCover(depth, arcs)


# -- fundamental domain -------------------------------------------------------

@dataclass(frozen=True)
class FundamentalArcs:
    arcs: tuple
    # letter owning the D-arc that follows each fundamental arc (counter-clockwise)
    next_letter: tuple
    prev_letter: tuple

    @property
    def total_length(self):
        return float(sum(a.length for a in self.arcs))

    def contains(self, theta):
        hit = np.zeros(np.shape(theta), dtype=bool)
        for a in self.arcs:
            hit |= a.contains(theta)
        return hit


def fundamental_arcs(s):
    """Closure of the circle minus the open D-arcs, shrunk by ``s.collar_margin``."""
    items = sorted(((s.letter_arc(a), a) for a in s.letters), key=lambda t: t[0].start)
    arcs, nxt, prv = [], [], []
    for i, (arc, a) in enumerate(items):
        after, b = items[(i + 1) % len(items)]
        start = arc.end
        length = float(np.mod(after.start - start, TWO_PI))
        gap = Arc(start, length)
        if s.collar_margin:
            gap = gap.shrink(s.collar_margin * length)
        arcs.append(gap)
        nxt.append(b)
        prv.append(a)
    return FundamentalArcs(tuple(arcs), tuple(nxt), tuple(prv))


# -- Poincare sums and rho ----------------------------------------------------

def _as_angle(b):
    if isinstance(b, BoundaryPoint):
        return b.to_circle().value
    return b


def _check_not_in_limit(s, theta, N, max_depth=6):
    """Reject points inside the depth-``min(N+1, max_depth)`` limit cover."""
    if np.any(limit_cover(s, min(N + 1, max_depth)).contains(theta)):
        raise PointInLimitSet("point lies in the limit-set cover", "schottky.poincare")


def _word_tables(s, N):
    """Stored table when it fits the cap, else a stream of per-level tables."""
    if s.word_count(N) <= s.word_cap:
        return [s.words(N)]
    return iter_levels(s, N)


def _stream_sum(s, N, theta, term, nout=1, budget=4_000_000):
    """Sum ``term(table, theta_chunk)`` over all words with bounded memory.

    ``term`` returns a tuple of ``(words, points)`` arrays; each is reduced over words.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = [np.zeros(theta.shape, dtype=complex) for _ in range(nout)]
    for table in _word_tables(s, N):
        step = max(1, budget // max(len(table), 1))
        for lo in range(0, len(theta), step):
            parts = term(table, theta[lo:lo + step])
            for acc, part in zip(out, parts):
                acc[lo:lo + step] += part.sum(axis=0)
    return out


def poincare_partial(s, exponent, b, N, check=True):
    """``sum_{|w| <= N} w'(b)**exponent`` in the circle chart (fixed summation order)."""
    theta = _as_angle(b)
    if check and N >= 1:
        _check_not_in_limit(s, np.atleast_1d(theta), N)
    (total,) = _stream_sum(s, N, theta, lambda tb, th: (tb.dilatation(th) ** exponent,))
    if np.all(total.imag == 0):
        total = total.real
    return total[0] if np.ndim(theta) == 0 else total


def rho_eval(s, b, s0=1.0, N=10, check=True):
    """Invariant density ``(sum_w w'(b)**s0)**(-1/s0)``.

    For a line-chart point the value is converted so that ``rho(g b) = g'(b) rho(b)``
    holds with the line-chart derivative.
    """
    if isinstance(b, BoundaryPoint):
        theta = b.to_circle().value
        val = float(rho_eval(s, theta, s0, N, check))
        if b.chart is Chart.LINE:
            val *= angle_to_line_derivative(theta)
        return val
    theta = np.asarray(b, dtype=float)
    if check and N >= 1:
        _check_not_in_limit(s, np.atleast_1d(theta), N)
    (total,) = _stream_sum(s, N, theta, lambda tb, th: (tb.dilatation(th) ** s0,))
    out = total.real ** (-1.0 / s0)
    return float(out[0]) if theta.ndim == 0 else out


def rho_with_derivatives(s, theta, s0=1.0, N=10):
    """``rho``, ``d rho/d theta`` and ``d^2 rho/d theta^2`` from the word sum."""

    def term(tb, th):
        u, l1, l2 = tb.dilatation_log_derivs(th)
        w = u ** (-s0)
        return w, -s0 * w * l1, w * (s0 * (s0 + 1) * l1 ** 2 - s0 * l2)

    S, S1, S2 = (x.real for x in _stream_sum(s, N, theta, term, nout=3))
    p = -1.0 / s0
    rho = S ** p
    d1 = p * S ** (p - 1) * S1
    d2 = p * (p - 1) * S ** (p - 2) * S1 ** 2 + p * S ** (p - 1) * S2
    return rho, d1, d2


# -- critical exponent --------------------------------------------------------

def _cylinder_lengths(s, d):
    """Lengths of all depth-``d`` cylinders ``u(D_a)``, keyed by the word ``u + (a,)``."""
    table = s.words(d - 1).select(s.words(d - 1).lengths == d - 1)
    out = {}
    for a in s.letters:
        _, ln = table.arc_images(s.letter_arc(a))
        for k in range(len(table)):
            u = table.word(k)
            if u and a == -u[-1]:
                continue
            out[u + (a,)] = float(ln[k])
    return out


def _transfer_matrix(s, d):
    """Sparse log-ratio data ``(rows, cols, log_ratio)`` of the depth-``d`` refinement."""
    lens = _cylinder_lengths(s, d + 1)
    states = sorted(_cylinder_lengths(s, d).keys(), key=lambda w: (len(w), [_letter_key(x) for x in w]))
    index = {w: i for i, w in enumerate(states)}
    short = _cylinder_lengths(s, d)
    rows, cols, vals = [], [], []
    for w, length in lens.items():
        u, v = w[:-1], w[1:]
        rows.append(index[u])
        cols.append(index[v])
        vals.append(math.log(length / short[v]))
    return len(states), np.array(rows), np.array(cols), np.array(vals)


def _letter_key(a):
    return (abs(a), a < 0)


def _spectral_radius(size, rows, cols, logvals, exponent, iters=2000, tol=1e-14):
    from scipy.sparse import csr_matrix

    mat = csr_matrix((np.exp(exponent * logvals), (rows, cols)), shape=(size, size))
    x = np.ones(size)
    lam = 0.0
    for _ in range(iters):
        y = mat @ x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        y /= nrm
        new = float(np.linalg.norm(mat @ y))
        if abs(new - lam) <= tol * new:
            lam = new
            break
        lam, x = new, y
    return lam


def dimension_at_depth(s, d):
    """Exponent making the depth-``d`` contraction-ratio matrix have spectral radius one."""
    size, rows, cols, logvals = _transfer_matrix(s, d)

    def f(x):
        return math.log(_spectral_radius(size, rows, cols, logvals, x))

    f0 = f(0.0)
    if f0 <= 1e-13:
        return 0.0
    # secant iteration on log spectral radius, bracketed for safety
    x0, x1 = 0.0, 1.0
    y0, y1 = f0, f(1.0)
    if y1 > 0:
        raise NoConvergence("spectral radius exceeds one at exponent 1", "schottky.critical_exponent")
    for _ in range(60):
        x2 = x1 - y1 * (x1 - x0) / (y1 - y0)
        if not (0.0 < x2 < 1.0):
            return brentq(f, 0.0, 1.0, xtol=1e-13)
        y2 = f(x2)
        x0, y0, x1, y1 = x1, y1, x2, y2
        if abs(x1 - x0) < 1e-13:
            return x1
    return brentq(f, 0.0, 1.0, xtol=1e-13)


def critical_exponent(s, tol=1e-6, depths=range(2, 12)):
    """Hausdorff dimension of the limit set and ``delta = dim - 1/2``.

    Refines until two successive depths agree to ``tol``.
    """
    prev = None
    history = []
    for d in depths:
        try:
            est = dimension_at_depth(s, d)
        except BudgetExceeded:
            break
        history.append(est)
        if prev is not None and abs(est - prev) <= tol:
            return est, est - 0.5
        prev = est
    raise NoConvergence(f"dimension estimates {history} did not settle to {tol}",
                        "schottky.critical_exponent")


def bisection_dimension(s, length=10, base=None):
    """Exponent where length-``l`` Poincare sums stop growing: ``Z_{l+1}(x) = Z_l(x)``.

    Independent check on :func:`critical_exponent`.
    """
    if base is None:
        base = s.fundamental.arcs[0].center
    levels = list(iter_levels(s, length + 1))[-2:]
    la, lb = (np.log(lv.dilatation(base)[:, 0]) for lv in levels)

    def g(x):
        return _logsumexp(x * lb) - _logsumexp(x * la)

    if g(1e-12) <= 0:
        return 0.0
    return brentq(g, 1e-12, 1.0, xtol=1e-13)


def _logsumexp(v):
    m = v.max()
    return m + math.log(np.exp(v - m).sum())
