"""Exact cohomology dimensions for free groups acting on polynomial representations.

All arithmetic is over ``Fraction``. A presentation of genus ``g`` with ``t``
boundary generators has free generators ``a_1..a_g, b_1..b_g, s_1..s_{t-1}``
(indices ``1..2g+t-1`` in that order) and the last boundary element is

    s_t = ([a_1,b_1] ... [a_g,b_g] s_1 ... s_{t-1})^{-1},   [a,b] = a b a^-1 b^-1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegeneratePresentation, EvenK, InternalInconsistency
from .moebius import MoebiusMap

# -- exact linear algebra -------------------------------------------------------


def rref(rows):
    """Reduced row echelon form of a list of Fraction rows; returns ``(matrix, pivots)``."""
    m = [list(r) for r in rows]
    pivots = []
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows):
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows, ncols):
    """Basis of ``{x : rows x = 0}``."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    m, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -m[i][f]
        basis.append(v)
    return basis


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def matvec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def identity(k):
    return [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]


def sub(A, B):
    return [[a - b for a, b in zip(r, s)] for r, s in zip(A, B)]


def transpose(A):
    return [list(c) for c in zip(*A)]


# -- representations --------------------------------------------------------------


def _check_k(k):
    if k < 1 or k % 2 == 0:
        raise EvenK(f"k = {k} must be an odd positive integer", "cohomology")


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_pow(p, n):
    out = [Fraction(1)]
    for _ in range(n):
        out = _poly_mul(out, p)
    return out


def sym_power_rep(k, m):
    """Matrix of ``(m p)(x) = (c x + d)**(k-1) p((a x + b)/(c x + d))`` with ``(a,b;c,d) = m^{-1}``.

    Column ``j`` holds the coefficients of the image of ``x**j``.
    """
    _check_k(k)
    inv = m.inverse()
    a, b, c, d = (Fraction(x) for x in (inv.a, inv.b, inv.c, inv.d))
    cols = []
    for j in range(k):
        poly = _poly_mul(_poly_pow([b, a], j), _poly_pow([d, c], k - 1 - j))
        cols.append(poly + [Fraction(0)] * (k - len(poly)))
    return transpose(cols)


# -- presentations ------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceGroupPresentation:
    g: int
    t: int
    generators: tuple

    def __post_init__(self):
        if self.t < 1 or self.g < 0:
            raise DegeneratePresentation("need g >= 0 and t >= 1", "cohomology.presentation")
        if len(self.generators) != self.rank:
            raise DegeneratePresentation(f"expected {self.rank} generators, got {len(self.generators)}",
                                         "cohomology.presentation")
        if self.rank < 1:
            raise DegeneratePresentation("rank 2g+t-1 must be >= 1", "cohomology.presentation")
        for w in self.boundary_words():
            if abs(evaluate_word(self.generators, w).trace()) <= 2:
                raise DegeneratePresentation(f"boundary element {w} is not hyperbolic",
                                             "cohomology.presentation")

    @property
    def rank(self):
        return 2 * self.g + self.t - 1

    @property
    def abelian(self):
        return self.rank == 1

    def boundary_words(self):
        ws = [(2 * self.g + i,) for i in range(1, self.t)]
        return ws + [sigma_t_word(self)]


def sigma_t_word(pres):
    """Reduced word of the last boundary element."""
    g, t = pres.g, pres.t
    rel = []
    for i in range(1, g + 1):
        a, b = i, g + i
        rel += [a, b, -a, -b]
    rel += [2 * g + i for i in range(1, t)]
    word = _reduce([-x for x in reversed(rel)])
    if not word:
        raise DegeneratePresentation("the last boundary element is trivial", "cohomology.sigma_t_word")
    return tuple(word)


def _reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def evaluate_word(gens, word):
    m = MoebiusMap.identity()
    for x in word:
        gx = gens[abs(x) - 1]
        m = m @ (gx if x > 0 else gx.inverse())
    return m


def random_hyperbolic(rng, size=5):
    """``L diag(p/q, q/p) L^{-1}`` with small random rational ``L``."""
    while True:
        L = [Fraction(rng.randint(-size, size), rng.randint(1, size)) for _ in range(4)]
        det = L[0] * L[3] - L[1] * L[2]
        if det == 0:
            continue
        p, q = rng.randint(2, size + 2), rng.randint(1, size)
        if p == q:
            continue
        mu = Fraction(p, q)
        a, b, c, d = L
        # L D L^{-1}
        inv = (d / det, -b / det, -c / det, a / det)
        m00, m01 = a * mu, b / mu
        m10, m11 = c * mu, d / mu
        return MoebiusMap(m00 * inv[0] + m01 * inv[2], m00 * inv[1] + m01 * inv[3],
                          m10 * inv[0] + m11 * inv[2], m10 * inv[1] + m11 * inv[3])


def random_presentation(g, t, rng):
    """Random rational presentation; redraws until all boundary elements are hyperbolic."""
    if 2 * g + t - 1 == 1 and t == 2:
        gen = random_hyperbolic(rng)
        return SurfaceGroupPresentation(g, t, (gen,))
    for _ in range(1000):
        gens = tuple(random_hyperbolic(rng) for _ in range(2 * g + t - 1))
        try:
            return SurfaceGroupPresentation(g, t, gens)
        except DegeneratePresentation:
            continue
    raise DegeneratePresentation("could not draw a hyperbolic boundary element", "cohomology.random")


# -- cocycles -----------------------------------------------------------------------


class Cocycle:
    """Values ``phi(x_i)`` on the free generators."""

    def __init__(self, values):
        self.values = [list(map(Fraction, v)) for v in values]


def _reps(pres, k):
    reps = [sym_power_rep(k, m) for m in pres.generators]
    invs = [sym_power_rep(k, m.inverse()) for m in pres.generators]
    return reps, invs


def cocycle_eval(c, word, reps, invs):
    """``phi(w)`` by ``phi(uv) = phi(u) + u phi(v)`` and ``phi(x^{-1}) = -x^{-1} phi(x)``."""
    k = len(reps[0])
    acc = [Fraction(0)] * k
    pre = identity(k)
    for x in word:
        i = abs(x) - 1
        val = c.values[i] if x > 0 else [-y for y in matvec(invs[i], c.values[i])]
        acc = [a + b for a, b in zip(acc, matvec(pre, val))]
        pre = matmul(pre, reps[i] if x > 0 else invs[i])
    return acc


def cocycle_eval_recursive(c, word, reps, invs):
    """Same value from the rule ``phi(l w) = l (phi(w) - phi(l^{-1}))`` peeled letter by letter."""
    if not word:
        return [Fraction(0)] * len(reps[0])
    head, rest = word[0], word[1:]
    i = abs(head) - 1
    lmat = reps[i] if head > 0 else invs[i]
    # phi(l^{-1}): for l = x it is -x^{-1} phi(x); for l = x^{-1} it is phi(x)
    inv_val = [-y for y in matvec(invs[i], c.values[i])] if head > 0 else c.values[i]
    tail = cocycle_eval_recursive(c, rest, reps, invs)
    return matvec(lmat, [a - b for a, b in zip(tail, inv_val)])


def _cocycle_matrix(pres, k, word, reps, invs, evaluator):
    """``k x (rank k)`` matrix of ``phi -> phi(word)`` on the standard basis of cocycles."""
    cols = []
    for gi in range(pres.rank):
        for j in range(k):
            vals = [[Fraction(0)] * k for _ in range(pres.rank)]
            vals[gi][j] = Fraction(1)
            cols.append(evaluator(Cocycle(vals), word, reps, invs))
    return transpose(cols)


def _left_null(M):
    """A nonzero ``l`` with ``l M = 0`` (the cokernel functional)."""
    basis = nullspace(transpose(M), len(M))
    if len(basis) != 1:
        raise InternalInconsistency(f"cokernel has dimension {len(basis)}, expected 1", "cohomology.q_rank")
    return basis[0]


def q_rank(pres, k, alternate=False):
    """Rank of ``phi -> ([phi(s_i)] in F_k/(1 - s_i)F_k)_i`` over the rationals.

    ``alternate=True`` uses the recursive cocycle rule and the quotients by
    ``(1 - s_i^{-1}) F_k``; the rank must not change.
    """
    _check_k(k)
    reps, invs = _reps(pres, k)
    evaluator = cocycle_eval_recursive if alternate else cocycle_eval
    rows = []
    for w in pres.boundary_words():
        m = evaluate_word(pres.generators, w)
        sig = sym_power_rep(k, m.inverse() if alternate else m)
        ell = _left_null(sub(identity(k), sig))
        Z = _cocycle_matrix(pres, k, w, reps, invs, evaluator)
        rows.append([sum(l * z for l, z in zip(ell, col)) for col in zip(*Z)])
    return rank(rows)


def fk_h_dims(pres, k):
    """``(dim H^0, dim H^1)`` of the group with coefficients in the k-dimensional representation."""
    _check_k(k)
    reps, _ = _reps(pres, k)
    stacked = [row for r in reps for row in sub(r, identity(k))]
    h0 = len(nullspace(stacked, k))
    h1 = (pres.rank - 1) * k + h0
    return h0, h1


def closed_form_dims(g, t, k):
    if k == 1:
        return 2 * g + t
    if g == 0:
        return (2 * g - 2 + t) * k + 1
    return (2 * g - 2 + t) * k


def limit_cohomology_dims(pres, k):
    """``(h0, h1)`` of the cohomology with coefficients in hyperfunctions supported on the limit set."""
    _check_k(k)
    if pres.abelian:
        return 2, 2
    q = q_rank(pres, k)
    g, t = pres.g, pres.t
    if k == 1:
        h1 = t - q + 2 * g + t - 1
    else:
        h1 = t - q + (2 * g - 2 + t) * k
    expected = closed_form_dims(g, t, k)
    if h1 != expected:
        raise InternalInconsistency(f"(g,t,k)=({g},{t},{k}) gives h1={h1}, closed form {expected}",
                                    "cohomology.limit_cohomology_dims")
    return h1, h1


def induced_cohomology_dims(pres, k):
    """Sum over boundary subgroups of ``(dim ker(s_i - 1), dim coker(s_i - 1))``."""
    _check_k(k)
    h0 = h1 = 0
    for w in pres.boundary_words():
        sig = sym_power_rep(k, evaluate_word(pres.generators, w))
        M = sub(sig, identity(k))
        h0 += len(nullspace(M, k))
        h1 += k - rank(M)
    return h0, h1


@dataclass(frozen=True)
class CohomologyRow:
    g: int
    t: int
    k: int
    h0: int
    h1: int
    q: int

    @property
    def t_minus_q(self):
        return self.t - self.q

    def as_tuple(self):
        return (self.g, self.t, self.k, self.h0, self.h1, self.q, self.t_minus_q)


def cohomology_row(pres, k):
    h0, h1 = limit_cohomology_dims(pres, k)
    return CohomologyRow(pres.g, pres.t, k, h0, h1, q_rank(pres, k))


def default_rng(seed):
    return random.Random(seed)

