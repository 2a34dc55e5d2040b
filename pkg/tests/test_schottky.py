import itertools
import math

import mpmath
import numpy as np
import pytest

from hyperscatter.errors import BudgetExceeded, OverlappingArcs, PingPongViolation, PointInLimitSet
from hyperscatter.schottky import (Arc, SchottkyData, bisection_dimension, critical_exponent,
                                   limit_cover, pairing_map, poincare_partial, rho_eval)

# frozen from the transfer-matrix estimate; the bisection oracle agrees to ~1e-12
THIN_DIM = 0.199123781297


def reduced_words(letters, N):
    for n in range(N + 1):
        for w in itertools.product(letters, repeat=n):
            if all(w[i] != -w[i + 1] for i in range(n - 1)):
                yield w


def brute_poincare(s, x, theta, N):
    """Word-by-word sum in 40-digit arithmetic through the line chart."""
    with mpmath.workdps(40):
        mats = {}
        for a in s.letters:
            g = s.letter_map(a)
            m = mpmath.matrix([[g.a, g.b], [g.c, g.d]])
            mats[a] = m / mpmath.sqrt(mpmath.det(m))
        z = mpmath.expjpi(mpmath.mpf(theta) / mpmath.pi)
        v = 1j * (1 + z) / (1 - z)
        total = mpmath.mpf(0)
        for w in reduced_words(s.letters, N):
            g = mpmath.eye(2)
            for a in w:
                g = g * mats[a]
            den = g[1, 0] * v + g[1, 1]
            gv = (g[0, 0] * v + g[0, 1]) / den
            total += abs((1 + v * v) / (den * den * (1 + gv * gv))) ** x
        return float(total)


def test_pairing_map_sends_exterior_into_target():
    src, dst = Arc.centered(math.pi, 0.2), Arc.centered(0.0, 0.2)
    g = pairing_map(src, dst)
    ext = src.end + (2 * math.pi - src.length) * np.linspace(0.01, 0.99, 50)
    assert np.all(dst.contains(g.act_circle(ext)))
    assert abs(g.det() - 1) < 1e-12


def test_validate_thin(thin):
    diag = thin.validate()
    assert diag["paired_exactly"]
    assert diag["min_gap"] == pytest.approx(math.pi / 2 - 0.2)
    assert max(diag["contraction"]) < 1


def test_overlapping_arcs_rejected():
    pairs = [(Arc.centered(math.pi, 0.3), Arc.centered(0.0, 0.3)),
             (Arc.centered(1.5 * math.pi, 0.3), Arc.centered(0.2, 0.3))]
    with pytest.raises(OverlappingArcs):
        SchottkyData.from_arcs(pairs).validate()


def test_pingpong_violation_detected(thin):
    # swap the targets of the two generators
    bad = SchottkyData(thin.generators, thin.minus, thin.plus[::-1])
    with pytest.raises(PingPongViolation):
        bad.validate()


def test_word_count(thin):
    assert thin.word_count(3) == 1 + 4 + 12 + 36
    assert len(thin.words(3).lengths) == thin.word_count(3)


def test_word_cap():
    s = SchottkyData.symmetric(0.1, word_cap=100)
    with pytest.raises(BudgetExceeded):
        s.words(5)


def test_poincare_matches_brute_force(thin):
    theta = thin.fundamental.arcs[0].center
    for x in (1.0, 0.5):
        assert poincare_partial(thin, x, theta, 4) == pytest.approx(brute_poincare(thin, x, theta, 4),
                                                                    rel=1e-12)


def test_poincare_rejects_limit_point(thin):
    g = thin.letter_map(1)
    fixed = g.act_circle(np.array([0.0]))
    for _ in range(40):
        fixed = g.act_circle(fixed)
    with pytest.raises(PointInLimitSet):
        poincare_partial(thin, 1.0, float(fixed[0]), 6)


def test_limit_cover_nested_and_shrinking(thin):
    prev = None
    for d in (1, 2, 3, 4):
        cover = limit_cover(thin, d)
        assert len(cover.arcs) == 4 * 3 ** (d - 1)
        if prev is not None:
            mids = np.array([a.center for a in cover.arcs])
            assert np.all(prev.contains(mids))
            assert cover.total_length < prev.total_length
        prev = cover


def test_rho_equivariance(thin):
    xs = np.concatenate([a.start + a.length * np.linspace(0.1, 0.9, 5) for a in thin.fundamental.arcs])
    base = rho_eval(thin, xs, 1.0, 12)
    for a in thin.letters:
        g = thin.letter_map(a)
        img = rho_eval(thin, g.act_circle(xs), 1.0, 12, check=False)
        assert np.max(np.abs(img - g.dilatation_circle(xs) * base) / img) < 1e-8


def test_thin_dimension_two_methods(thin):
    dim, delta = critical_exponent(thin)
    assert dim == pytest.approx(THIN_DIM, abs=1e-9)
    assert delta < 0
    assert bisection_dimension(thin) == pytest.approx(dim, abs=1e-6)


def test_dimension_monotone_in_radius():
    dims = [critical_exponent(SchottkyData.symmetric(r))[0] for r in (0.02, 0.05, 0.1, 0.2)]
    assert all(a < b for a, b in zip(dims, dims[1:]))


def test_cyclic_group_has_dimension_zero():
    dim, delta = critical_exponent(SchottkyData.cyclic(0.2))
    assert abs(dim) < 1e-3 and delta == pytest.approx(-0.5, abs=1e-3)
