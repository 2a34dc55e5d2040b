import math

import numpy as np
import pytest

from hyperscatter.bgrid import BoundaryGrid, ChebyshevArcs, GridParams
from hyperscatter.errors import FoldFailure


@pytest.fixture(scope="module")
def grid(thin):
    return BoundaryGrid(thin, GridParams(Q=64))


def test_total_invariant_length_is_full_circle(grid):
    # images of the fundamental domain tile the ordinary set, which has full measure
    total = sum(c.length for c in grid.circles)
    assert total == pytest.approx(2 * math.pi, rel=1e-6)


def test_every_fundamental_arc_is_glued_once(grid):
    used = sorted(k for c in grid.circles for k in c.arcs)
    assert used == list(range(len(grid.arcs)))


def test_node_coordinates_round_trip(grid):
    circ, s = grid.theta_to_s(grid.theta)
    assert np.array_equal(circ, grid.circle_of)
    assert np.max(np.abs(s - grid.s_local)) < 1e-10


def test_trig_interpolation_is_exact_below_nyquist(grid):
    modes = [(0, 0.5, 0.0), (3, 1.0, -0.4)]
    vals = grid.trig_function(modes)
    arc = grid.arcs[1]
    pts = arc.start + arc.length * np.array([0.13, 0.5, 0.77])
    circ, s = grid.theta_to_s(pts)
    L = grid.circles[circ[0]].length
    want = sum(a * np.cos(2 * math.pi * k * s / L) + b * np.sin(2 * math.pi * k * s / L) for k, a, b in modes)
    assert np.max(np.abs(grid.interpolate(vals, pts) - want)) < 1e-10


def test_trig_derivative_by_differences(grid):
    modes = [(2, 1.0, 0.3)]
    h = 1e-6
    c = grid.circles[0]
    s = grid.s_local[grid.circle_slice(0)]
    f = lambda x: np.cos(2 * math.pi * 2 * x / c.length) + 0.3 * np.sin(2 * math.pi * 2 * x / c.length)
    fd = (f(s + h) - f(s - h)) / (2 * h)
    assert np.max(np.abs(grid.trig_derivative(modes)[grid.circle_slice(0)] - fd)) < 1e-6


def test_outside_fundamental_domain(grid, thin):
    with pytest.raises(FoldFailure):
        grid.theta_to_s([thin.letter_arc(1).center])


def test_gauss_nodes_integrate_arc_lengths(grid):
    nodes, w = grid.gauss_nodes()
    assert w.sum() == pytest.approx(sum(a.length for a in grid.arcs), rel=1e-13)


def test_transfer_moments_against_word_sum(thin):
    """Moment recursion equals the explicit sum over words, applied to the interpolation basis."""
    cheb = ChebyshevArcs(thin, 12)
    ys = np.array([thin.fundamental.arcs[0].center, thin.fundamental.arcs[2].center + 0.1])
    q, N = 0.8, 3
    mom = cheb.moments(q, ys, N)
    table = thin.words(N)
    for b in thin.letters:
        sel = (table.lengths >= 1) & (table.first == b)
        sub = table.select(sel)
        gy = sub.act(ys)
        dil = sub.dilatation(ys) ** q
        want = np.zeros((cheb.R, len(ys)), dtype=complex)
        for j in range(len(ys)):
            want[:, j] = cheb.lagrange(b, gy[:, j]) @ dil[:, j]
        # long words are interpolated, so agreement is to interpolation accuracy
        assert np.max(np.abs(mom[b] - want)) < 1e-6 * np.max(np.abs(want))
