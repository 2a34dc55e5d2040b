import json
import math

import numpy as np
import pytest

from hyperscatter.bgrid import GridParams
from hyperscatter.boundary import InteriorPoint, j_symbol
from hyperscatter.errors import FoldFailure, NearSingular, PoleAtInteger
from hyperscatter.moebius import angle_to_line
from hyperscatter.scattering import (Eisenstein, Scattering, collar_map_for, continue_s,
                                     eisenstein_constant, extend_invariant, fold, relative_norm,
                                     resonance_scan)
from hyperscatter.schottky import rho_eval


def test_matrix_commutes_with_quarter_turn(small_sc):
    # the symmetric group is invariant under rotation by pi/2, which shifts nodes by Q/4
    A = small_sc.matrix(0.3)
    Q = small_sc.params.Q
    P = np.roll(np.eye(A.shape[0]), Q // 4, axis=0)
    assert np.linalg.norm(P @ A - A @ P) / np.linalg.norm(A) < 1e-10


def test_operator_metadata(small_sc):
    op = small_sc.operator(0.3)
    assert op.metadata["N"] == 8 and op.metadata["Q"] == 64
    assert op.matrix.shape == (small_sc.grid.size,) * 2


def test_pole_is_rejected(small_sc):
    with pytest.raises(PoleAtInteger):
        small_sc.matrix(0.0)


def test_continuation_only_left_of_axis(small_sc):
    with pytest.raises(ValueError):
        continue_s(small_sc, 0.2)


def test_two_paths_agree(small_sc):
    direct = small_sc.matrix(-0.2)
    cont = continue_s(small_sc, -0.2).matrix
    assert relative_norm(direct, cont) < 1e-2


def test_near_singular_reported(small_sc):
    class Degenerate(Scattering):
        def matrix(self, lam):
            m = np.eye(4, dtype=complex)
            m[3, 3] = 1e-13
            return m
    sc = Degenerate(small_sc.s, small_sc.params, 8, small_sc.grid)
    with pytest.raises(NearSingular) as info:
        continue_s(sc, -0.3)
    assert info.value.sigma_min == pytest.approx(1e-13)


def test_resonance_scan_layout(small_sc):
    res = resonance_scan(small_sc, (0.3, 0.3), (-0.5, 0.5), (1, 3))
    rows = res.rows()
    assert len(rows) == 3 and len(rows[0]) == 5
    assert rows[0][0] == 0.3 and rows[0][1] == -0.5
    assert all(r[2] > 0 for r in rows)


def test_export(tmp_path, small_sc):
    op = small_sc.operator(0.3)
    stem = tmp_path / "s"
    op.export(str(stem))
    re = np.loadtxt(f"{stem}_real.csv", delimiter=",")
    im = np.loadtxt(f"{stem}_imag.csv", delimiter=",")
    assert np.array_equal(re + 1j * im, op.matrix)
    meta = json.loads((tmp_path / "s_meta.json").read_text())
    assert meta["schema_version"] == 1 and meta["N"] == 8 and meta["rho_s0"] == 1.0


def test_fold_lands_in_fundamental_domain(thin):
    theta = 2 * math.pi * (np.arange(256) + 0.5) / 256
    x, d, depth, ok = fold(thin, theta, 8)
    assert ok.mean() > 0.99
    assert np.all(thin.fundamental.contains(x[ok]))
    # derivative of the fold: rho transforms by it
    r0 = rho_eval(thin, theta[ok], check=False)
    r1 = rho_eval(thin, x[ok], check=False)
    assert np.max(np.abs(r1 - d[ok] * r0) / r1) < 1e-8


def test_extension_is_equivariant(small_sc, thin):
    phi = small_sc.grid.trig_function([(1, 1.0, 0.3)])
    lam = 0.3
    ext = extend_invariant(small_sc, phi, lam, 10, M=1024)
    assert ext.covered_fraction > 0.99
    g = thin.letter_map(1)
    x = ext.angles[ext.mask][:20]
    x = x[thin.fundamental.contains(x)]
    gx = g.act_circle(x)

    def value(t):
        y, d, _, _ = fold(thin, t, 10)
        return (rho_eval(thin, y, check=False) / d) ** (lam - 0.5) * small_sc.grid.interpolate(phi, y)
    lhs = value(gx)
    rhs = g.dilatation_circle(x) ** (lam - 0.5) * value(x)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_strict_extension_raises(small_sc):
    phi = small_sc.grid.trig_function([(0, 1.0, 0.0)])
    with pytest.raises(FoldFailure):
        extend_invariant(small_sc, phi, 0.3, 1, M=256, strict=True)


def test_eisenstein_two_methods(small_sc):
    phi = small_sc.grid.trig_function([(0, 1.0, 0.0), (2, 0.0, 0.4)])
    p = InteriorPoint.disc(0.3, 0.4)
    a = Eisenstein(small_sc, phi, 0.8, N=5)(p)
    b = Eisenstein(small_sc, phi, 0.8, N=5, method="words")(p)
    assert abs(a - b) / abs(b) < 1e-6


def test_eisenstein_invariance(small_sc, thin):
    phi = small_sc.grid.trig_function([(0, 1.0, 0.0)])
    E = Eisenstein(small_sc, phi, 0.8)
    p = InteriorPoint.disc(0.5, 2.0)
    e = E(p)
    for a in thin.letters:
        gp = InteriorPoint(p.chart, thin.letter_map(a).act_disc(p.value))
        assert abs(E(gp) - e) / abs(e) < 1e-4


def test_eisenstein_constant_is_inverse_zero_mode():
    for lam in (0.15, 0.35 + 0.2j):
        assert eisenstein_constant(lam) == pytest.approx(1 / j_symbol(lam, 0).coeffs[0], rel=1e-12)


def test_collar_equivariance(thin):
    b = angle_to_line(thin.fundamental.arcs[1].center)
    T = collar_map_for(thin, 1e-3, b)
    for a in thin.letters:
        g = thin.letter_map(a)
        lhs = g.act_halfplane(T.value)
        rhs = collar_map_for(thin, 1e-3, float(g.act(b)), check=False).value
        assert abs(lhs - rhs) / rhs.imag < 1e-6


def test_refined_params():
    p = GridParams().refined()
    assert (p.Q, p.cheb, p.N_rho, p.panels) == (512, 28, 12, 16)
