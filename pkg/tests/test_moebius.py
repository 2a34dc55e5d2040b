import math
from fractions import Fraction

import numpy as np
import pytest

from hyperscatter.errors import ConfigError, PoleAtPoint
from hyperscatter.moebius import (MoebiusMap, angle_to_line, angle_to_line_derivative,
                                  line_to_angle, parse_scalar)


def rand_map(rng):
    a, b, c = rng.normal(size=3)
    a = a if abs(a) > 0.2 else 1.0
    return MoebiusMap.normalized(a, b, c, (1 + b * c) / a)


def test_parse_scalar_rational_and_decimal():
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert parse_scalar("-0.25") == Fraction(-1, 4)
    assert parse_scalar(5) == Fraction(5)


def test_parse_zero_denominator_names_field():
    with pytest.raises(ConfigError, match=r"m\[1\]"):
        MoebiusMap.parse(["1", "3/0", "0", "1"], "m")


def test_exact_composition_stays_rational():
    A = MoebiusMap.parse(["2", "1", "1", "1"])
    B = MoebiusMap.parse(["1", "1/2", "0", "1"])
    C = A @ B
    assert C.exact and C.det() == 1
    assert (C @ C.inverse()).trace() == 2


def test_composition_matches_action():
    rng = np.random.default_rng(1)
    A, B = rand_map(rng), rand_map(rng)
    z = 0.3 + 0.7j
    assert abs((A @ B).act(z) - A.act(B.act(z))) < 1e-12


def test_chart_consistency():
    # circle action equals line action conjugated by the Cayley chart
    rng = np.random.default_rng(2)
    g = rand_map(rng)
    theta = np.array([0.4, 1.3, 2.9, 5.0])
    lhs = g.act_circle(theta)
    rhs = np.array([line_to_angle(g.act(angle_to_line(x))) for x in theta])
    assert np.max(np.abs(np.angle(np.exp(1j * (lhs - rhs))))) < 1e-10


def test_circle_dilatation_by_finite_differences():
    rng = np.random.default_rng(3)
    g = rand_map(rng)
    th, h = 1.1, 1e-6
    fd = np.angle(np.exp(1j * (g.act_circle(th + h) - g.act_circle(th - h)))) / (2 * h)
    assert abs(fd - g.dilatation_circle(th)) < 1e-7


def test_angle_to_line_derivative():
    th, h = 0.8, 1e-6
    fd = (angle_to_line(th + h) - angle_to_line(th - h)) / (2 * h)
    assert abs(fd - angle_to_line_derivative(th)) < 1e-6


def test_disc_and_halfplane_actions_agree():
    rng = np.random.default_rng(4)
    g = rand_map(rng)
    w = 0.2 + 1.5j
    z = (w - 1j) / (w + 1j)
    gz = g.act_disc(z)
    gw = g.act_halfplane(w)
    assert abs(gz - (gw - 1j) / (gw + 1j)) < 1e-12


def test_pole_goes_to_infinity_and_derivative_raises():
    g = MoebiusMap(1.0, 0.0, 1.0, 1.0)
    assert g.act(-1.0) == math.inf
    assert g.act(math.inf) == 1.0
    with pytest.raises(PoleAtPoint):
        g.dilatation_line(-1.0)


def test_normalized_has_unit_determinant():
    g = MoebiusMap.normalized(2.0, 1.0, 1.0, 3.0)
    assert math.isclose(g.det(), 1.0, rel_tol=1e-14)
