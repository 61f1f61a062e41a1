import cmath
import math

import numpy as np
import pytest

from expsum.quadrature import Circle, Segment, ZeroOnBoundary, integrate_path


def test_segment_integral_is_log_ratio(abstract_sum):
    a, b = 0.3 + 0.1j, -0.2 + 3.7j
    res = integrate_path(abstract_sum, Segment(a, b), 1e-10)
    assert cmath.exp(res.log_deriv) == pytest.approx(abstract_sum(b) / abstract_sum(a), rel=1e-9)


def test_circle_around_simple_zero(exp_minus_one):
    res = integrate_path(exp_minus_one, Circle(2j * math.pi + 0.1, 0.5), 1e-10, min_panels=8)
    assert res.log_deriv / (2j * math.pi) == pytest.approx(1, abs=1e-9)
    # first moment about the centre locates the zero
    assert res.moment / (2j * math.pi) == pytest.approx(-0.1, abs=1e-9)


def test_zero_on_path_is_detected(exp_minus_one):
    with pytest.raises(ZeroOnBoundary):
        integrate_path(exp_minus_one, Segment(-1 + 0j, 1 + 0j), 1e-6)


def test_track_abs_gives_boundary_minimum(exp_minus_one):
    res = integrate_path(exp_minus_one, Circle(0, 0.5), 1e-6, min_panels=8, track_abs=True)
    theta = np.linspace(0, 2 * np.pi, 20001)
    sampled = np.abs(np.exp(0.5 * np.exp(1j * theta)) - 1).min()
    assert res.min_abs == pytest.approx(sampled, rel=1e-3)
