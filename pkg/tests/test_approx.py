import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from expsum.approx import (CapExhausted, NotFound, approx_schedule, best_approximations, circle_distance,
                           exact_fraction, kronecker_search)

from conftest import real


def convergents(x, count):
    """Continued-fraction convergents by the floor recursion at high precision."""
    with mpmath.workdps(60):
        out = []
        h0, h1, k0, k1 = 0, 1, 1, 0
        y = mpmath.mpf(x)
        for _ in range(count):
            a = int(mpmath.floor(y))
            h0, h1 = h1, a * h1 + h0
            k0, k1 = k1, a * k1 + k0
            out.append((h1, k1))
            y = 1 / (y - a)
        return out


def test_sqrt2_records_are_convergents(basis):
    recs = best_approximations([real(basis, sqrt2=1)], 6000)
    conv = [(h, k) for h, k in convergents(mpmath.sqrt(2), 14) if k <= 6000]
    # every record is a convergent and every convergent past the first is a record
    assert {(r.numers_a[0], r.denom_b) for r in recs} == set(conv[1:]) | {(1, 1)}


def test_sqrt2_b70(basis):
    rec = {r.denom_b: r for r in best_approximations([real(basis, sqrt2=1)], 100)}
    assert rec[70].numers_a == (99,)
    assert rec[70].max_error == pytest.approx(7.2e-5, rel=0.01)


def test_exact_rational_short_circuits(basis):
    sched = approx_schedule([real(basis, one=Fraction(3, 2))], 8, 8192)
    assert len(sched) == 1
    assert (sched[0].denom_b, sched[0].numers_a, sched[0].max_error) == (2, (3,), 0.0)


def test_abstract_t_schedule(basis):
    t = [real(basis, sqrt2=1), real(basis, one=5)]
    sched = approx_schedule(t, 8, 8192)
    errs = [r.max_error for r in sched]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    at70 = {r.denom_b: r for r in sched}[70]
    assert at70.numers_a == (99, 350)
    assert at70.max_error == pytest.approx(7.2e-5, rel=0.01)
    for r in sched:
        assert r.numers_a[1] == 5 * r.denom_b
        assert r.numers_a[0] == round(r.denom_b * math.sqrt(2))


def test_schedule_ordering_and_positivity(basis):
    t = [real(basis, sqrt2=1), real(basis, sqrt3=1)]
    for r in approx_schedule(t, 6, 5000):
        assert 1 <= r.numers_a[0] < r.numers_a[1]
        err = max(abs(float(x) - a / r.denom_b) for x, a in zip(t, r.numers_a))
        assert r.max_error == pytest.approx(err, rel=1e-6)


def test_schedule_cap_exhausted(basis):
    with pytest.raises(CapExhausted):
        approx_schedule([real(basis, sqrt2=1)], 8, 50)


def brute_force(theta, target, eps, l_max):
    for k in range(l_max + 1):
        for l in ((k,) if k == 0 else (k, -k)):
            if all(circle_distance(l * th, tg) < eps for th, tg in zip(theta, target)):
                return l
    return None


def test_kronecker_examples(basis):
    s2 = real(basis, sqrt2=1)
    assert kronecker_search([s2], [0.5], 0.05, 10**6) == 6
    assert kronecker_search([s2], [0.0], 0.05, 10**6) == 0
    s3 = real(basis, sqrt3=1)
    l = kronecker_search([s2, s3], [0.25, 0.75], 0.1, 10**6)
    assert circle_distance(l * math.sqrt(2), 0.25) < 0.1
    assert circle_distance(l * math.sqrt(3), 0.75) < 0.1
    assert l == brute_force([math.sqrt(2), math.sqrt(3)], [0.25, 0.75], 0.1, 1000)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.999), st.floats(0.002, 0.2))
def test_kronecker_matches_brute_force(target, eps):
    th = mpmath.sqrt(2)
    with mpmath.workdps(50):
        l = kronecker_search([th], [target], eps, 20000)
    assert l == brute_force([math.sqrt(2)], [target], eps, 20000)


def test_kronecker_not_found(basis):
    with pytest.raises(NotFound):
        kronecker_search([real(basis, sqrt2=1)], [0.5], 1e-6, 100)


def test_kronecker_large_l_exact(basis):
    # the hit is verified with exact rationals, far beyond float resolution of l*theta
    s2 = real(basis, sqrt2=1)
    l = kronecker_search([s2], [0.123456], 1e-7, 10**8)
    frac_exact = (l * exact_fraction(s2)) % 1
    assert abs(float(frac_exact) - 0.123456) < 1e-7
