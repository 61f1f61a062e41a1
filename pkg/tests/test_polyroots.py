import math

import mpmath
import numpy as np
import pytest

from expsum.approx import RationalApprox
from expsum.polyroots import (Degenerate, DegreeCap, SparsePoly, find_one_root, find_roots, root_annulus,
                              specialize)
from expsum.qlinalg import reduce_step1

from conftest import expsum


def poly(*pairs):
    return SparsePoly.from_terms(pairs)


def mp_roots(p):
    """Reference roots of a small dense polynomial with mpmath."""
    dense = p.dense()[::-1]
    with mpmath.workdps(40):
        return [complex(r) for r in mpmath.polyroots([mpmath.mpc(c) for c in dense], maxsteps=200, extraprec=200)]


def match(a, b, tol):
    b = list(b)
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        assert abs(x - b[j]) < tol
        b.pop(j)


def test_specialize_examples(abstract_sum):
    red = reduce_step1(abstract_sum)
    p = specialize(red, RationalApprox(70, (99, 350), 7.2e-5))
    assert p.exps == (0, 99, 350)
    p = specialize(red, RationalApprox(1, (2, 2), 0.5))
    assert p.exps == (0, 2)
    assert p.coeffs[1] == 1 + 3j


def test_specialize_degenerate(basis):
    f = expsum(basis, [(1, {"sqrt2": 1}), (-1, {"one": 5}), (1, {})])
    red = reduce_step1(f)
    with pytest.raises(Degenerate):
        specialize(red, RationalApprox(1, (2, 2), 0.5))


def test_specialize_identity(basis):
    f = expsum(basis, [(1, {"one": 4}), (2, {"one": 3}), (1, {})])
    p = specialize(reduce_step1(f), RationalApprox(1, (1,), 0.0))
    assert p.exps == (0, 3, 4)


def test_annulus_examples():
    a = root_annulus(poly((1, 3), (1, 1), (1, 0)))
    assert (a.r_inner, a.r_outer) == pytest.approx((0.5, math.sqrt(2)))
    a = root_annulus(poly((1, 1), (-1, 0)))
    assert (a.r_inner, a.r_outer) == (1.0, 1.0)
    a = root_annulus(poly((2, 5), (3, 2), (1, 0)))
    assert (a.r_inner, a.r_outer) == pytest.approx((0.2**0.5, 2 ** (1 / 3)))


def test_find_roots_quadratic():
    r = sorted(find_roots(poly((1, 2), (-1, 0))), key=lambda z: z.real)
    assert r == pytest.approx([-1, 1], abs=1e-12)


def test_find_roots_cubic():
    p = poly((1, 3), (1, 1), (1, 0))
    r = find_roots(p)
    match(r, mp_roots(p), 1e-10)
    real_root = min(r, key=lambda z: abs(z.imag))
    assert real_root.real == pytest.approx(-0.6823278038, abs=1e-9)
    assert all(abs(abs(z) - 1.2106) < 1e-3 for z in r if abs(z.imag) > 0.1)


def test_find_roots_sparse_high_degree():
    p = poly((1, 350), (1, 99), (1, 0))
    r = find_roots(p)
    ann = root_annulus(p)
    assert len(r) == 350
    assert all(ann.contains(z, 1e-9) for z in r)
    assert np.max(p.backward_error(r)) < 1e-10


def test_vieta_and_conjugates():
    rng = np.random.default_rng(5)
    c = rng.normal(size=7)
    p = SparsePoly.from_terms([(c[k], k) for k in range(7)])
    r = find_roots(p)
    assert sum(r) == pytest.approx(-c[5] / c[6], abs=1e-9)
    match(r, np.conj(r), 1e-8)


def test_zero_roots_factored():
    r = find_roots(SparsePoly((1, -1), (2, 4)))
    assert sum(abs(z) < 1e-300 for z in r) == 2
    assert len(r) == 4


def test_degree_cap():
    with pytest.raises(DegreeCap):
        find_roots(poly((1, 30001), (1, 0)), degree_cap=20000)


def test_find_one_root_huge_degree():
    p = poly((3j, 28705), (1, 8119), (math.pi, 0))
    w = find_one_root(p)
    assert p.backward_error(w) < 1e-10
    assert root_annulus(p).contains(w, 1e-9)


def test_find_one_root_from_seed():
    p = poly((1, 3), (1, 1), (1, 0))
    w = find_one_root(p, -0.7)
    ref = min(mp_roots(p), key=lambda z: abs(z + 0.7))
    assert abs(w - ref) < 1e-13
