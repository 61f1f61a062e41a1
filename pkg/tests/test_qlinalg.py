import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expsum.qlinalg import integer_vector, rational_rank, reduce_step1, solve_rational

from conftest import expsum, real

F = Fraction


def test_rank_standard_basis():
    assert rational_rank([(1, 0), (0, 1)]) == (2, [])


def test_rank_with_dependency():
    rank, deps = rational_rank([(0, 1), (0, 2), (1, 0)])
    assert rank == 2
    assert deps == [(2, -1, 0)]


def test_rank_rational_entries():
    rank, deps = rational_rank([(F(3, 2),), (F(2),)])
    assert rank == 1
    assert deps == [(4, -3)]


def test_rank_empty():
    assert rational_rank([]) == (0, [])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), min_size=3, max_size=3),
                min_size=1, max_size=5))
def test_rank_plus_kernel_is_count(vectors):
    rank, deps = rational_rank(vectors)
    assert rank + len(deps) == len(vectors)
    for lam in deps:
        assert all(x == int(x) for x in lam)
        combo = [sum(l * v[i] for l, v in zip(lam, vectors)) for i in range(3)]
        assert combo == [0, 0, 0]
    # the rank agrees with floating-point rank on these small inputs
    assert rank == np.linalg.matrix_rank(np.array(vectors, dtype=float))


def test_integer_vector_normalizes():
    assert integer_vector([F(-1, 2), F(1, 3)]) == (3, -2)


def test_solve_rational():
    assert solve_rational([[F(1), F(0)], [F(1), F(1)]], [F(3), F(2)]) == [F(1), F(2)]
    assert solve_rational([[F(1), F(0)]], [F(0), F(1)]) is None


def test_reduce_integer_exponents(basis):
    f = expsum(basis, [(2, {"one": 2}), (3, {"one": 1}), (5, {})])
    red = reduce_step1(f)
    assert red.m == 1 and red.basis_t == (real(basis, one=1),)
    assert red.scale_d == 1
    assert red.vectors == ((0,), (1,), (2,))
    assert red.coeffs == (5, 3, 2)


def test_reduce_abstract_sum(basis, abstract_sum):
    red = reduce_step1(abstract_sum)
    assert red.basis_t == (real(basis, sqrt2=1), real(basis, one=5))
    assert red.scale_d == 1
    assert red.vectors == ((0, 0), (1, 0), (0, 1))


def test_reduce_rational_exponents(basis):
    # t = 3/2; 2 = (4/3) t, so d = 3 and the exponents of w = e^{t z} are 0, 3, 4
    f = expsum(basis, [(1, {"one": 2}), (1, {"one": F(3, 2)}), (1, {})])
    red = reduce_step1(f)
    assert red.basis_t == (real(basis, one=F(3, 2)),)
    assert red.vectors == ((0,), (3,), (4,))
    assert red.scale_d == 3


def test_reduce_laurent_clearing(basis):
    # greedy smallest-first picks t = (sqrt2 - 1, 1); sqrt2 = t_1 + t_2
    f = expsum(basis, [(1, {"sqrt2": 1, "one": -1}), (1, {"one": 1}), (1, {"sqrt2": 1}), (1, {})])
    red = reduce_step1(f)
    assert red.basis_t == (real(basis, sqrt2=1, one=-1), real(basis, one=1))
    assert min(min(v) for v in red.vectors) == 0
    assert red.laurent_vectors[3] == (1, 1)
    assert red.clearing_offset == (0, 0)


def test_reduce_negative_coordinates_are_cleared(basis):
    # t = (sqrt2 - 1, 1) and 3 - sqrt2 = -t_1 + 2 t_2
    f = expsum(basis, [(1, {"sqrt2": 1, "one": -1}), (1, {"one": 1}), (1, {"sqrt2": -1, "one": 3}), (1, {})])
    red = reduce_step1(f)
    assert red.laurent_vectors[3] == (-1, 2)
    assert red.clearing_offset == (1, 0)
    assert all(min(v) >= 0 for v in zip(*red.vectors))


@pytest.mark.parametrize("terms", [
    [(1, {"sqrt2": 1}), (3j, {"one": 5}), (math.pi, {})],
    [(1, {"one": 2}), (1, {"one": F(3, 2)}), (1, {})],
    [(1, {"sqrt2": F(1, 2)}), (-2, {"sqrt3": 1}), (0.5j, {"sqrt2": 1, "sqrt3": F(-1, 3)}), (1, {})],
    [(1, {"sqrt2": 1, "one": -1}), (1, {"one": 1}), (1, {"sqrt2": -1, "one": 3}), (1, {})],
])
def test_reduction_soundness(basis, terms):
    f = expsum(basis, terms)
    red = reduce_step1(f)
    for k, (_, r) in enumerate(f.terms):
        lhs = r.scale(red.scale_d)
        rhs = basis.real()
        for e, t in zip(red.laurent_vectors[k], red.basis_t):
            rhs = rhs + t.scale(e)
        assert lhs == rhs
    rng = np.random.default_rng(0)
    t = red.t_float
    for z in rng.uniform(-1, 1, 8) + 1j * rng.uniform(-5, 5, 8):
        w = np.exp(t * z)
        clearing = np.prod(w ** np.array(red.clearing_offset))
        val = f(red.scale_d * z) * clearing
        ref = red.poly(w)
        assert abs(val - ref) <= 1e-9 * max(1.0, abs(ref))


def test_reduction_deterministic(abstract_sum):
    assert reduce_step1(abstract_sum) == reduce_step1(abstract_sum)
