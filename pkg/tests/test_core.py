import cmath
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expsum.core import (Basis, BasisReal, EmptyAfterMerge, ExactReal, ProblemFormatError, Rectangle,
                         SingleTerm, ZeroCertificate, exact_sum, merge_terms, normalize, parse_problem, problem_to_json)

from conftest import SQRT2, expsum, real


def test_basis_always_has_one(basis):
    assert basis.names[0] == "one"
    assert float(real(basis, one=1)) == 1.0


def test_basis_rejects_duplicates():
    with pytest.raises(ProblemFormatError):
        Basis([BasisReal.parse("a", SQRT2), BasisReal.parse("a", SQRT2)])


def test_basis_real_round_trips():
    b = BasisReal.parse("sqrt2", SQRT2)
    assert b.round_trips()
    assert b.precision_digits >= 30


def test_exact_real_equality_is_exact(basis):
    a = real(basis, sqrt2=Fraction(1, 3), one=2)
    b = real(basis, one=Fraction(4, 2), sqrt2=Fraction(2, 6))
    assert a == b and hash(a) == hash(b)
    assert a != real(basis, sqrt2=Fraction(1, 3), one=Fraction(2000001, 1000000))


def test_exact_real_arithmetic(basis):
    a = real(basis, sqrt2=1, one=1)
    b = real(basis, sqrt2=1)
    assert (a - b) == real(basis, one=1)
    assert (a - b).is_rational()
    assert (a + (-a)).is_zero()
    assert a.scale(Fraction(3, 2)) == real(basis, sqrt2=Fraction(3, 2), one=Fraction(3, 2))
    assert float(a) == pytest.approx(1 + math.sqrt(2), abs=1e-15)


def test_exact_real_rejects_floats(basis):
    with pytest.raises(TypeError):
        ExactReal.from_map(basis, {"sqrt2": 0.5})


def test_normalize_cancellation(basis):
    with pytest.raises(EmptyAfterMerge):
        normalize([(1, real(basis, one=1)), (-1, real(basis, one=1))])


def test_normalize_abstract_sum(basis, abstract_sum):
    assert [float(r) for _, r in abstract_sum.terms] == pytest.approx([0, math.sqrt(2), 5])
    assert abstract_sum.coeffs[0] == pytest.approx(math.pi)
    assert abstract_sum.coeffs[2] == 3j


def test_decimal_exponent_is_exact(basis):
    _, raw = parse_problem({"terms": [{"coeff": {"re": "1"}, "exponent": {"one": "0.5"}}]})
    assert raw[0][1].as_dict() == {"one": Fraction(1, 2)}


def test_normalize_shift(basis):
    f, shift = normalize([(1, real(basis, one=2)), (1, real(basis, one=5))])
    assert shift == real(basis, one=2)
    assert [r for _, r in f.terms] == [real(basis), real(basis, one=3)]


def test_normalize_merges_and_drops(basis):
    f, _ = normalize([(1, real(basis, one=1)), (2, real(basis, one=1)), (1, real(basis, sqrt2=1)),
                      (-1, real(basis, sqrt2=1)), (4, real(basis))])
    assert len(f) == 2
    assert f.coeffs.tolist() == [4, 3]


def test_single_term_is_flagged(basis):
    f, _ = normalize([(2, real(basis, one=1))])
    assert f.is_single_term
    with pytest.raises(SingleTerm):
        f.require_solvable()


def test_normalize_idempotent(basis, abstract_sum):
    f2, shift = normalize(list(abstract_sum.terms))
    assert shift.is_zero()
    assert f2.terms == abstract_sum.terms


def test_eval_examples(basis, abstract_sum, exp_minus_one):
    assert abs(exp_minus_one(2j * math.pi)) < 1e-12
    assert abstract_sum(0) == pytest.approx(1 + math.pi + 3j, abs=1e-14)
    cosh = expsum(basis, [(1, {"one": 1}), (1, {"one": -1})])
    # after the shift this is e^{2z} + 1; zeros do not move
    assert abs(cosh(0.5j * math.pi)) < 1e-12


def test_eval_matches_direct_sum(abstract_sum):
    rng = np.random.default_rng(1)
    z = rng.uniform(-3, 3, 50) + 1j * rng.uniform(-30, 30, 50)
    direct = sum(c * np.exp(r * z) for c, r in zip(abstract_sum.coeffs, abstract_sum.exponents))
    assert np.allclose(abstract_sum(z), direct, rtol=1e-12, atol=1e-12)


def test_eval_no_overflow_in_factored_form(abstract_sum):
    z = 150.0 + 2j
    ld = abstract_sum.log_derivative(z)
    assert ld == pytest.approx(5.0, rel=1e-12)
    assert 0 < abstract_sum.relative_modulus(-300 + 1j) <= 1


def test_shift_relation(basis):
    f_raw = [(1, real(basis, one=2)), (2j, real(basis, sqrt2=3)), (-1, real(basis, one=Fraction(1, 2)))]
    orig = merge_terms(f_raw)
    f, shift = normalize(f_raw)
    rng = np.random.default_rng(3)
    for z in rng.normal(size=10) + 1j * rng.normal(size=10):
        assert f(z) == pytest.approx(cmath.exp(-float(shift) * z) * orig(z), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-10, 10))
def test_eval_deriv_finite_differences(x, y):
    b = Basis.from_values({"sqrt2": SQRT2})
    f = expsum(b, [(1, {"sqrt2": 1}), (3j, {"one": 5}), (math.pi, {}), (-0.5, {"one": Fraction(-1, 2)})])
    z = complex(x, y)
    h = 1e-5
    fd = (f(z + h) - f(z - h)) / (2 * h)
    d = f.eval_deriv(z)
    assert abs(fd - d) <= 1e-6 * max(abs(d), 1e-300) + 1e-9 * f.term_scale(z)


def test_eval_mp_agrees(abstract_sum):
    z = 0.1 + 7.3j
    assert complex(abstract_sum.eval_mp(z)) == pytest.approx(abstract_sum(z), rel=1e-13)


def test_rectangle():
    r = Rectangle.parse("-1,1,0,2")
    assert r.center == 1j
    assert r.corners()[0] == complex(-1, 0)
    assert r.contains(0.5 + 1.5j)
    with pytest.raises(ValueError):
        Rectangle(1, 0, 0, 1)
    with pytest.raises(ValueError):
        Rectangle.parse("1,2,3")


def test_certificate_json_round_trip():
    c = ZeroCertificate(0.1 + 2j, 0.05, 1, 0.3, 1e-15, center=0.1 + 2.01j)
    d = json.loads(json.dumps(c.to_json()))
    assert ZeroCertificate.from_json(d) == c
    other = ZeroCertificate(0.1 + 2.2j, 0.05, 1, 0.3, 1e-15)
    assert c.disjoint_from(other)


def test_certificate_invariants():
    with pytest.raises(ValueError):
        ZeroCertificate(0j, 0.0, 1, 1.0, 0.0)
    with pytest.raises(ValueError):
        ZeroCertificate(0j, 0.1, 1, 0.0, 0.0)


def test_problem_round_trip(abstract_sum):
    data = json.loads(json.dumps(problem_to_json(abstract_sum)))
    basis, raw = parse_problem(data)
    f, shift = normalize(raw)
    assert shift.is_zero()
    assert [r.as_dict() for _, r in f.terms] == [r.as_dict() for _, r in abstract_sum.terms]
    assert np.allclose(f.coeffs, abstract_sum.coeffs)


@pytest.mark.parametrize("data, where", [
    ({"terms": []}, "terms"),
    ({"terms": [{"exponent": {}}]}, "terms[0]"),
    ({"terms": [{"coeff": {"re": "1"}, "exponent": {"one": "pi"}}]}, "terms[0].exponent.one"),
    ({"terms": [{"coeff": {"re": "x"}, "exponent": {}}]}, "terms[0].coeff"),
    ({"basis": [{"name": "a"}], "terms": [{"coeff": {"re": "1"}}]}, "basis[0]"),
])
def test_parse_errors_name_the_field(data, where):
    with pytest.raises(ProblemFormatError) as info:
        parse_problem(data)
    assert info.value.where == where


def test_merge_exact_cancellation(basis):
    r = real(basis, one=1)
    cs = [1.0828473345512695, 0.7367536409011974, -1.0828473345512695, -0.7367536409011974]
    with pytest.raises(EmptyAfterMerge):
        merge_terms([(c, r) for c in cs] + [(0, r)])
    assert exact_sum([0.1, 0.2, -0.3]) == complex(math.fsum([0.1, 0.2, -0.3]))
