import math

import pytest

from expsum.core import Basis, ExactReal, normalize

SQRT2 = "1.41421356237309504880168872420969807856967187537694807317667973799"
SQRT3 = "1.73205080756887729352744634150587236694280525381038062805580697945"


@pytest.fixture(scope="session")
def basis():
    return Basis.from_values({"sqrt2": SQRT2, "sqrt3": SQRT3})


def real(basis, **coeffs):
    return ExactReal.from_map(basis, coeffs)


def expsum(basis, terms):
    """terms: (coefficient, {name: rational}) pairs; returns the normalized sum."""
    return normalize([(c, ExactReal.from_map(basis, m)) for c, m in terms])[0]


@pytest.fixture(scope="session")
def abstract_sum(basis):
    return expsum(basis, [(1, {"sqrt2": 1}), (3j, {"one": 5}), (math.pi, {})])


@pytest.fixture(scope="session")
def exp_minus_one(basis):
    return expsum(basis, [(1, {"one": 1}), (-1, {})])
