"""Rational approximation of the independent exponents and the torus search.

The torus search works in 64-bit fixed point: a fractional part x in [0, 1)
is stored as floor(x * 2**64) in a uint64, so l * theta mod 1 is plain
wrapping integer multiplication and the circle distance is the absolute
value of a wrapped difference.  Every hit is re-verified in exact rational
arithmetic before it is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .core import ExactReal, ExpSumError

_TWO64 = 1 << 64


class CapExhausted(ExpSumError):
    pass


class NotFound(ExpSumError):
    pass


@dataclass(frozen=True)
class RationalApprox:
    denom_b: int
    numers_a: tuple[int, ...]
    max_error: float

    @property
    def exact(self) -> bool:
        return self.max_error == 0.0

    def ratios(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(a, self.denom_b) for a in self.numers_a)

    def to_json(self) -> dict:
        return {"b": self.denom_b, "a": list(self.numers_a), "max_error": format(self.max_error, ".17g")}


def _admissible(a: Sequence[int]) -> bool:
    return all(x >= 1 for x in a) and all(x < y for x, y in zip(a, a[1:]))


def _exact_approx(t: Sequence[ExactReal]) -> RationalApprox | None:
    if not all(x.is_rational() for x in t):
        return None
    qs = [Fraction(x.as_dict().get("one", 0)) for x in t]
    b = 1
    for q in qs:
        b = b * q.denominator // math.gcd(b, q.denominator)
    a = tuple(int(q * b) for q in qs)
    return RationalApprox(b, a, 0.0)


def best_approximations(t: Sequence[ExactReal], b_cap: int) -> list[RationalApprox]:
    """All record-setting simultaneous approximations a/b with b <= b_cap.

    A denominator b is a record when max_k ||b t_k|| beats every smaller
    admissible denominator (rounding keeps 1 <= a_1 < ... < a_m).  For one
    irrational t these are exactly its continued-fraction convergents.
    """
    if not t:
        raise ValueError("t must be nonempty")
    vals = [float(x) for x in t]
    if any(v <= 0 for v in vals) or any(x >= y for x, y in zip(vals, vals[1:])):
        raise ValueError("t must be strictly increasing and positive")
    exact = _exact_approx(t)
    if exact is not None:
        return [exact]
    b = np.arange(1, b_cap + 1, dtype=float)
    prods = np.outer(b, vals)
    a = np.rint(prods)
    dist = np.abs(prods - a).max(axis=1)
    ok = np.all(a >= 1, axis=1)
    if len(vals) > 1:
        ok &= np.all(np.diff(a, axis=1) > 0, axis=1)
    out: list[RationalApprox] = []
    best = math.inf
    with mpmath.workdps(t[0].basis.dps):
        tm = [x.mpf() for x in t]
        for i in np.flatnonzero(ok):
            if dist[i] >= best:
                continue
            bi = int(i) + 1
            ai = tuple(int(mpmath.nint(bi * x)) for x in tm)
            if not _admissible(ai):
                continue
            exact_dist = max(abs(bi * x - k) for x, k in zip(tm, ai))
            if exact_dist >= best:
                continue
            best = float(exact_dist)
            err = float(max(abs(x - mpmath.mpf(k) / bi) for x, k in zip(tm, ai)))
            out.append(RationalApprox(bi, ai, err))
    return out


def approx_schedule(t: Sequence[ExactReal], levels: int, b_cap: int) -> list[RationalApprox]:
    """The ``levels`` best record approximations with denominator <= b_cap.

    Errors strictly decrease along the returned list.  Exactly rational
    input short-circuits to its single exact approximation.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    records = best_approximations(t, b_cap)
    if records and records[-1].exact:
        return [records[-1]]
    if len(records) < levels:
        raise CapExhausted(f"only {len(records)} admissible denominators up to b_cap={b_cap}")
    return records[-levels:]


# ---------------------------------------------------------------------------
# torus search


def exact_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, ExactReal):
        x = x.mpf()
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        return Fraction(int(man)) * (Fraction(2) ** int(exp))
    if isinstance(x, (int, float, np.floating, np.integer)):
        return Fraction(float(x)) if isinstance(x, (float, np.floating)) else Fraction(int(x))
    return Fraction(x)


def frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def circle_distance(x, y) -> float:
    d = abs(float(x) % 1.0 - float(y) % 1.0)
    return min(d, 1.0 - d)


def _circle_distance_exact(x: Fraction, y: Fraction) -> Fraction:
    d = abs(frac(x) - frac(y))
    return min(d, 1 - d)


def _fixed(x: Fraction) -> np.uint64:
    return np.uint64(math.floor(frac(x) * _TWO64) % _TWO64)


def _candidates(theta_fx, target_fx, eps_fx, l_max: int, chunk: int) -> Iterator[int]:
    m = len(theta_fx)
    if m == 0:
        yield 0
        return
    # l = 0 first, then 1, -1, 2, -2, ...
    if all(min(int(tf), _TWO64 - int(tf)) < eps_fx for tf in target_fx):
        yield 0
    k0 = 1
    while k0 <= l_max:
        k1 = min(l_max, k0 + chunk - 1)
        k = np.arange(k0, k1 + 1, dtype=np.uint64)
        hit_pos = np.ones(k.shape, dtype=bool)
        hit_neg = np.ones(k.shape, dtype=bool)
        for th, tg in zip(theta_fx, target_fx):
            x = k * th
            d_pos = (x - tg).view(np.int64)
            d_neg = (np.uint64(0) - x - tg).view(np.int64)
            # |d| < eps without overflowing on INT64_MIN
            hit_pos &= (d_pos > -eps_fx) & (d_pos < eps_fx)
            hit_neg &= (d_neg > -eps_fx) & (d_neg < eps_fx)
        for i in np.flatnonzero(hit_pos | hit_neg):
            if hit_pos[i]:
                yield int(k[i])
            if hit_neg[i]:
                yield -int(k[i])
        k0 = k1 + 1


def kronecker_search(theta: Sequence, target: Sequence[float], eps: float, l_max: int, *, chunk: int = 1 << 16) -> int:
    """First integer l in the order 0, 1, -1, 2, -2, ... with |l| <= l_max such that
    circle_distance(l * theta_k, target_k) < eps for every k.

    Raises NotFound when no such l exists in range.
    """
    if len(theta) != len(target):
        raise ValueError("theta and target must have equal length")
    if not eps > 0:
        raise ValueError("eps must be positive")
    eps = min(float(eps), 0.5)
    th = [exact_fraction(x) for x in theta]
    tg = [exact_fraction(float(y)) for y in target]
    eps_q = Fraction(eps)
    theta_fx = [_fixed(x) for x in th]
    target_fx = [_fixed(y) for y in tg]
    # fixed-point truncation moves l*theta by at most l_max * 2**-64 per coordinate
    slack = (l_max + 2) * len(th)
    eps_fx = max(int(eps_q * _TWO64) - slack, 1)
    eps_fx = min(eps_fx, (1 << 63) - 1)
    for l in _candidates(theta_fx, target_fx, eps_fx, l_max, chunk):
        if all(_circle_distance_exact(l * x, y) < eps_q for x, y in zip(th, tg)):
            return l
    raise NotFound(f"no l with |l| <= {l_max} within eps={eps}")
