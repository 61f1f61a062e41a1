"""Exact linear algebra over Q and the reduction of an exponential sum to a
polynomial in exponentials of independent reals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import ExactReal, ExpSum, is_normalized, linear_combination


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form (in place on a copy) and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    n_cols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def integer_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Clear denominators, divide out the content, make the first nonzero entry positive."""
    den = 1
    for q in v:
        den = den * q.denominator // math.gcd(den, q.denominator)
    ints = [int(q * den) for q in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g:
        ints = [x // g for x in ints]
    first = next((x for x in ints if x), 0)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def rational_rank(vectors: Sequence[Sequence]) -> tuple[int, list[tuple[int, ...]]]:
    """Rank of a list of rational vectors and integer generators of their relations.

    A dependency ``lam`` satisfies ``sum_i lam[i] * vectors[i] == 0`` exactly.
    """
    k = len(vectors)
    if k == 0:
        return 0, []
    dim = len(vectors[0])
    if any(len(v) != dim for v in vectors):
        raise ValueError("vectors must all have the same length")
    # columns are the input vectors; the kernel of this matrix is the relation space
    cols = [[Fraction(x) for x in v] for v in vectors]
    rows = [[cols[j][i] for j in range(k)] for i in range(dim)]
    red, pivots = _rref(rows)
    deps = []
    for free in (j for j in range(k) if j not in pivots):
        lam = [Fraction(0)] * k
        lam[free] = Fraction(1)
        for row, p in zip(red, pivots):
            lam[p] = -row[free]
        deps.append(integer_vector(lam))
    return len(pivots), deps


def solve_rational(rows: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> list[Fraction] | None:
    """Coefficients s with sum_j s[j] * rows[j] == target, or None if target is outside the span."""
    m = len(rows)
    dim = len(target)
    aug = [[Fraction(rows[j][i]) for j in range(m)] + [Fraction(target[i])] for i in range(dim)]
    red, pivots = _rref(aug)
    if m in pivots:
        return None
    s = [Fraction(0)] * m
    for row, p in zip(red, pivots):
        s[p] = row[m]
    return s


# ---------------------------------------------------------------------------
# reduction to p(e^{t_1 z}, ..., e^{t_m z}) = 0


@dataclass(frozen=True)
class Step1Reduction:
    """f(d*z) * e^{(offset . t) z} == sum_k coeffs[k] * prod_j e^{vectors[k][j] t_j z}.

    ``vectors`` are the cleared (nonnegative) exponent vectors; the Laurent
    vectors of the raw substitution are ``vectors[k] - clearing_offset``.
    Term k corresponds to term k of the normalized input sum.
    """

    basis_t: tuple[ExactReal, ...]
    coeffs: tuple[complex, ...]
    vectors: tuple[tuple[int, ...], ...]
    scale_d: int
    clearing_offset: tuple[int, ...]
    source: ExpSum

    @property
    def m(self) -> int:
        return len(self.basis_t)

    @property
    def t_float(self) -> np.ndarray:
        return np.array([float(t) for t in self.basis_t])

    @property
    def laurent_vectors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(e - o for e, o in zip(v, self.clearing_offset)) for v in self.vectors)

    def poly(self, w: Sequence[complex]) -> complex:
        """The cleared polynomial p evaluated at a point of C^m."""
        w = np.asarray(w, dtype=complex)
        return complex(sum(c * np.prod(w ** np.array(v)) for c, v in zip(self.coeffs, self.vectors)))

    def monomial_exponents(self) -> list[ExactReal]:
        """k . t for every monomial k, as exact reals."""
        basis = self.source.basis
        return [linear_combination(basis, zip(v, self.basis_t)) for v in self.vectors]

    def as_expsum(self, alpha: Sequence[complex] | None = None) -> ExpSum:
        """z -> p(alpha_1 e^{t_1 z}, ..., alpha_m e^{t_m z}) as an exponential sum."""
        if alpha is None:
            alpha = [1.0] * self.m
        alpha = np.asarray(alpha, dtype=complex)
        terms = []
        for c, v, r in zip(self.coeffs, self.vectors, self.monomial_exponents()):
            terms.append((complex(c * np.prod(alpha ** np.array(v))), r))
        terms.sort(key=lambda t: float(t[1]))
        return ExpSum([(c, r) for c, r in terms if c != 0])

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "basis_t": [t.to_json() for t in self.basis_t],
            "scale_d": self.scale_d,
            "clearing_offset": list(self.clearing_offset),
            "monomials": [list(v) for v in self.vectors],
        }


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def reduce_step1(f: ExpSum) -> Step1Reduction:
    """Rewrite a normalized sum as p(e^{t_1 z}, ..., e^{t_m z}) after z -> d*z.

    The t_j are picked greedily, smallest first, among the positive
    exponents; each exponent is then written over them exactly.
    """
    if not is_normalized(f):
        raise ValueError("reduce_step1 needs a normalized sum (smallest exponent 0)")
    if f.is_single_term:
        raise ValueError("reduce_step1 needs at least two terms")
    names = f.basis.names
    positives = [r for _, r in f.terms[1:]]
    chosen: list[ExactReal] = []
    rank = 0
    for r in positives:
        trial, _ = rational_rank([t.vector(names) for t in chosen] + [r.vector(names)])
        if trial > rank:
            chosen.append(r)
            rank = trial
    rows = [t.vector(names) for t in chosen]
    coords = []
    for _, r in f.terms:
        s = solve_rational(rows, r.vector(names))
        assert s is not None, "exponent outside the span of the chosen basis"
        coords.append(s)
    d = _lcm(q.denominator for s in coords for q in s)
    laurent = [tuple(int(q * d) for q in s) for s in coords]
    m = len(chosen)
    offset = tuple(max(0, -min(v[j] for v in laurent)) for j in range(m))
    cleared = tuple(tuple(e + o for e, o in zip(v, offset)) for v in laurent)
    return Step1Reduction(
        basis_t=tuple(chosen),
        coeffs=tuple(c for c, _ in f.terms),
        vectors=cleared,
        scale_d=d,
        clearing_offset=offset,
        source=f,
    )
