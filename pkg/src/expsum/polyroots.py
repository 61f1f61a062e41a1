"""Sparse univariate polynomials: specialization, root annulus, root finding."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .approx import RationalApprox
from .core import ExpSumError
from .qlinalg import Step1Reduction

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
DEFAULT_DEGREE_CAP = 20000


class Degenerate(ExpSumError):
    pass


class DegreeCap(ExpSumError):
    pass


class NoConvergence(ExpSumError):
    def __init__(self, message: str, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


@dataclass(frozen=True)
class SparsePoly:
    """sum_j coeffs[j] * w**exps[j] with exps strictly increasing."""

    coeffs: tuple[complex, ...]
    exps: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.exps) or not self.exps:
            raise ValueError("need matching, nonempty coeffs and exps")
        if any(e < 0 for e in self.exps) or any(a >= b for a, b in zip(self.exps, self.exps[1:])):
            raise ValueError("exponents must be nonnegative and strictly increasing")
        if any(c == 0 for c in self.coeffs):
            raise ValueError("coefficients must be nonzero")

    @classmethod
    def from_terms(cls, terms) -> "SparsePoly":
        acc: dict[int, complex] = {}
        for c, e in terms:
            acc[int(e)] = acc.get(int(e), 0j) + complex(c)
        items = sorted((e, c) for e, c in acc.items() if c != 0)
        return cls(tuple(c for _, c in items), tuple(e for e, _ in items))

    @property
    def degree(self) -> int:
        return self.exps[-1]

    @property
    def has_constant(self) -> bool:
        return self.exps[0] == 0

    def dense(self) -> np.ndarray:
        """Coefficients in increasing degree order."""
        out = np.zeros(self.degree + 1, dtype=complex)
        out[list(self.exps)] = self.coeffs
        return out

    def _scaled(self, w):
        # terms c_j w^{e_j} divided by the largest |w|^{e_j}; safe for huge degrees
        w = np.asarray(w, dtype=complex)
        e = np.array(self.exps, dtype=float)
        c = np.array(self.coeffs, dtype=complex)
        with np.errstate(divide="ignore"):
            lw = np.log(w)
        lw = np.where(w == 0, -745.0 + 0j, lw)
        expo = np.multiply.outer(lw, e)
        top = expo.real.max(axis=-1, keepdims=True)
        terms = c * np.exp(expo - top)
        return w, e, terms, top[..., 0]

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        e = np.array(self.exps)
        out = (w[..., None] ** e) @ np.array(self.coeffs, dtype=complex)
        return out[()] if out.ndim == 0 else out

    def newton_ratio(self, w):
        """p(w)/p'(w), computed in scaled form."""
        w, e, terms, _ = self._scaled(w)
        p = terms.sum(axis=-1)
        dp = (terms * e).sum(axis=-1) / w
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return p / dp

    def backward_error(self, w):
        """|p(w)| / sum_j |c_j w^{e_j}|."""
        _, _, terms, _ = self._scaled(w)
        return np.abs(terms.sum(axis=-1)) / np.abs(terms).sum(axis=-1)

    def log_newton_step(self, u):
        """Newton step for h(u) = p(e^u) in the logarithmic coordinate."""
        w = np.exp(np.asarray(u, dtype=complex))
        _, e, terms, _ = self._scaled(w)
        h = terms.sum(axis=-1)
        dh = (terms * e).sum(axis=-1)
        return h / dh

    def to_json(self) -> dict:
        return {"degree": self.degree, "n_monomials": len(self.exps), "exps": list(self.exps)}


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float

    def contains(self, w: complex, slack: float = 0.0) -> bool:
        a = abs(w)
        return self.r_inner - slack <= a <= self.r_outer + slack


def specialize(red: Step1Reduction, ra: RationalApprox) -> SparsePoly:
    """Substitute w_j = w^{a_j}: the univariate polynomial of one approximation level.

    Exponents are taken from the Laurent vectors and shifted so the smallest
    is 0 (w is never 0, so dividing by a power of w keeps the roots).
    """
    a = ra.numers_a
    if len(a) != red.m:
        raise ValueError("approximation dimension does not match the reduction")
    univ = [sum(e * x for e, x in zip(v, a)) for v in red.laurent_vectors]
    low = min(univ)
    acc: dict[int, complex] = {}
    for c, u in zip(red.coeffs, univ):
        acc[u - low] = acc.get(u - low, 0j) + c
    cancelled = [e for e, c in acc.items() if c == 0]
    items = sorted((e, c) for e, c in acc.items() if c != 0)
    if 0 in cancelled or len(items) < 2 or items[0][0] != 0:
        raise Degenerate(f"specialization at b={ra.denom_b} cancels to {len(items)} monomial(s)")
    return SparsePoly(tuple(c for _, c in items), tuple(e for e, _ in items))


def root_annulus(p: SparsePoly) -> Annulus:
    """All roots satisfy R0^(1/m) <= |w| <= R1^(1/(N-n)).

    m is the smallest positive exponent, n the largest exponent below N, and
    the sums run over the monomials strictly between the constant and the
    leading term.
    """
    if not p.has_constant or len(p.exps) < 2:
        raise ValueError("root_annulus needs a constant term and at least two monomials")
    N = p.degree
    c0 = abs(p.coeffs[0])
    cN = abs(p.coeffs[-1])
    middle = sum(abs(c) for c in p.coeffs[1:-1])
    m = p.exps[1]
    n = p.exps[-2]
    R1 = max(1.0, (c0 + middle) / cN)
    R0 = min(1.0, c0 / (cN + middle))
    return Annulus(R0 ** (1.0 / m), R1 ** (1.0 / (N - n)))


def initial_guesses(p: SparsePoly, ann: Annulus) -> np.ndarray:
    """N points on three concentric circles inside the annulus, golden-angle spaced."""
    N = p.degree
    lo, hi = math.log(ann.r_inner), math.log(ann.r_outer)
    radii = np.exp(lo + (hi - lo) * np.array([0.25, 0.5, 0.75]))
    i = np.arange(N)
    return radii[i % 3] * np.exp(1j * (GOLDEN_ANGLE * i + 0.4))


def _aberth_sums(x: np.ndarray, block: int = 2048) -> np.ndarray:
    n = len(x)
    out = np.empty(n, dtype=complex)
    for s in range(0, n, block):
        d = x[s : s + block, None] - x[None, :]
        idx = np.arange(min(block, n - s))
        d[idx, s + idx] = np.inf
        out[s : s + block] = (1.0 / d).sum(axis=1)
    return out


def find_roots(p: SparsePoly, tol: float = 1e-12, *, max_iter: int = 200, degree_cap: int = DEFAULT_DEGREE_CAP) -> np.ndarray:
    """All N roots (with multiplicity) by Aberth-Ehrlich simultaneous iteration."""
    N = p.degree
    if N > degree_cap:
        raise DegreeCap(f"degree {N} exceeds cap {degree_cap}")
    lead_zero = p.exps[0]
    q = p
    if lead_zero:
        # factor out w^k: k roots at 0
        q = SparsePoly(p.coeffs, tuple(e - lead_zero for e in p.exps))
    if q.degree == 0:
        return np.zeros(lead_zero, dtype=complex)
    if len(q.exps) == 2:
        # binomial: closed form
        k = q.degree
        rho = (-q.coeffs[0] / q.coeffs[1]) ** (1.0 / k)
        roots = rho * np.exp(2j * np.pi * np.arange(k) / k)
        return np.concatenate([roots, np.zeros(lead_zero, dtype=complex)])
    x = initial_guesses(q, root_annulus(q))
    active = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        ratio = q.newton_ratio(x)
        s = _aberth_sums(x)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            corr = ratio / (1.0 - ratio * s)
        corr = np.where(np.isfinite(corr), corr, 0.0)
        corr[~active] = 0.0
        x = x - corr
        done = np.abs(corr) <= tol * np.maximum(1.0, np.abs(x))
        active &= ~done
        if not active.any():
            break
    else:
        res = q.backward_error(x)
        raise NoConvergence(f"Aberth iteration did not converge in {max_iter} steps", x, res)
    return np.concatenate([x, np.zeros(lead_zero, dtype=complex)])


def _winding_on_circle(p: SparsePoly, center: complex, radius: float, samples: int = 64, max_samples: int = 1 << 14) -> int | None:
    while samples <= max_samples:
        w = center + radius * np.exp(2j * np.pi * np.arange(samples) / samples)
        _, _, terms, top = p._scaled(w)
        val = terms.sum(axis=-1)
        # restore the dropped magnitudes' phases: top is real, so only |.| changes
        if np.any(val == 0):
            return None
        step = np.angle(np.roll(val, -1) / val)
        if np.abs(step).max() < math.pi / 3:
            return int(round(step.sum() / (2 * math.pi)))
        samples *= 4
    return None


def find_one_root(p: SparsePoly, w0: complex | None = None, tol: float = 1e-14, *, max_iter: int = 200) -> complex:
    """One certified root, by Newton iteration in log coordinates from w0.

    The root is accepted once a small circle around it has winding number 1
    for p.  Without a start point, seeds are tried on the root annulus.
    """
    if w0 is None:
        ann = root_annulus(p)
        seeds = [math.sqrt(ann.r_inner * ann.r_outer) * np.exp(1j * (0.3 + GOLDEN_ANGLE * k)) for k in range(16)]
    else:
        seeds = [complex(w0)]
    N = p.degree
    for seed in seeds:
        if seed == 0:
            continue
        u = complex(np.log(seed))
        for _ in range(max_iter):
            step = complex(p.log_newton_step(u))
            if not np.isfinite(step):
                break
            # damp huge steps in the log coordinate
            if abs(step) > 1.0:
                step = step / abs(step)
            u -= step
            if abs(step) <= tol * max(1.0, abs(u)):
                break
        else:
            continue
        w = complex(np.exp(u))
        if not np.isfinite(w) or p.backward_error(w) > 1e-8:
            continue
        for scale in (0.5, 0.1, 0.01):
            radius = scale * abs(w) / max(N, 1)
            if _winding_on_circle(p, w, radius) == 1:
                return w
    raise NoConvergence("no certified root found from the given seeds")
