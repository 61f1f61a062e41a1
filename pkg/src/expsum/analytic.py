"""Analytic engine: strip bounds, argument-principle counting, subdivision
localization, Newton polishing and disk certificates."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ExpSum, ExpSumError, Rectangle, ZeroCertificate
from .qlinalg import Step1Reduction
from .quadrature import Circle, PathIntegral, QuadParams, Segment, ZeroOnBoundary, integrate_path

STRIP_PAD = 0.5
MAX_JITTER = 1e-3
JITTER_RETRIES = 5
CELL_DIAMETER = 0.1
CERT_RADIUS = 0.05

__all__ = [
    "StripBound", "RoucheData", "CertificationError", "ZeroOnBoundary", "QuadParams",
    "strip_bounds", "winding_number", "count_zeros", "locate_zeros", "rouche_certificate",
    "validate_certificate", "omega_radius", "newton_polish", "ContourCache",
]


class CertificationError(ExpSumError):
    def __init__(self, message: str, winding: int | None = None):
        super().__init__(message)
        self.winding = winding


@dataclass(frozen=True)
class StripBound:
    x_min: float
    x_max: float

    def padded(self, pad: float = STRIP_PAD) -> "StripBound":
        return StripBound(self.x_min - pad, self.x_max + pad)

    def clip(self, rect: Rectangle, pad: float = STRIP_PAD) -> Rectangle | None:
        lo = max(rect.x_min, self.x_min - pad)
        hi = min(rect.x_max, self.x_max + pad)
        if lo >= hi:
            return None
        return Rectangle(lo, hi, rect.y_min, rect.y_max)


@dataclass(frozen=True)
class RoucheData:
    m1: float
    m2: float
    s_count: int
    omega_radius: float

    def to_json(self) -> dict:
        return {"m1": format(self.m1, ".17g"), "m2": format(self.m2, ".17g"),
                "s_count": self.s_count, "omega_radius": format(self.omega_radius, ".17g")}


def strip_bounds(f: ExpSum) -> StripBound:
    """Vertical strip that contains every zero of f.

    To the right of x_max each lower term is below 1/n of the top term, so
    the top term beats the rest by the triangle inequality; to the left of
    x_min the bottom term wins the same way.
    """
    f.require_solvable()
    r = f.exponents - f.exponents[0]
    a = np.abs(f.coeffs)
    n = len(r) - 1
    x_max = max(math.log(n * a[k] / a[n]) / (r[n] - r[k]) for k in range(n))
    x_min = min(math.log(a[0] / (n * a[k])) / r[k] for k in range(1, n + 1))
    return StripBound(float(x_min), float(x_max))


# ---------------------------------------------------------------------------
# contour integrals


class ContourCache:
    """Edge integrals keyed by endpoints; a reversed edge reuses the negated value."""

    def __init__(self):
        self._edges: dict[tuple, PathIntegral] = {}
        self.hits = 0

    def edge(self, f: ExpSum, a: complex, b: complex, quad: QuadParams) -> tuple[complex, complex, complex]:
        """(integral of f'/f, integral of (z - a) f'/f, start point) along a -> b."""
        key = (a.real, a.imag, b.real, b.imag, quad)
        rkey = (b.real, b.imag, a.real, a.imag, quad)
        if key in self._edges:
            self.hits += 1
            pi = self._edges[key]
            return pi.log_deriv, pi.moment, a
        if rkey in self._edges:
            # integral over a -> b of (z - b) g = -(moment of b -> a)
            self.hits += 1
            pi = self._edges[rkey]
            return -pi.log_deriv, -pi.moment, b
        tol = 2 * math.pi * quad.abs_tol / 4
        pi = integrate_path(f, Segment(a, b), tol, quad.resolution,
                            boundary_floor=quad.boundary_floor, max_panels=quad.max_panels)
        self._edges[key] = pi
        return pi.log_deriv, pi.moment, a


def _round_winding(total: complex) -> tuple[int, float]:
    w = total / (2j * math.pi)
    k = int(round(w.real))
    return k, max(abs(w.real - k), abs(w.imag))


def _rect_integral(f: ExpSum, rect: Rectangle, quad: QuadParams, cache: ContourCache) -> tuple[complex, complex]:
    """Sum over edges of f'/f, and of (z - center) f'/f."""
    c = rect.center
    corners = rect.corners()
    i0 = m = 0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        e0, e1, origin = cache.edge(f, a, b, quad)
        i0 += e0
        m += e1 + (origin - c) * e0
    return i0, m


def _winding_and_moment(f: ExpSum, rect: Rectangle, quad: QuadParams, cache: ContourCache) -> tuple[int, complex, QuadParams]:
    q = quad
    for _ in range(4):
        i0, mom = _rect_integral(f, rect, q, cache)
        k, gap = _round_winding(i0)
        if gap < 0.25:
            return k, mom / (2j * math.pi), q
        q = q.refined()
    raise ZeroOnBoundary(f"winding number did not settle on {rect}")


def winding_number(f: ExpSum, rect: Rectangle, quad: QuadParams | None = None,
                   cache: ContourCache | None = None) -> int:
    """Number of zeros of f inside rect (with multiplicity), by the argument principle."""
    quad = quad or QuadParams()
    cache = cache if cache is not None else ContourCache()
    return _winding_and_moment(f, rect, quad, cache)[0]


def _seed(*coords: float) -> int:
    return zlib.crc32(np.asarray(coords, dtype=float).tobytes())


def jittered(rect: Rectangle, attempt: int) -> Rectangle:
    """Deterministic perturbation of every side by at most MAX_JITTER."""
    if attempt == 0:
        return rect
    rng = np.random.default_rng([_seed(rect.x_min, rect.x_max, rect.y_min, rect.y_max), attempt])
    d = rng.uniform(-MAX_JITTER, MAX_JITTER, size=4)
    return Rectangle(rect.x_min + d[0], rect.x_max + d[1], rect.y_min + d[2], rect.y_max + d[3])


def _with_jitter(f, rect, quad, cache):
    last = None
    for attempt in range(JITTER_RETRIES + 1):
        r = jittered(rect, attempt)
        try:
            k, mom, q = _winding_and_moment(f, r, quad, cache)
            return r, k, mom, q
        except ZeroOnBoundary as exc:
            last = exc
    raise ZeroOnBoundary(f"zero on the boundary after {JITTER_RETRIES} jitter retries: {last}")


def count_zeros(f: ExpSum, rect: Rectangle, quad: QuadParams | None = None, *,
                cache: ContourCache | None = None, pad: float = STRIP_PAD) -> int:
    """Zeros in rect, after clipping it to the (padded) strip; jitters on boundary zeros."""
    quad = quad or QuadParams()
    cache = cache if cache is not None else ContourCache()
    clipped = strip_bounds(f).clip(rect, pad)
    if clipped is None:
        return 0
    return _with_jitter(f, clipped, quad, cache)[1]


# ---------------------------------------------------------------------------
# Newton and certificates


def newton_polish(f: ExpSum, z0: complex, *, max_iter: int = 60) -> tuple[complex, float]:
    """Newton iteration z -> z - f/f'; returns the best iterate and |f| there."""
    z = complex(z0)
    best = (z, float(abs(f(z))))
    for _ in range(max_iter):
        ld = complex(f.log_derivative(z))
        if not np.isfinite(ld) or ld == 0:
            break
        step = 1.0 / ld
        z = z - step
        res = float(abs(f(z)))
        if res < best[1]:
            best = (z, res)
        if abs(step) <= 4e-16 * max(1.0, abs(z)):
            break
    return best


def _circle_winding(f: ExpSum, center: complex, radius: float, quad: QuadParams) -> tuple[int, complex, float]:
    q = quad
    for _ in range(4):
        pi = integrate_path(f, Circle(center, radius), 2 * math.pi * q.abs_tol, q.resolution,
                            boundary_floor=q.boundary_floor, max_panels=q.max_panels,
                            min_panels=8, track_abs=True)
        k, gap = _round_winding(pi.log_deriv)
        if gap < 0.25:
            return k, pi.moment / (2j * math.pi), pi.min_abs
        q = q.refined()
    raise ZeroOnBoundary(f"winding number on the circle |z - {center}| = {radius} did not settle")


def rouche_certificate(f: ExpSum, center: complex, radius: float, *, tol: float = 1e-9,
                       quad: QuadParams | None = None, expected: int = 1) -> ZeroCertificate:
    """Certify that the disk B(center, radius) holds exactly ``expected`` zeros.

    Raises CertificationError carrying the winding number on mismatch.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    quad = quad or QuadParams()
    center = complex(center)
    k, moment, min_abs = _circle_winding(f, center, radius, quad)
    if k != expected:
        raise CertificationError(f"winding {k} on disk (center {center}, radius {radius})", winding=k)
    if not min_abs > 0:
        raise ZeroOnBoundary("|f| underflows on the certificate circle")
    # moment / k is the mean of the enclosed zeros relative to the center
    guess = center + moment / k
    if abs(guess - center) >= radius:
        guess = center
    z, res = newton_polish(f, guess)
    if abs(z - center) >= radius:
        z = guess
    # finish in extended precision: far up the strip the double phases r_k*Im z lose digits
    if k == 1:
        zp, res = f.newton_mp(z)
        if abs(zp - center) < radius:
            z = zp
        else:
            res = float(abs(f.eval_mp(z)))
    else:
        res = float(abs(f.eval_mp(z)))
    return ZeroCertificate(z_star=z, radius=float(radius), winding=k,
                           min_boundary_modulus=min_abs, residual=res, center=center)


def validate_certificate(f: ExpSum, cert: ZeroCertificate, tol: float = 1e-9,
                         quad: QuadParams | None = None) -> bool:
    """Re-run the disk winding and the residual test for a stored certificate."""
    if abs(cert.z_star - cert.center) >= cert.radius:
        return False
    if not abs(f.eval_mp(cert.z_star)) < tol:
        return False
    try:
        k, _, _ = _circle_winding(f, cert.center, cert.radius, quad or QuadParams())
    except ZeroOnBoundary:
        return False
    return k == cert.winding


def omega_radius(red: Step1Reduction, alpha: Sequence[complex], center: complex, radius: float,
                 *, samples: int = 4096) -> RoucheData:
    """Size of the monomial-wise perturbation of alpha that keeps a zero in the disk.

    F(z) = p(alpha_1 e^{t_1 z}, ...).  m1 is the sampled minimum of |F| on the
    circle (times 0.9), m2 the largest monomial |c_k e^{(k.t) z}| there (times
    1.1), and the radius is m1 / (2 |S| m2).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    F = red.as_expsum(alpha)
    z = complex(center) + radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = np.abs(F(z))
    rel = F.relative_modulus(z)
    if not np.all(np.isfinite(vals)) or rel.min() < 1e-12 or vals.min() == 0:
        raise ZeroOnBoundary("F vanishes (numerically) on the boundary circle")
    kt = np.array([float(r) for r in red.monomial_exponents()])
    mono = np.abs(np.array(red.coeffs))[None, :] * np.exp(np.outer(z.real, kt))
    m1 = 0.9 * float(vals.min())
    m2 = 1.1 * float(mono.max())
    s = len(red.vectors)
    return RoucheData(m1, m2, s, m1 / (2 * s * m2))


# ---------------------------------------------------------------------------
# subdivision


def _split(rect: Rectangle, fx: float, fy: float) -> list[Rectangle]:
    """Quadrants, or halves along the long side when the cell is elongated."""
    xm = rect.x_min + fx * rect.width
    ym = rect.y_min + fy * rect.height
    if rect.height > 2 * rect.width:
        return [Rectangle(rect.x_min, rect.x_max, rect.y_min, ym), Rectangle(rect.x_min, rect.x_max, ym, rect.y_max)]
    if rect.width > 2 * rect.height:
        return [Rectangle(rect.x_min, xm, rect.y_min, rect.y_max), Rectangle(xm, rect.x_max, rect.y_min, rect.y_max)]
    return [
        Rectangle(rect.x_min, xm, rect.y_min, ym),
        Rectangle(xm, rect.x_max, rect.y_min, ym),
        Rectangle(xm, rect.x_max, ym, rect.y_max),
        Rectangle(rect.x_min, xm, ym, rect.y_max),
    ]


def _children(f, rect, k, quad, cache):
    rng = np.random.default_rng(_seed(rect.x_min, rect.x_max, rect.y_min, rect.y_max))
    last = None
    for attempt in range(JITTER_RETRIES + 1):
        fx, fy = (0.5, 0.5) if attempt == 0 else tuple(0.5 + rng.uniform(-0.05, 0.05, size=2))
        kids = _split(rect, fx, fy)
        try:
            res = [_winding_and_moment(f, c, quad, cache) for c in kids]
        except ZeroOnBoundary as exc:
            last = exc
            continue
        if sum(r[0] for r in res) != k:
            last = ZeroOnBoundary(f"child windings do not add up to {k} in {rect}")
            quad = quad.refined()
            continue
        return [(c, r[0], r[1]) for c, r in zip(kids, res)]
    raise ZeroOnBoundary(f"could not split {rect}: {last}")


def locate_zeros(f: ExpSum, rect: Rectangle, tol: float = 1e-9, *, quad: QuadParams | None = None,
                 cache: ContourCache | None = None, clip: bool = True) -> list[ZeroCertificate]:
    """Certified zeros of f inside rect, sorted by imaginary then real part.

    The count equals the winding number of the (clipped, possibly jittered)
    rectangle; a multiple zero yields one certificate whose winding is its
    multiplicity.
    """
    quad = quad or QuadParams()
    cache = cache if cache is not None else ContourCache()
    if clip:
        rect = strip_bounds(f).clip(rect)
        if rect is None:
            return []
    root, k, mom, _ = _with_jitter(f, rect, quad, cache)
    stack = [(root, k, mom)]
    cells: list[tuple[Rectangle, int, complex]] = []
    while stack:
        r, k, mom = stack.pop()
        if k == 0:
            continue
        if (k == 1 and r.diameter < CELL_DIAMETER) or r.diameter < 1e-9:
            guess = r.center + mom / k
            if not r.contains(guess, pad=0.1 * r.diameter):
                guess = r.center
            z, res = newton_polish(f, guess) if k == 1 else (guess, float(abs(f(guess))))
            if k == 1 and not r.contains(z, pad=0.25 * r.diameter) and r.diameter > 1e-6:
                stack.extend(_children(f, r, k, quad, cache))
                continue
            cells.append((r, k, z if r.contains(z, pad=0.25 * r.diameter) else guess))
            continue
        try:
            stack.extend(_children(f, r, k, quad, cache))
        except ZeroOnBoundary:
            if k == 1:
                raise
            # a multiple zero (or a tight cluster): |f| hits the floor on every split line
            cells.append((r, k, r.center + mom / k))

    zs = np.array([z for _, _, z in cells], dtype=complex)
    certs = []
    for i, (r, k, z) in enumerate(cells):
        others = np.delete(zs, i)
        gap = float(np.abs(others - z).min()) if others.size else math.inf
        radius = min(CERT_RADIUS, 0.45 * gap)
        if k > 1:
            radius = max(min(radius, 2 * r.diameter), 1e-8)
        cert = None
        for _ in range(8):
            try:
                cert = rouche_certificate(f, z, radius, tol=tol, quad=quad, expected=k)
                break
            except (CertificationError, ZeroOnBoundary):
                radius *= 0.5
        if cert is None:
            raise CertificationError(f"could not certify the zero near {z}")
        certs.append(cert)
    certs.sort(key=lambda c: (c.z_star.imag, c.z_star.real))
    return certs
