"""Adaptive Gauss-Kronrod (7/15) integration of f'/f along contour pieces."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ExpSum, ExpSumError

# 15-point Kronrod nodes on [-1, 1] with the embedded 7-point Gauss rule
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

X15 = np.concatenate([-_XK[:-1], _XK[::-1]])
W15 = np.concatenate([_WK[:-1], _WK[::-1]])
W7 = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (+-x1, +-x3, +-x5) and 0
for i, w in zip((1, 3, 5), _WG[:3]):
    W7[i] = w
    W7[14 - i] = w
W7[7] = _WG[3]


class ZeroOnBoundary(ExpSumError):
    pass


@dataclass(frozen=True)
class QuadParams:
    """Tolerances for contour integrals of f'/f.

    ``abs_tol`` bounds the error of the winding number (integral / 2*pi);
    ``resolution`` multiplies the initial panel density.
    """

    abs_tol: float = 1e-3
    resolution: float = 1.0
    boundary_floor: float = 1e-12
    max_panels: int = 400_000

    def refined(self) -> "QuadParams":
        return QuadParams(self.abs_tol / 10, self.resolution * 2, self.boundary_floor, self.max_panels)

    def doubled(self) -> "QuadParams":
        return QuadParams(self.abs_tol / 2, self.resolution * 2, self.boundary_floor, self.max_panels)


class Segment:
    def __init__(self, a: complex, b: complex):
        self.a, self.b = complex(a), complex(b)
        self.length = abs(self.b - self.a)
        self.origin = self.a

    def z(self, s):
        return self.a + (self.b - self.a) * s

    def dz(self, s):
        return np.full(np.shape(s), self.b - self.a, dtype=complex)


class Circle:
    def __init__(self, center: complex, radius: float):
        self.center, self.radius = complex(center), float(radius)
        self.length = 2 * math.pi * self.radius
        self.origin = self.center

    def z(self, s):
        return self.center + self.radius * np.exp(2j * math.pi * s)

    def dz(self, s):
        return 2j * math.pi * self.radius * np.exp(2j * math.pi * s)


@dataclass
class PathIntegral:
    log_deriv: complex      # integral of f'/f dz
    moment: complex         # integral of (z - origin) f'/f dz
    min_rel_modulus: float  # smallest |f| / sum|terms| seen at a node
    min_abs: float          # smallest |f| seen at a node
    panels: int


def integrate_path(f: ExpSum, path, tol: float, resolution: float = 1.0, *,
                   boundary_floor: float = 1e-12, max_panels: int = 400_000,
                   min_panels: int = 2, track_abs: bool = False) -> PathIntegral:
    span = max(f.span, 1.0)
    n0 = max(min_panels, int(math.ceil(resolution * path.length * span / 1.5)))
    edges = np.linspace(0.0, 1.0, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    total0 = total1 = 0j
    min_rel = math.inf
    min_abs = math.inf
    used = 0
    scale = max(path.length, 1e-300)
    while lo.size:
        used += lo.size
        if used > max_panels:
            raise ZeroOnBoundary("contour integral did not resolve (zero on or very near the path)")
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        s = mid[:, None] + half[:, None] * X15[None, :]
        z = path.z(s)
        g = f.log_derivative(z) * path.dz(s)
        rel = f.relative_modulus(z)
        if not np.all(np.isfinite(g)) or rel.min() < boundary_floor:
            raise ZeroOnBoundary(f"|f| below floor on contour near {z.flat[int(np.argmin(rel))]:.6g}")
        min_rel = min(min_rel, float(rel.min()))
        if track_abs:
            min_abs = min(min_abs, float(np.abs(f(z)).min()))
        gm = g * (z - path.origin)
        k0 = half * (g @ W15)
        g0 = half * (g @ W7)
        k1 = half * (gm @ W15)
        g1 = half * (gm @ W7)
        err = np.maximum(np.abs(k0 - g0), np.abs(k1 - g1) / scale)
        ok = err <= tol * (hi - lo)
        total0 += k0[ok].sum()
        total1 += k1[ok].sum()
        lo_bad, hi_bad = lo[~ok], hi[~ok]
        mid_bad = 0.5 * (lo_bad + hi_bad)
        lo = np.concatenate([lo_bad, mid_bad])
        hi = np.concatenate([mid_bad, hi_bad])
    return PathIntegral(total0, total1, min_rel, min_abs, used)
