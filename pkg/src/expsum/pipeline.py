"""Constructive engine: reduction to a polynomial in independent exponentials,
rational approximation levels, clustering, torus search and a final disk
certificate on the original sum."""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath
import numpy as np

from .analytic import (CertificationError, ContourCache, QuadParams, ZeroOnBoundary, locate_zeros,
                       omega_radius, rouche_certificate, strip_bounds)
from .approx import CapExhausted, NotFound, RationalApprox, approx_schedule, best_approximations, kronecker_search
from .closedness import check_free_and_rotund, powers_problem_from_expsum
from .core import ExpSum, ExpSumError, Rectangle, ZeroCertificate, complex_to_json, fmt_real, is_normalized
from .polyroots import DEFAULT_DEGREE_CAP, Degenerate, NoConvergence, SparsePoly, find_one_root, find_roots, specialize
from .qlinalg import Step1Reduction, rational_rank, reduce_step1

TRACE_SCHEMA = "trace-v1"
TWO_PI = 2 * math.pi
DISK_RADII = (0.5, 0.25, 0.1, 0.05, 0.02, 0.01)
MIN_LEVELS = 3


class BudgetExhausted(ExpSumError):
    def __init__(self, message: str, trace: "Trace | None" = None):
        super().__init__(message)
        self.trace = trace


class NotFreeAndRotund(ExpSumError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class ConstructiveParams:
    levels: int = 8
    b_cap: int = 8192
    cluster_tol: float = 1e-2
    l_max: int = 10_000_000
    tol: float = 1e-9
    start_index: int = 0
    fallback: bool = True
    degree_cap: int = DEFAULT_DEGREE_CAP
    threads: int | None = None


@dataclass
class Trace:
    step1: dict = field(default_factory=dict)
    levels: list = field(default_factory=list)
    cluster: dict = field(default_factory=dict)
    step3: dict = field(default_factory=dict)
    step4: dict = field(default_factory=dict)
    result: ZeroCertificate | None = None
    fallback: bool = False
    exhausted: str | None = None

    def to_json(self) -> dict:
        return {
            "schema": TRACE_SCHEMA,
            "step1": self.step1,
            "levels": self.levels,
            "cluster": self.cluster,
            "step3": self.step3,
            "step4": self.step4,
            "fallback": self.fallback,
            "exhausted": self.exhausted,
            "result": self.result.to_json() if self.result else None,
        }


def thread_count(requested: int | None = None) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("EXPSUM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _reduce_mod_2pi(z: complex) -> tuple[complex, int]:
    """z - 2 pi i n with imaginary part in [0, 2 pi), and n."""
    n = math.floor(z.imag / TWO_PI)
    y = z.imag - n * TWO_PI
    if y >= TWO_PI:
        y -= TWO_PI
        n += 1
    return complex(z.real, y), n


def _circ(d: float, period: float = TWO_PI) -> float:
    d = math.fmod(d, period)
    if d > period / 2:
        d -= period
    elif d < -period / 2:
        d += period
    return d


def _zhat_distance(a: complex, b: complex) -> float:
    return math.hypot(a.real - b.real, _circ(a.imag - b.imag))


@dataclass
class _Level:
    index: int
    approx: RationalApprox
    poly: SparsePoly | None = None
    w: complex | None = None
    z: complex | None = None
    zhat: complex | None = None
    turns: int = 0
    error: str | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"level": self.index, "approx": self.approx.to_json()}
        if self.poly is not None:
            out["degree"] = self.poly.degree
            out["n_monomials"] = len(self.poly.exps)
        if self.w is not None:
            out["w"] = complex_to_json(self.w)
            out["z"] = complex_to_json(self.z)
            out["zhat"] = complex_to_json(self.zhat)
        if self.error:
            out["error"] = self.error
        return out


def _lift(lv: _Level, w: complex) -> None:
    lv.w = w
    lv.z = lv.approx.denom_b * cmath.log(w)
    lv.zhat, lv.turns = _reduce_mod_2pi(lv.z)


def _anchor_level(lv: _Level, start_index: int, degree_cap: int) -> None:
    """First level: all roots, ordered by the imaginary part of their lift."""
    p = lv.poly
    b = lv.approx.denom_b
    if p.degree <= degree_cap:
        roots = [complex(w) for w in find_roots(p) if w != 0]
    else:
        roots = [find_one_root(p)]
    lifts = [(b * cmath.log(w), w) for w in roots]
    # nonnegative imaginary parts first, by size; then the rest by |Im|
    lifts.sort(key=lambda t: (t[0].imag < -1e-12, abs(t[0].imag), t[0].real))
    k = min(start_index, len(lifts) - 1)
    z, w = lifts[k]
    w = find_one_root(p, w)
    _lift(lv, w)


def _track_level(lv: _Level, anchor: complex) -> _Level:
    try:
        w0 = cmath.exp(anchor / lv.approx.denom_b)
        _lift(lv, find_one_root(lv.poly, w0))
    except (NoConvergence, OverflowError, ValueError) as exc:
        lv.error = f"{type(exc).__name__}: {exc}"
    return lv


def _alpha_for(red: Step1Reduction, lv: _Level, zhat: complex) -> np.ndarray:
    """w_l^{a_k} e^{-t_k zhat}, with the large phases taken in extended precision."""
    b = lv.approx.denom_b
    out = []
    with mpmath.workdps(red.source.basis.dps):
        z = mpmath.mpc(lv.z)
        zh = mpmath.mpc(zhat)
        for a_k, t_k in zip(lv.approx.numers_a, red.basis_t):
            e = mpmath.mpf(a_k) / b * z - t_k.mpf() * zh
            out.append(complex(mpmath.exp(e)))
    return np.array(out)


def _cluster(levels: list[_Level], tol: float) -> tuple[list[_Level], complex, float]:
    good = [lv for lv in levels if lv.zhat is not None]
    if not good:
        raise BudgetExhausted("no level produced a root")
    counts = []
    for lv in good:
        counts.append(sum(_zhat_distance(lv.zhat, o.zhat) <= tol for o in good))
    # densest; ties go to the more accurate (later) level
    best = max(range(len(good)), key=lambda i: (counts[i], i))
    ref = good[best].zhat
    members = [lv for lv in good if _zhat_distance(lv.zhat, ref) <= tol]
    if any(lv.approx.exact for lv in members):
        members = [lv for lv in members if lv.approx.exact]
        weights = np.ones(len(members))
    else:
        weights = np.array([1.0 / lv.approx.max_error for lv in members])
    offs = np.array([complex(lv.zhat.real - ref.real, _circ(lv.zhat.imag - ref.imag)) for lv in members])
    centre = ref + complex(np.dot(weights, offs) / weights.sum())
    centre, _ = _reduce_mod_2pi(centre)
    radius = max(_zhat_distance(lv.zhat, centre) for lv in members)
    return members, centre, radius


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.abs(v)


def _newton_on(F: ExpSum, z0: complex, max_iter: int = 60) -> complex | None:
    z = complex(z0)
    for _ in range(max_iter):
        ld = complex(F.log_derivative(z))
        if not np.isfinite(ld) or ld == 0:
            return None
        step = 1.0 / ld
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    if F.relative_modulus(z) > 1e-10:
        return None
    return z


def _alignment(red: Step1Reduction, alpha: np.ndarray) -> tuple[float, tuple[int, ...] | None]:
    """Shift y so that alpha e^{-i t y} satisfies the relation C.t = D, if {1, t} is dependent."""
    names = red.source.basis.names
    one = [Fraction(int(n == "one")) for n in names]
    rank, deps = rational_rank([t.vector(names) for t in red.basis_t] + [one])
    if rank == red.m + 1:
        return 0.0, None
    lam = deps[0]
    C, D = lam[:-1], -lam[-1]
    if D < 0:
        C, D = tuple(-c for c in C), -D
    phase = sum(c * cmath.phase(a) for c, a in zip(C, alpha))
    # pick the branch with the smallest shift
    n = round(phase / TWO_PI)
    return (phase - n * TWO_PI) / D, tuple(C) + (D,)


def _monomial_gap(red: Step1Reduction, alpha: np.ndarray, l: int) -> float:
    """max over monomials k of |beta^k - alpha^k|, beta_j = e^{-2 pi i l t_j}."""
    with mpmath.workdps(red.source.basis.dps):
        beta = [mpmath.expjpi(-2 * l * t.mpf()) for t in red.basis_t]
        al = [mpmath.mpc(a) for a in alpha]
        worst = mpmath.mpf(0)
        for v in red.vectors:
            bk = mpmath.fprod(x**e for x, e in zip(beta, v))
            ak = mpmath.fprod(x**e for x, e in zip(al, v))
            worst = max(worst, abs(bk - ak))
        return float(worst)


def _fallback(f: ExpSum, trace: Trace, params: ConstructiveParams, reason: str) -> tuple[ZeroCertificate, Trace]:
    trace.exhausted = reason
    if not params.fallback:
        raise BudgetExhausted(reason, trace)
    trace.fallback = True
    certs = enumerate_zeros(f, params.start_index + 1, tol=params.tol)
    trace.result = certs[params.start_index]
    return trace.result, trace


def solve_constructive(f: ExpSum, params: ConstructiveParams | None = None, *,
                       require_free_and_rotund: bool = True) -> tuple[ZeroCertificate, Trace]:
    """One certified zero of a normalized sum, found by the constructive route."""
    params = params or ConstructiveParams()
    if not is_normalized(f):
        raise ValueError("solve_constructive needs a normalized sum")
    f.require_solvable()
    if require_free_and_rotund:
        report = check_free_and_rotund(powers_problem_from_expsum(f))
        if not report.passed:
            raise NotFreeAndRotund("the associated powers problem is not free and rotund", report)
    trace = Trace()

    # step 1
    red = reduce_step1(f)
    trace.step1 = red.to_json()
    d = red.scale_d

    # step 2
    try:
        schedule = approx_schedule(red.basis_t, params.levels, params.b_cap)
    except CapExhausted:
        # fewer records than requested (e.g. a rationally dependent t): use them all
        schedule = best_approximations(red.basis_t, params.b_cap)[-params.levels:]
        if len(schedule) < MIN_LEVELS:
            return _fallback(f, trace, params, f"schedule: only {len(schedule)} levels under b_cap={params.b_cap}")
    levels = [_Level(i, ra) for i, ra in enumerate(schedule)]
    for lv in levels:
        try:
            lv.poly = specialize(red, lv.approx)
        except Degenerate as exc:
            lv.error = str(exc)
    usable = [lv for lv in levels if lv.poly is not None]
    if not usable:
        trace.levels = [lv.to_json() for lv in levels]
        return _fallback(f, trace, params, "every level degenerated")
    try:
        _anchor_level(usable[0], params.start_index, params.degree_cap)
    except (NoConvergence, ValueError) as exc:
        usable[0].error = str(exc)
        trace.levels = [lv.to_json() for lv in levels]
        return _fallback(f, trace, params, f"anchor level: {exc}")
    anchor = usable[0].z
    rest = usable[1:]
    if rest:
        with ThreadPoolExecutor(max_workers=min(thread_count(params.threads), len(rest))) as pool:
            list(pool.map(lambda lv: _track_level(lv, anchor), rest))
    trace.levels = [lv.to_json() for lv in levels]

    # step 3
    try:
        members, zhat, cradius = _cluster(usable, params.cluster_tol)
    except BudgetExhausted as exc:
        return _fallback(f, trace, params, f"cluster: {exc}")
    alphas = [_alpha_for(red, lv, zhat) for lv in members]
    spread = max((max(abs(_circ(cmath.phase(a) - cmath.phase(b))) for a, b in zip(x, alphas[0])) for x in alphas),
                 default=0.0)
    agreed = spread <= params.cluster_tol
    # candidate (zhat, alpha) pairs: the weighted centroid when the members agree,
    # then each member on its own, most accurate first
    candidates = []
    if agreed:
        w = np.array([1.0 / max(lv.approx.max_error, 1e-300) for lv in members])
        candidates.append((zhat, _unit(sum(wi * _unit(a) for wi, a in zip(w, alphas)))))
    for lv in reversed(members):
        candidates.append((lv.zhat, _unit(_alpha_for(red, lv, lv.zhat))))
    for lv, row in zip(levels, trace.levels):
        if lv.zhat is not None:
            mods = np.abs(_alpha_for(red, lv, zhat))
            row["modulus_deviation"] = fmt_real(float(np.max(np.abs(mods - 1.0))))
    trace.cluster = {
        "zhat": complex_to_json(zhat),
        "radius": fmt_real(cradius),
        "members": [lv.index for lv in members],
        "alpha_agreed": agreed,
    }
    zp = None
    for start, alpha in candidates:
        zp = _newton_on(red.as_expsum(alpha), start)
        if zp is not None:
            break
    if zp is None:
        return _fallback(f, trace, params, "Newton on the torus-shifted sum failed")
    y, relation = _alignment(red, alpha)
    alpha2 = alpha * np.exp(-1j * red.t_float * y)
    zpp = zp + 1j * y
    F2 = red.as_expsum(alpha2)
    trace.step3 = {
        "start": complex_to_json(start),
        "alpha": [complex_to_json(a) for a in alpha],
        "zhat_newton": complex_to_json(zp),
        "shift_y": fmt_real(y),
        "relation": list(relation) if relation else None,
    }

    # step 4: a disk where F2 has one zero, then the torus search
    eps = None
    for r in DISK_RADII:
        try:
            rouche_certificate(F2, zpp, r, quad=QuadParams())
            eps = r
            break
        except (CertificationError, ZeroOnBoundary):
            continue
    if eps is None:
        return _fallback(f, trace, params, "no single-zero disk around the torus zero")
    try:
        rd = omega_radius(red, alpha2, zpp, eps)
    except ZeroOnBoundary as exc:
        return _fallback(f, trace, params, f"omega: {exc}")
    norm1 = max(sum(abs(x) for x in v) for v in red.vectors)
    target = [(-cmath.phase(a) / TWO_PI) % 1.0 for a in alpha2]
    keps = rd.omega_radius / (TWO_PI * max(norm1, 1))
    l = None
    for _ in range(3):
        try:
            cand = kronecker_search(red.basis_t, target, keps, params.l_max)
        except NotFound:
            break
        if _monomial_gap(red, alpha2, cand) < rd.omega_radius:
            l = cand
            break
        keps /= 2
    trace.step4 = {"omega": rd.to_json(), "disk_radius": fmt_real(eps), "kronecker_eps": fmt_real(keps),
                   "l": l}
    if l is None:
        return _fallback(f, trace, params, "torus search exhausted")
    centre = d * (zpp - 2j * math.pi * l)
    radius = d * eps
    trace.step4.update({"center": complex_to_json(centre), "radius": fmt_real(radius)})
    try:
        cert = rouche_certificate(f, centre, radius, tol=params.tol)
    except (CertificationError, ZeroOnBoundary) as exc:
        return _fallback(f, trace, params, f"final certificate: {exc}")
    if not cert.residual < params.tol:
        return _fallback(f, trace, params, f"final residual {cert.residual:.3g} above tol")
    trace.result = cert
    return cert, trace


# ---------------------------------------------------------------------------
# enumeration with the analytic engine


def _safe_level(f: ExpSum, y: float, x0: float, x1: float, step: float) -> float:
    """A height near y whose horizontal line across the strip keeps f away from 0."""
    xs = np.linspace(x0, x1, 512)
    for k in range(40):
        yy = y + step * (k // 2 + 1) * (1 if k % 2 else -1) if k else y
        if f.relative_modulus(xs + 1j * yy).min() > 1e-6:
            return yy
    return y


def make_disjoint(f: ExpSum, certs: list[ZeroCertificate], tol: float = 1e-9) -> list[ZeroCertificate]:
    out = list(certs)
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            if not out[i].disjoint_from(out[j]):
                gap = abs(out[i].z_star - out[j].z_star)
                for k in (i, j):
                    c = out[k]
                    out[k] = rouche_certificate(f, c.z_star, min(c.radius, 0.45 * gap), tol=tol, expected=c.winding)
    return out


def enumerate_zeros(f: ExpSum, count: int, *, tol: float = 1e-9, quad: QuadParams | None = None,
                    max_bands: int = 10_000) -> list[ZeroCertificate]:
    """The ``count`` zeros closest to the real axis (by |Im|, upper half first on ties)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    f.require_solvable()
    quad = quad or QuadParams()
    sb = strip_bounds(f).padded()
    density = max(f.span, 1e-12) / TWO_PI
    h = TWO_PI * math.ceil(1.0 / density)
    cache = ContourCache()
    y = _safe_level(f, h / 2, sb.x_min, sb.x_max, 1e-2 * h)
    found = locate_zeros(f, Rectangle(sb.x_min, sb.x_max, -y, y), tol, quad=quad, cache=cache, clip=False)
    lo_y = hi_y = y
    bands = 1
    while True:
        found.sort(key=lambda c: (abs(c.z_star.imag), c.z_star.imag < 0, c.z_star.real))
        reach = min(lo_y, hi_y)
        inside = [c for c in found if abs(c.z_star.imag) <= reach]
        if len(inside) >= count:
            return make_disjoint(f, inside[:count], tol)
        if bands >= max_bands:
            raise BudgetExhausted(f"only {len(found)} zeros after {bands} bands")
        ny = _safe_level(f, hi_y + h, sb.x_min, sb.x_max, 1e-2 * h)
        found += locate_zeros(f, Rectangle(sb.x_min, sb.x_max, hi_y, ny), tol, quad=quad, cache=cache, clip=False)
        hi_y = ny
        ny = _safe_level(f, lo_y + h, sb.x_min, sb.x_max, 1e-2 * h)
        found += locate_zeros(f, Rectangle(sb.x_min, sb.x_max, -ny, -lo_y), tol, quad=quad, cache=cache, clip=False)
        lo_y = ny
        bands += 2
