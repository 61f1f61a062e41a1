"""Domain types: basis reals, exact exponents, exponential sums.

Exponents are never floats.  Each one is a rational combination of named
basis reals that the caller declares to be linearly independent over Q,
so every identity between exponents is decided with exact arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

ONE = "one"
MIN_PRECISION_DIGITS = 30


class ExpSumError(Exception):
    """Base class for all errors raised by this package."""


class EmptyAfterMerge(ExpSumError):
    pass


class SingleTerm(ExpSumError):
    """A one-term sum c*e^{rz} has no zeros; solvers refuse it."""


class ProblemFormatError(ExpSumError):
    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


# ---------------------------------------------------------------------------
# basis


def _significant_digits(text: str) -> int:
    d = Decimal(text)
    digits = d.as_tuple().digits
    stripped = "".join(str(x) for x in digits).lstrip("0")
    return max(len(stripped), 1)


@dataclass(frozen=True)
class BasisReal:
    name: str
    text: str
    precision_digits: int
    value: mpmath.mpf = field(repr=False, compare=False)

    @classmethod
    def parse(cls, name: str, text: str, precision_digits: int | None = None) -> "BasisReal":
        if not name or not name.replace("_", "").isalnum():
            raise ProblemFormatError(f"invalid basis name {name!r}")
        text = str(text).strip()
        try:
            dec = Decimal(text)
        except InvalidOperation:
            raise ProblemFormatError(f"value {text!r} is not a decimal number", name) from None
        if not dec.is_finite():
            raise ProblemFormatError("value must be finite", name)
        if precision_digits is None:
            precision_digits = max(MIN_PRECISION_DIGITS, _significant_digits(text))
        if precision_digits <= 0:
            raise ProblemFormatError("precision_digits must be positive", name)
        with mpmath.workdps(precision_digits + 10):
            value = mpmath.mpf(text)
        if name == ONE and value != 1:
            raise ProblemFormatError("the basis element 'one' must have value 1", name)
        return cls(name, text, precision_digits, value)

    def round_trips(self) -> bool:
        sig = _significant_digits(self.text)
        if sig > self.precision_digits:
            return False
        with mpmath.workdps(self.precision_digits + 10):
            back = mpmath.nstr(self.value, sig, strip_zeros=False, min_fixed=-math.inf, max_fixed=math.inf)
        return Decimal(back) == Decimal(self.text)


class Basis:
    """Ordered collection of basis reals; always contains ``one``."""

    def __init__(self, elements: Iterable[BasisReal] = ()):
        elems: dict[str, BasisReal] = {}
        for el in elements:
            if el.name in elems:
                raise ProblemFormatError(f"duplicate basis name {el.name!r}")
            elems[el.name] = el
        if ONE not in elems:
            elems = {ONE: BasisReal.parse(ONE, "1"), **elems}
        self._elems = elems
        self.names: tuple[str, ...] = tuple(elems)
        self.dps = max(el.precision_digits for el in elems.values()) + 10

    @classmethod
    def from_values(cls, values: Mapping[str, str]) -> "Basis":
        return cls(BasisReal.parse(k, v) for k, v in values.items())

    def __getitem__(self, name: str) -> BasisReal:
        return self._elems[name]

    def __contains__(self, name: str) -> bool:
        return name in self._elems

    def __iter__(self):
        return iter(self._elems.values())

    def __len__(self) -> int:
        return len(self._elems)

    def __repr__(self) -> str:
        return f"Basis({list(self.names)})"

    def real(self, coeffs: Mapping[str, object] | None = None) -> "ExactReal":
        return ExactReal.from_map(self, coeffs or {})

    def rational(self, q) -> "ExactReal":
        return ExactReal.from_map(self, {ONE: q})


def _to_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        try:
            return Fraction(q.strip())
        except (ValueError, ZeroDivisionError):
            raise ProblemFormatError(f"{q!r} is not an exact rational") from None
    raise TypeError(f"exact rational expected, got {type(q).__name__}; floats are not accepted")


class ExactReal:
    """A rational combination of basis reals.

    Equality and hashing use the coefficient map only.  The float value is
    computed once, at the basis precision, so it is deterministic.
    """

    __slots__ = ("coeffs", "basis", "_float", "_mpf")

    def __init__(self, basis: Basis, coeffs: Mapping[str, Fraction]):
        for name in coeffs:
            if name not in basis:
                raise ProblemFormatError(f"unknown basis name {name!r}")
        self.basis = basis
        self.coeffs: tuple[tuple[str, Fraction], ...] = tuple(
            (n, Fraction(coeffs[n])) for n in basis.names if n in coeffs and coeffs[n] != 0
        )
        with mpmath.workdps(basis.dps):
            v = mpmath.mpf(0)
            for n, q in self.coeffs:
                v += mpmath.mpf(q.numerator) / q.denominator * basis[n].value
        self._mpf = v
        self._float = float(v)

    @classmethod
    def from_map(cls, basis: Basis, coeffs: Mapping[str, object]) -> "ExactReal":
        return cls(basis, {k: _to_fraction(v) for k, v in coeffs.items()})

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def vector(self, names: Sequence[str] | None = None) -> list[Fraction]:
        d = dict(self.coeffs)
        return [d.get(n, Fraction(0)) for n in (names or self.basis.names)]

    def mpf(self) -> mpmath.mpf:
        return self._mpf

    def __float__(self) -> float:
        return self._float

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return all(n == ONE for n, _ in self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactReal) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _combine(self, other: "ExactReal", sign: int) -> "ExactReal":
        d = dict(self.coeffs)
        for n, q in other.coeffs:
            d[n] = d.get(n, Fraction(0)) + sign * q
        return ExactReal(self.basis, d)

    def __add__(self, other: "ExactReal") -> "ExactReal":
        return self._combine(other, 1)

    def __sub__(self, other: "ExactReal") -> "ExactReal":
        return self._combine(other, -1)

    def __neg__(self) -> "ExactReal":
        return ExactReal(self.basis, {n: -q for n, q in self.coeffs})

    def scale(self, q) -> "ExactReal":
        q = _to_fraction(q)
        return ExactReal(self.basis, {n: q * c for n, c in self.coeffs})

    def to_json(self) -> dict[str, str]:
        return {n: str(q) for n, q in self.coeffs}

    def __repr__(self) -> str:
        if not self.coeffs:
            return "ExactReal(0)"
        parts = [f"{q}*{n}" if n != ONE else str(q) for n, q in self.coeffs]
        return f"ExactReal({' + '.join(parts)})"


def linear_combination(basis: Basis, items: Iterable[tuple[object, ExactReal]]) -> ExactReal:
    d: dict[str, Fraction] = {}
    for q, r in items:
        q = _to_fraction(q)
        for n, c in r.coeffs:
            d[n] = d.get(n, Fraction(0)) + q * c
    return ExactReal(basis, d)


# ---------------------------------------------------------------------------
# exponential sums


class ExpSum:
    """Sum of terms c_k e^{r_k z} with distinct exact exponents, sorted by value."""

    def __init__(self, terms: Sequence[tuple[complex, ExactReal]]):
        if not terms:
            raise EmptyAfterMerge("an exponential sum needs at least one term")
        basis = terms[0][1].basis
        seen = set()
        prev = -math.inf
        for c, r in terms:
            if c == 0:
                raise ValueError("zero coefficient in ExpSum; use merge_terms()")
            if r in seen:
                raise ValueError("repeated exponent in ExpSum; use merge_terms()")
            if float(r) <= prev:
                raise ValueError("ExpSum terms must be strictly increasing in exponent")
            seen.add(r)
            prev = float(r)
        self.basis = basis
        self.terms: tuple[tuple[complex, ExactReal], ...] = tuple((complex(c), r) for c, r in terms)
        self.coeffs = np.array([c for c, _ in self.terms], dtype=complex)
        self.exponents = np.array([float(r) for _, r in self.terms], dtype=float)
        self._abs_coeffs = np.abs(self.coeffs)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:g})e^({float(r):g} z)" for c, r in self.terms)
        return f"ExpSum({body})"

    @property
    def is_single_term(self) -> bool:
        return len(self.terms) == 1

    @property
    def span(self) -> float:
        return float(self.exponents[-1] - self.exponents[0])

    def require_solvable(self) -> None:
        if self.is_single_term:
            raise SingleTerm("a single exponential term has no zeros")

    # -- evaluation -------------------------------------------------------
    # Every evaluator factors out e^{r_ref z} with r_ref the largest exponent
    # where Re z > 0 and the smallest elsewhere, so the partial sums never
    # overflow; only the final true value can.

    def _factored(self, z):
        z = np.asarray(z, dtype=complex)
        r = self.exponents
        ref = np.where(z.real > 0, r[-1], r[0])
        phase = np.exp((r - ref[..., None]) * z[..., None])
        return z, ref, phase

    def __call__(self, z):
        z, ref, phase = self._factored(z)
        s = phase @ self.coeffs
        with np.errstate(over="ignore", invalid="ignore"):
            out = s * np.exp(ref * z)
        return out[()] if out.ndim == 0 else out

    def eval(self, z):
        return self(z)

    def eval_deriv(self, z):
        z, ref, phase = self._factored(z)
        s = phase @ (self.coeffs * self.exponents)
        with np.errstate(over="ignore", invalid="ignore"):
            out = s * np.exp(ref * z)
        return out[()] if out.ndim == 0 else out

    def log_derivative(self, z):
        """f'/f, computed without forming f itself."""
        z, _, phase = self._factored(z)
        s0 = phase @ self.coeffs
        s1 = phase @ (self.coeffs * self.exponents)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = s1 / s0
        return out[()] if out.ndim == 0 else out

    def relative_modulus(self, z):
        """|f(z)| / sum_k |c_k e^{r_k z}|, a scale-free measure of cancellation."""
        z, _, phase = self._factored(z)
        s0 = np.abs(phase @ self.coeffs)
        scale = np.abs(phase) @ self._abs_coeffs
        out = s0 / scale
        return out[()] if out.ndim == 0 else out

    def term_scale(self, z):
        """sum_k |c_k e^{r_k z}| (true value)."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(np.multiply.outer(z.real, self.exponents)) @ self._abs_coeffs
        return out[()] if out.ndim == 0 else out

    def eval_mp(self, z, deriv: bool = False):
        """f(z) (or f'(z)) in mpmath at the basis precision; z may be a Python complex."""
        with mpmath.workdps(self.basis.dps + 10):
            zz = mpmath.mpc(z)
            out = mpmath.mpc(0)
            for c, r in self.terms:
                rv = r.mpf()
                term = mpmath.mpc(c) * mpmath.exp(rv * zz)
                out += term * rv if deriv else term
            return out

    def newton_mp(self, z0: complex, steps: int = 3) -> tuple[complex, float]:
        """A few high-precision Newton steps; returns the rounded point and |f| there."""
        with mpmath.workdps(self.basis.dps + 10):
            z = mpmath.mpc(z0)
            for _ in range(steps):
                d = self.eval_mp(z, deriv=True)
                if d == 0:
                    break
                z -= self.eval_mp(z) / d
            zc = complex(z)
            return zc, float(abs(self.eval_mp(zc)))

    # -- transformations --------------------------------------------------

    def shifted(self, shift: ExactReal) -> "ExpSum":
        """Multiply by e^{-shift*z}; zeros are unchanged."""
        return ExpSum([(c, r - shift) for c, r in self.terms])

    def to_json(self) -> dict:
        return problem_to_json(self)


def exact_sum(values: Iterable[complex]) -> complex:
    """Correctly rounded sum, so that exact cancellations give exactly 0."""
    values = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def merge_terms(raw_terms: Iterable[tuple[complex, ExactReal]]) -> ExpSum:
    """Merge equal exponents and drop zero coefficients, without shifting."""
    raw_terms = list(raw_terms)
    if not raw_terms:
        raise ValueError("raw_terms must be nonempty")
    groups: dict[ExactReal, list[complex]] = {}
    for c, r in raw_terms:
        groups.setdefault(r, []).append(complex(c))
    terms = [(c, r) for r, c in ((r, exact_sum(cs)) for r, cs in groups.items()) if c != 0]
    if not terms:
        raise EmptyAfterMerge("all terms cancel")
    terms.sort(key=lambda t: (float(t[1]), t[1].mpf()))
    for (_, a), (_, b) in zip(terms, terms[1:]):
        if float(a) == float(b):
            # distinct exact values that collide in double precision
            raise ValueError(f"exponents {a!r} and {b!r} are not separable in double precision")
    return ExpSum(terms)


def normalize(raw_terms: Iterable[tuple[complex, ExactReal]]) -> tuple[ExpSum, ExactReal]:
    """Merge, drop zeros, and shift so the smallest exponent is exactly 0.

    Returns the normalized sum and the shift r_0 that was subtracted.
    """
    f = merge_terms(raw_terms)
    shift = f.terms[0][1]
    return f.shifted(shift), shift


def is_normalized(f: ExpSum) -> bool:
    return f.terms[0][1].is_zero()


# ---------------------------------------------------------------------------
# geometry and certificates


@dataclass(frozen=True)
class Rectangle:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle coordinates must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate rectangle {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def corners(self) -> tuple[complex, complex, complex, complex]:
        """Counter-clockwise from the lower-left corner."""
        return (
            complex(self.x_min, self.y_min),
            complex(self.x_max, self.y_min),
            complex(self.x_max, self.y_max),
            complex(self.x_min, self.y_max),
        )

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.x_min - pad <= z.real <= self.x_max + pad) and (
            self.y_min - pad <= z.imag <= self.y_max + pad
        )

    @classmethod
    def parse(cls, text: str) -> "Rectangle":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise ValueError("rectangle must be xmin,xmax,ymin,ymax")
        return cls(*(float(p) for p in parts))


@dataclass(frozen=True)
class ZeroCertificate:
    """A disk on whose boundary the argument principle gives winding 1.

    ``center`` and ``radius`` describe the certified disk; ``z_star`` is the
    polished zero inside it.
    """

    z_star: complex
    radius: float
    winding: int
    min_boundary_modulus: float
    residual: float
    center: complex | None = None

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", self.z_star)
        if not self.radius > 0:
            raise ValueError("certificate radius must be positive")
        if not self.min_boundary_modulus > 0:
            raise ValueError("certificate boundary modulus must be positive")

    def disjoint_from(self, other: "ZeroCertificate") -> bool:
        return abs(self.center - other.center) > self.radius + other.radius

    def to_json(self) -> dict:
        return {
            "z_star": complex_to_json(self.z_star),
            "center": complex_to_json(self.center),
            "radius": fmt_real(self.radius),
            "winding": self.winding,
            "min_boundary_modulus": fmt_real(self.min_boundary_modulus),
            "residual": fmt_real(self.residual),
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "ZeroCertificate":
        return cls(
            z_star=complex_from_json(d["z_star"]),
            radius=float(d["radius"]),
            winding=int(d["winding"]),
            min_boundary_modulus=float(d["min_boundary_modulus"]),
            residual=float(d["residual"]),
            center=complex_from_json(d.get("center", d["z_star"])),
        )


# ---------------------------------------------------------------------------
# JSON problem format ("expsum-v1")

SCHEMA = "expsum-v1"


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def complex_to_json(z: complex) -> dict[str, str]:
    return {"re": fmt_real(z.real), "im": fmt_real(z.imag)}


def complex_from_json(d, where: str = "") -> complex:
    if not isinstance(d, Mapping):
        raise ProblemFormatError("expected an object with 're' and 'im'", where)
    try:
        re = float(Decimal(str(d.get("re", "0"))))
        im = float(Decimal(str(d.get("im", "0"))))
    except InvalidOperation:
        raise ProblemFormatError("re/im must be decimal strings", where) from None
    return complex(re, im)


def parse_problem(data: Mapping) -> tuple[Basis, list[tuple[complex, ExactReal]]]:
    """Parse a problem object into a basis and raw (unmerged) terms."""
    if not isinstance(data, Mapping):
        raise ProblemFormatError("problem must be a JSON object")
    basis_raw = data.get("basis", [])
    if not isinstance(basis_raw, list):
        raise ProblemFormatError("must be a list", "basis")
    elems = []
    for i, b in enumerate(basis_raw):
        where = f"basis[{i}]"
        if not isinstance(b, Mapping) or "name" not in b or "value" not in b:
            raise ProblemFormatError("needs 'name' and 'value'", where)
        try:
            elems.append(BasisReal.parse(str(b["name"]), str(b["value"]), b.get("precision_digits")))
        except ProblemFormatError as exc:
            raise ProblemFormatError(str(exc), where) from None
    basis = Basis(elems)
    terms_raw = data.get("terms")
    if not isinstance(terms_raw, list) or not terms_raw:
        raise ProblemFormatError("must be a nonempty list", "terms")
    terms = []
    for i, t in enumerate(terms_raw):
        where = f"terms[{i}]"
        if not isinstance(t, Mapping) or "coeff" not in t:
            raise ProblemFormatError("needs 'coeff'", where)
        c = complex_from_json(t["coeff"], where + ".coeff")
        expo = t.get("exponent", {})
        if not isinstance(expo, Mapping):
            raise ProblemFormatError("must be an object", where + ".exponent")
        coeffs = {}
        for name, q in expo.items():
            if name not in basis:
                raise ProblemFormatError(f"unknown basis name {name!r}", f"{where}.exponent")
            try:
                coeffs[name] = _to_fraction(str(q))
            except ProblemFormatError:
                raise ProblemFormatError(f"{q!r} is not an exact rational 'p/q'", f"{where}.exponent.{name}") from None
        terms.append((c, ExactReal(basis, coeffs)))
    return basis, terms


def problem_to_json(f: ExpSum) -> dict:
    return {
        "schema": SCHEMA,
        "basis": [{"name": b.name, "value": b.text} for b in f.basis],
        "terms": [{"coeff": complex_to_json(c), "exponent": r.to_json()} for c, r in f.terms],
    }
