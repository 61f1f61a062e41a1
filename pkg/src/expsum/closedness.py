"""Freeness and rotundity checks for the raising-to-powers problem
(r_1 z, ..., r_n z) on the hyperplane c_1 w_1 + ... + c_n w_n + c_0 = 0."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import ExactReal, ExpSum, exact_sum
from .qlinalg import rational_rank


@dataclass(frozen=True)
class PowersProblem:
    line_r: tuple[ExactReal, ...]
    hyperplane_c: tuple[complex, ...]
    constant: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "line_r", tuple(self.line_r))
        object.__setattr__(self, "hyperplane_c", tuple(complex(c) for c in self.hyperplane_c))
        if not self.line_r:
            raise ValueError("need at least one direction component")
        if len(self.line_r) != len(self.hyperplane_c):
            raise ValueError("line_r and hyperplane_c must have equal length")
        if all(c == 0 for c in self.hyperplane_c):
            raise ValueError("hyperplane coefficients are all zero")

    @property
    def n(self) -> int:
        return len(self.line_r)


def powers_problem_from_expsum(f: ExpSum) -> PowersProblem:
    """The problem whose exponential points are the zeros of f.

    A term with exponent 0 becomes the constant of the hyperplane; the
    remaining exponents give the direction of the line.
    """
    const = 0j
    rs, cs = [], []
    for c, r in f.terms:
        if r.is_zero():
            const += c
        else:
            rs.append(r)
            cs.append(c)
    return PowersProblem(tuple(rs), tuple(cs), const)


@dataclass
class CheckResult:
    passed: bool
    witness: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        out: dict = {"pass": self.passed}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


@dataclass
class FreeRotundReport:
    vertical: CheckResult
    horizontal: CheckResult
    rotund: CheckResult
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.vertical.passed and self.horizontal.passed and self.rotund.passed

    def to_json(self) -> dict:
        return {
            "vertical": self.vertical.to_json(),
            "horizontal": self.horizontal.to_json(),
            "rotund": self.rotund.to_json(),
            "pass": self.passed,
        }


def check_no_vertical(p: PowersProblem) -> CheckResult:
    """No vertical fibres iff r_1, ..., r_n are Q-linearly independent."""
    names = p.line_r[0].basis.names
    rank, deps = rational_rank([r.vector(names) for r in p.line_r])
    if rank == p.n:
        return CheckResult(True)
    return CheckResult(False, deps[0])


def _monomial_count(p: PowersProblem) -> int:
    return sum(1 for c in p.hyperplane_c if c != 0) + (1 if p.constant != 0 else 0)


def check_no_horizontal(p: PowersProblem) -> CheckResult:
    """A linear form in the w_k defines a coset of a subtorus only with two monomials or fewer."""
    return CheckResult(_monomial_count(p) > 2)


def check_rotund(p: PowersProblem) -> CheckResult:
    """True iff sum c_k e^{r_k z} (+ constant) is not identically zero.

    Distinct exponents never cancel, so this is the same as some merged
    coefficient being nonzero.
    """
    groups: dict[ExactReal, list[complex]] = {}
    for c, r in zip(p.hyperplane_c, p.line_r):
        groups.setdefault(r, []).append(c)
    if p.constant != 0:
        groups.setdefault(p.line_r[0].basis.real(), []).append(p.constant)
    return CheckResult(any(exact_sum(cs) != 0 for cs in groups.values()))


def check_free_and_rotund(p: PowersProblem) -> FreeRotundReport:
    return FreeRotundReport(check_no_vertical(p), check_no_horizontal(p), check_rotund(p))


def vandermonde_det(nodes: Sequence[complex]) -> complex:
    """prod_{i<j} (x_j - x_i)."""
    out = 1 + 0j
    for j in range(len(nodes)):
        for i in range(j):
            out *= nodes[j] - nodes[i]
    return out
