"""Exact-arithmetic polynomial engine with Bernstein-form range enclosures.

Everything here works over ``fractions.Fraction``.  A polynomial on a box is
transformed to the unit box, re-expressed in the Bernstein basis, and the
min/max basis coefficients give a certified enclosure of its range.  On top of
that sit a branch-and-bound feasibility check (conjunctions of polynomial
inequalities) and a validity check (a single inequality, or an implication
between two, holding everywhere on a box).  Bisection always splits the widest
dimension, lowest index first on ties, and subboxes are explored depth-first
lower-half first, so verdicts and witnesses are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Union

Exponents = tuple[int, ...]
Point = tuple[Fraction, ...]

RELATIONS = ("<", "<=", ">", ">=")

# relation on p flipped when the constraint is negated
NEGATED_RELATION = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


class PolynomialError(ValueError):
    pass


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    msg = f"not an exact rational: {value!r}"
    raise PolynomialError(msg)


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial as a map from exponent vectors to coefficients.

    ``terms`` never stores a zero coefficient and every exponent vector has
    length ``arity``.
    """

    arity: int
    terms: dict[Exponents, Fraction]

    def __post_init__(self) -> None:
        cleaned: dict[Exponents, Fraction] = {}
        for expo, coeff in self.terms.items():
            if len(expo) != self.arity:
                msg = f"exponent vector {expo} does not match arity {self.arity}"
                raise PolynomialError(msg)
            if any(e < 0 for e in expo):
                msg = f"negative exponent in {expo}"
                raise PolynomialError(msg)
            c = _as_fraction(coeff)
            if c != 0:
                cleaned[tuple(expo)] = c
        object.__setattr__(self, "terms", cleaned)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(arity: int) -> "Polynomial":
        return Polynomial(arity, {})

    @staticmethod
    def constant(arity: int, value) -> "Polynomial":
        return Polynomial(arity, {(0,) * arity: _as_fraction(value)})

    @staticmethod
    def variable(arity: int, index: int) -> "Polynomial":
        if not 0 <= index < arity:
            msg = f"variable index {index} out of range for arity {arity}"
            raise PolynomialError(msg)
        expo = tuple(1 if i == index else 0 for i in range(arity))
        return Polynomial(arity, {expo: Fraction(1)})

    # -- ring operations ------------------------------------------------

    def _check_same_arity(self, other: "Polynomial") -> None:
        if self.arity != other.arity:
            msg = f"arity mismatch: {self.arity} vs {other.arity}"
            raise PolynomialError(msg)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_arity(other)
        terms = dict(self.terms)
        for expo, coeff in other.terms.items():
            terms[expo] = terms.get(expo, Fraction(0)) + coeff
        return Polynomial(self.arity, terms)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.arity, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_arity(other)
        terms: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                terms[expo] = terms.get(expo, Fraction(0)) + c1 * c2
        return Polynomial(self.arity, terms)

    def scale(self, factor) -> "Polynomial":
        f = _as_fraction(factor)
        return Polynomial(self.arity, {e: c * f for e, c in self.terms.items()})

    def power(self, exponent: int) -> "Polynomial":
        if exponent < 0:
            raise PolynomialError("negative polynomial power")
        result = Polynomial.constant(self.arity, 1)
        for _ in range(exponent):
            result = result * self
        return result

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree_vector(self) -> Exponents:
        if not self.terms:
            return (0,) * self.arity
        return tuple(
            max(expo[i] for expo in self.terms) for i in range(self.arity)
        )

    def variables_used(self) -> tuple[int, ...]:
        used = set()
        for expo in self.terms:
            for i, e in enumerate(expo):
                if e > 0:
                    used.add(i)
        return tuple(sorted(used))

    def evaluate(self, point: Point) -> Fraction:
        """Exact value at a rational point."""
        if len(point) != self.arity:
            msg = f"point arity {len(point)} does not match {self.arity}"
            raise PolynomialError(msg)
        pt = tuple(_as_fraction(x) for x in point)
        total = Fraction(0)
        for expo, coeff in self.terms.items():
            term = coeff
            for x, e in zip(pt, expo):
                if e:
                    term *= x ** e
            total += term
        return total

    def affine_substitute(self, offsets, scales) -> "Polynomial":
        """Substitute x_i = offsets[i] + scales[i] * t_i, exactly."""
        offs = [_as_fraction(o) for o in offsets]
        scls = [_as_fraction(s) for s in scales]
        if len(offs) != self.arity or len(scls) != self.arity:
            raise PolynomialError("affine substitution arity mismatch")
        result = Polynomial.zero(self.arity)
        for expo, coeff in self.terms.items():
            term = Polynomial.constant(self.arity, coeff)
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                factor = Polynomial(
                    self.arity,
                    {
                        (0,) * self.arity: offs[i],
                        tuple(1 if j == i else 0 for j in range(self.arity)): scls[i],
                    },
                )
                term = term * factor.power(e)
            result = result + term
        return result


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with rational bounds, lower <= upper per dimension."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        fixed = []
        for lo, hi in self.intervals:
            lo, hi = _as_fraction(lo), _as_fraction(hi)
            if lo > hi:
                msg = f"empty interval [{lo}, {hi}]"
                raise PolynomialError(msg)
            fixed.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(fixed))

    @staticmethod
    def of(*bounds) -> "Box":
        return Box(tuple((lo, hi) for lo, hi in bounds))

    @property
    def arity(self) -> int:
        return len(self.intervals)

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(hi - lo for lo, hi in self.intervals)

    def widest_dimension(self) -> int:
        widths = self.widths()
        best = max(widths)
        return widths.index(best)

    def is_point(self) -> bool:
        return all(lo == hi for lo, hi in self.intervals)

    def center(self) -> Point:
        return tuple((lo + hi) / 2 for lo, hi in self.intervals)

    def vertices(self) -> Iterator[Point]:
        """Corners in lexicographic order (low endpoint first per dimension)."""
        n = self.arity
        for mask in range(1 << n):
            yield tuple(
                self.intervals[i][1] if mask >> (n - 1 - i) & 1 else self.intervals[i][0]
                for i in range(n)
            )

    def contains(self, point: Point) -> bool:
        return len(point) == self.arity and all(
            lo <= x <= hi for (lo, hi), x in zip(self.intervals, point)
        )

    def split(self, dim: int) -> tuple["Box", "Box"]:
        lo, hi = self.intervals[dim]
        mid = (lo + hi) / 2
        lower = list(self.intervals)
        upper = list(self.intervals)
        lower[dim] = (lo, mid)
        upper[dim] = (mid, hi)
        return Box(tuple(lower)), Box(tuple(upper))


@dataclass(frozen=True)
class PolyConstraint:
    """Inequality ``p(x) relation 0`` with relation in <, <=, >, >=."""

    poly: Polynomial
    relation: str

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            msg = f"unknown relation {self.relation!r}"
            raise PolynomialError(msg)

    def negated(self) -> "PolyConstraint":
        return PolyConstraint(self.poly, NEGATED_RELATION[self.relation])

    def holds_at(self, point: Point) -> bool:
        value = self.poly.evaluate(point)
        if self.relation == "<":
            return value < 0
        if self.relation == "<=":
            return value <= 0
        if self.relation == ">":
            return value > 0
        return value >= 0


@dataclass(frozen=True)
class ConstraintImplication:
    """Pointwise implication ``premise -> conclusion`` between constraints."""

    premise: PolyConstraint
    conclusion: PolyConstraint

    def holds_at(self, point: Point) -> bool:
        return not self.premise.holds_at(point) or self.conclusion.holds_at(point)


ValidityFormula = Union[PolyConstraint, ConstraintImplication]


@dataclass(frozen=True)
class BernsteinTensor:
    """Complete coefficient tensor of a polynomial over the unit box.

    ``degree`` is the per-dimension Bernstein degree N; ``coefficients`` holds
    one entry for every multi-index J with 0 <= J_i <= N_i.
    """

    degree: Exponents
    coefficients: dict[Exponents, Fraction]

    def __post_init__(self) -> None:
        expected = 1
        for n in self.degree:
            expected *= n + 1
        if len(self.coefficients) != expected:
            msg = (
                f"incomplete tensor: {len(self.coefficients)} coefficients, "
                f"expected {expected} for degree {self.degree}"
            )
            raise PolynomialError(msg)

    def minimum(self) -> Fraction:
        return min(self.coefficients.values())

    def maximum(self) -> Fraction:
        return max(self.coefficients.values())


def _multi_indices(degree: Exponents) -> Iterator[Exponents]:
    if not degree:
        yield ()
        return
    head, rest = degree[0], degree[1:]
    for i in range(head + 1):
        for tail in _multi_indices(rest):
            yield (i,) + tail


def to_unit_box(poly: Polynomial, box: Box) -> Polynomial:
    """Reparametrize so the unit box maps onto ``box``: x_i = lo_i + w_i t_i."""
    if poly.arity != box.arity:
        raise PolynomialError("polynomial and box arity differ")
    lowers = [lo for lo, _ in box.intervals]
    widths = [hi - lo for lo, hi in box.intervals]
    return poly.affine_substitute(lowers, widths)


def bernstein_coefficients(poly: Polynomial, degree: Exponents | None = None) -> BernsteinTensor:
    """Bernstein coefficients of ``poly`` over the unit box.

    With power-basis coefficients a_I and Bernstein degree N,

        b_J = sum_{I <= J} (prod_i C(J_i, I_i) / C(N_i, I_i)) * a_I.
    """
    natural = poly.degree_vector()
    if degree is None:
        degree = natural
    else:
        degree = tuple(degree)
        if len(degree) != poly.arity or any(d < n for d, n in zip(degree, natural)):
            msg = f"requested degree {degree} below natural degree {natural}"
            raise PolynomialError(msg)
    coeffs: dict[Exponents, Fraction] = {}
    for index_j in _multi_indices(degree):
        total = Fraction(0)
        for index_i, a in poly.terms.items():
            if any(i > j for i, j in zip(index_i, index_j)):
                continue
            weight = Fraction(1)
            for i, j, n in zip(index_i, index_j, degree):
                weight *= Fraction(comb(j, i), comb(n, i))
            total += weight * a
        coeffs[index_j] = total
    return BernsteinTensor(degree, coeffs)


def _enclosure(poly: Polynomial, box: Box) -> tuple[Fraction, Fraction]:
    tensor = bernstein_coefficients(to_unit_box(poly, box))
    return tensor.minimum(), tensor.maximum()


def bounds(poly: Polynomial, box: Box, depth: int = 0) -> tuple[Fraction, Fraction]:
    """Certified range enclosure, tightened by recursive bisection.

    ``depth`` counts bisections along any root-to-leaf path; depth 0 is the
    plain Bernstein enclosure on ``box``.  The result is the min/max of the
    leaf enclosures, hence sound at every depth and monotone in ``depth``.
    """
    if depth < 0:
        raise PolynomialError("negative depth")
    lo, hi = _enclosure(poly, box)
    if depth == 0 or box.is_point() or lo == hi:
        return lo, hi
    left, right = box.split(box.widest_dimension())
    lo1, hi1 = bounds(poly, left, depth - 1)
    lo2, hi2 = bounds(poly, right, depth - 1)
    return min(lo1, lo2), max(hi1, hi2)


# -- feasibility / validity verdicts ------------------------------------


@dataclass(frozen=True)
class Feasible:
    witness: Point


@dataclass(frozen=True)
class Infeasible:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str


FeasibilityVerdict = Union[Feasible, Infeasible, Unknown]


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Invalid:
    witness: Point


ValidityVerdict = Union[Valid, Invalid, Unknown]


@dataclass
class SearchStats:
    """Mutable tally of the branch-and-prune search effort."""

    explored: int = 0

DEFAULT_DEPTH = 24


def _proven_on(c: PolyConstraint, lo: Fraction, hi: Fraction) -> bool:
    """Enclosure certifies the constraint everywhere on the subbox."""
    if c.relation == ">":
        return lo > 0
    if c.relation == ">=":
        return lo >= 0
    if c.relation == "<":
        return hi < 0
    return hi <= 0


def _refuted_on(c: PolyConstraint, lo: Fraction, hi: Fraction) -> bool:
    """Enclosure certifies the constraint fails everywhere on the subbox."""
    return _proven_on(c.negated(), lo, hi)


def _sample_points(box: Box) -> Iterator[Point]:
    yield box.center()
    yield from box.vertices()


def check_feasibility(
    constraints: list[PolyConstraint] | tuple[PolyConstraint, ...],
    box: Box,
    depth: int = DEFAULT_DEPTH,
    stats: SearchStats | None = None,
) -> FeasibilityVerdict:
    """Search for a rational point of ``box`` satisfying every constraint.

    Subboxes where some constraint is refuted by its Bernstein enclosure are
    pruned.  On every surviving subbox the center and then the vertices are
    tested by exact evaluation; the first point satisfying all constraints is
    returned as the witness.  Undecided subboxes are bisected until ``depth``
    is exhausted, in which case the verdict degrades from Infeasible to
    Unknown.
    """
    constraints = tuple(constraints)
    if not constraints:
        raise PolynomialError("empty constraint conjunction")
    for c in constraints:
        if c.poly.arity != box.arity:
            raise PolynomialError("constraint arity does not match box")
    ran_out = False
    stack: list[tuple[Box, int]] = [(box, 0)]
    while stack:
        sub, level = stack.pop()
        if stats is not None:
            stats.explored += 1
        pruned = False
        for c in constraints:
            lo, hi = _enclosure(c.poly, sub)
            if _refuted_on(c, lo, hi):
                pruned = True
                break
        if pruned:
            continue
        for point in _sample_points(sub):
            if all(c.holds_at(point) for c in constraints):
                return Feasible(point)
        if level >= depth or sub.is_point():
            ran_out = True
            continue
        lower, upper = sub.split(sub.widest_dimension())
        stack.append((upper, level + 1))
        stack.append((lower, level + 1))
    if ran_out:
        return Unknown("depth exhausted")
    return Infeasible()


def check_validity(
    formula: ValidityFormula,
    box: Box,
    depth: int = DEFAULT_DEPTH,
    stats: SearchStats | None = None,
) -> ValidityVerdict:
    """Decide whether ``formula`` holds at every point of ``box``.

    A subbox is discharged when the constraint is proven by its enclosure
    (for an implication: the premise refuted or the conclusion proven).  A
    falsifying sample point, verified by exact evaluation, yields Invalid.
    """
    if isinstance(formula, ConstraintImplication):
        parts: tuple[PolyConstraint, ...] = (formula.premise, formula.conclusion)
    else:
        parts = (formula,)
    for c in parts:
        if c.poly.arity != box.arity:
            raise PolynomialError("constraint arity does not match box")
    ran_out = False
    stack: list[tuple[Box, int]] = [(box, 0)]
    while stack:
        sub, level = stack.pop()
        if stats is not None:
            stats.explored += 1
        if isinstance(formula, ConstraintImplication):
            plo, phi = _enclosure(formula.premise.poly, sub)
            if _refuted_on(formula.premise, plo, phi):
                continue
            clo, chi = _enclosure(formula.conclusion.poly, sub)
            if _proven_on(formula.conclusion, clo, chi):
                continue
        else:
            lo, hi = _enclosure(formula.poly, sub)
            if _proven_on(formula, lo, hi):
                continue
        for point in _sample_points(sub):
            if not formula.holds_at(point):
                return Invalid(point)
        if level >= depth or sub.is_point():
            ran_out = True
            continue
        lower, upper = sub.split(sub.widest_dimension())
        stack.append((upper, level + 1))
        stack.append((lower, level + 1))
    if ran_out:
        return Unknown("depth exhausted")
    return Valid()
