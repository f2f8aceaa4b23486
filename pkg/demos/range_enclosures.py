"""Exact polynomial range reasoning on boxes, three ways.

First watch the certified enclosure of a bumpy polynomial tighten as the
box is bisected, then prove an implication between two sensor thresholds,
then search a feasible point for a small nonlinear conjunction.  Every
number printed is a rational; nothing is floating point.
"""

from fractions import Fraction

from numltl import (
    Box,
    Feasible,
    Polynomial,
    SearchStats,
    Valid,
    bounds,
    check_feasibility,
    check_validity,
    parse_constraints,
)


def main() -> None:
    # p(x, y) = x^2*y - 3*x*y + y + 1 on [0,3] x [-1,2]
    p = Polynomial(
        2,
        {
            (2, 1): Fraction(1),
            (1, 1): Fraction(-3),
            (0, 1): Fraction(1),
            (0, 0): Fraction(1),
        },
    )
    box = Box.of((0, 3), (-1, 2))
    print("== enclosure of x^2*y - 3*x*y + y + 1 on [0,3] x [-1,2] ==")
    for depth in range(5):
        lo, hi = bounds(p, box, depth=depth)
        print(f"  depth {depth}: [{lo}, {hi}]  (~[{float(lo):.4f}, {float(hi):.4f}])")

    print()
    print("== one threshold forces the other ==")
    doc = parse_constraints(
        """
        REAL x IN [0, 4]
        REAL y IN [0, 4]
        x + y > 3 -> x^2 + y^2 >= 7/2
        """
    )
    stats = SearchStats()
    verdict = check_validity(doc.checks[0], doc.box, stats=stats)
    assert isinstance(verdict, Valid)
    print(f"  valid, decided after exploring {stats.explored} subboxes")

    print()
    print("== feasibility search with a rational witness ==")
    doc = parse_constraints(
        """
        REAL s1 IN [0, 4]
        REAL s2 IN [0, 4]
        REAL s3 IN [0, 4]
        s1 + s2 + s3 > 3
        s1^2 + s2^2 + s3^2 < 4
        """
    )
    verdict = check_feasibility(doc.checks, doc.box)
    assert isinstance(verdict, Feasible)
    names = ", ".join(
        f"{n}={v} (~{float(v):.6g})" for n, v in zip(doc.variables, verdict.witness)
    )
    print(f"  witness: {names}")


if __name__ == "__main__":
    main()
