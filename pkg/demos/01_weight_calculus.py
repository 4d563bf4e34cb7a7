"""Weights of the momentum terms, symbolically and for a few concrete laws."""

from fractions import Fraction

from nsverify import WeightAssignment, check_invariance, weight

TERMS = ["d(u, t)", "u*d(u, x)", "-nu*d(d(u, x), x)", "d(p, x)"]

symbolic = WeightAssignment()
print("symbolic weights")
for term in TERMS:
    print(f"  {term:<22} {weight(term, symbolic)}")

# With the viscosity held fixed, only alpha_t = 2 alpha_x keeps every term on one weight.
for ax, at in [(1, 2), (1, 1), (Fraction(1, 2), 1)]:
    report = check_invariance(TERMS, WeightAssignment(ax, at, overrides={"nu": 0}))
    print(f"fixed nu, law ({ax}, {at}): invariant={report.invariant}")
