"""Wedge probabilities for a few hand-picked boundary pairs.

Run with ``python demos/01_basics.py``.
"""
from wedge import kolmogorov_cdf, wedge_equal_all, wedge_prob

cases = [
    (1.0, 1.0, 1.0, 1.0),  # symmetric wedge
    (0.3, 0.7, 2.5, 0.1),  # lopsided, small product
    (2.0, 2.0, 2.0, 2.0),  # wide: Doob's series wins
    (1.0, 1.0, 1.0, 1e-9),  # upper line almost through the origin
    (5.0, 5.0, 5.0, 5.0),  # escape is essentially impossible
]

print(f"{'a1':>6} {'b1':>6} {'a2':>6} {'b2':>8}  {'k':>22}  formula       terms")
for p in cases:
    r = wedge_prob(p)
    print(f"{p[0]:6.2f} {p[1]:6.2f} {p[2]:6.2f} {p[3]:8.1e}  {r.value:22.17f}  {r.formula.value:<12}  {r.terms}")

# the Kolmogorov distribution function is the symmetric case: K(a) = k(a, a; a, a)
print()
for a in (0.5, 0.8, 1.0, 1.36, 2.0):
    print(f"K({a:4.2f}) = {kolmogorov_cdf(a):.17f}")

print()
print("k(0.2, 0.2; 0.2, 0.2) via the equal-parameter shortcut:", wedge_equal_all(0.2, 0.2))
