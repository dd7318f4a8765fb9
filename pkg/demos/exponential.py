"""Loops with geometric growth need relations between exponentials.

When closed forms mention 2^k and 4^k, eliminating k alone is not enough:
the relation (2^k)^2 = 4^k has to be added first.
"""

from symelim.loopspec import parse_program
from symelim.polyinv import invariant_fixed_point
from symelim.recsolve import exponential_relations

for bases in ([2, 4], [2, 3, 6], [2, 3], [-1, 9, 3]):
    rel = exponential_relations(bases)
    gens = [str(g) for g in rel.generators] or ["(none)"]
    print(f"bases {bases}: {', '.join(gens)}")

program = parse_program("""
    vars x, y, i, n;
    x := 1; y := 1; i := 0;
    while (i < n) { x := 2*x; y := 4*y; i := i + 1; }
""")
ideal, _ = invariant_fixed_point(program)
print("\ninvariants of the doubling/quadrupling loop:")
for text in ideal.display():
    print("  ", text)
