"""The quantified property of array B in the running example.

The loop is described in a richer language (iteration counter, value of each
scalar per iteration, update predicates for array writes).  Saturation with
those symbols ranked highest produces consequences, and the ones stated in
program symbols only are invariants.  We print the derivation of the
property of B and check the result on random runs.
"""

import warnings
from pathlib import Path

from symelim.folinv import first_order_invariants, ground_check, render_clause
from symelim.loopspec import parse_file, random_traces
from symelim.polyinv import invariant_fixed_point

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

program = parse_file(CORPUS / "fig1.loop")
ideal, _ = invariant_fixed_point(program)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    result = first_order_invariants(program, ideal)

axioms = result.axioms
for tag in ("A1", "A2", "A3", "A4", "A5"):
    print(f"{tag}: {len(axioms.by_schema(tag))} clauses")
print("for instance:")
for c in axioms.by_schema("A1"):
    print("   ", render_clause(c), "   #", c.derivation.note)

sat = result.saturation
print(f"\nsaturation: {sat.reason}, {len(sat.clauses)} clauses kept, {sat.generated} generated")
print("invariants over the program symbols:")
for text in result.formulas:
    print("   ", text)


def ancestry(clause, log, depth=0, seen=None):
    seen = set() if seen is None else seen
    d = clause.derivation
    tail = d.note if d.rule == "input" else f"{d.rule} from {list(d.parents)}"
    print(f"{'  ' * depth}[{clause.id}] {render_clause(clause)}   ({tail})")
    if clause.id in seen:
        return
    seen.add(clause.id)
    for pid in d.parents + tuple(u for u, _ in d.rewrites):
        ancestry(log[pid], log, depth + 1, seen)


target = next(c for c, f in zip(result.emitted, result.formulas) if "B[p]" in f)
print("\nderivation of the B invariant:")
ancestry(target, sat.log)

traces = random_traces(program, 25, length=12, seed=7)
passed = all(ground_check(target, t, 20, result.signature).passed for t in traces)
print(f"\nholds on 25 random runs for all |p| <= 20: {passed}")

print("\nwith an existential witness (attempted):")
for e in result.existential:
    print("   ", e.text)
