"""From a loop body to polynomial relations, one path at a time.

Each guarded path of the running example is turned into a system of
recurrences, solved in closed form, and the iteration counter is then
eliminated with a Groebner basis.
"""

from pathlib import Path

from symelim.groebner import Ideal, buchberger
from symelim.exactalg import MonomialOrder
from symelim.loopspec import extract_paths, format_path, parse_file
from symelim.polyinv import path_invariant_ideal
from symelim.recsolve import extract_recurrences, solve_cfinite

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

program = parse_file(CORPUS / "fig1.loop")

for path in extract_paths(program.loop):
    print(format_path(path))
    system = extract_recurrences(path, program)
    for line in system.format().splitlines():
        print("   ", line)

    # the initial values a = b = c = s = 0 are folded in
    forms = solve_cfinite(system, program.init_values)
    forms.verify()
    for line in forms.format().splitlines():
        print("   ", line)

    ideal = path_invariant_ideal(forms)
    basis = buchberger(Ideal(ideal.ring, ideal.generators), MonomialOrder.grevlex())
    print("    after eliminating the counter:")
    for g in basis.basis:
        print("       ", g, "= 0")
    print()
