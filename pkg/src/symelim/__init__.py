"""Loop invariant synthesis by symbol elimination.

Polynomial invariants come from closed forms of recurrences and Groebner-basis
elimination (:mod:`symelim.polyinv`); quantified array invariants come from
update-predicate axioms and saturation (:mod:`symelim.folinv`).
"""

__version__ = "0.1.0"
