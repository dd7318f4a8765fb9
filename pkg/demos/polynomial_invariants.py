"""Invariants valid on every path, checked against concrete runs.

The per-path ideals are intersected over longer and longer path sequences
until the basis stops changing.  The result is then checked on random traces
of the interpreter and compared with invariants fitted to those traces.
"""

import warnings
from pathlib import Path

from symelim.loopspec import parse_file, random_traces
from symelim.polyinv import (
    InsufficientTraceData, ansatz_oracle, format_invariant, invariant_fixed_point,
    verify_on_traces,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

program = parse_file(CORPUS / "fig1.loop")
ideal, report = invariant_fixed_point(program)

for rnd in report.rounds:
    print(f"L={rnd['L']}: {rnd['sequences']} sequences, basis {rnd['basis']}")
print(f"stable from L={report.stabilized_at}")
for text in ideal.display():
    print("  ", text)

traces = random_traces(program, 50, length=30, seed=1)
verdicts = verify_on_traces(ideal, traces)
print(f"\n{sum(v.passed for v in verdicts)} of {len(verdicts)} generators hold on 50 traces")

# an independent check: fit every cubic relation the traces satisfy
with warnings.catch_warnings():
    warnings.simplefilter("ignore", InsufficientTraceData)
    fitted = ansatz_oracle(traces, ideal.variables, 3)
outside = [p for p in fitted if not ideal.contains(p)]
print(f"{len(fitted)} fitted polynomials of degree <= 3, {len(outside)} outside the ideal")
for p in fitted[:3]:
    print("   e.g.", format_invariant(p))
