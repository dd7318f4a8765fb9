"""Quantified loop invariants by saturation in an extended first-order language.

The loop is described by clauses over an extended signature (iteration
counter, per-iteration values, update and path predicates); saturation with
extended symbols on top of the order derives consequences, and those that
mention base symbols only are loop invariants.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .axioms import AxiomSet, AxiomWarning, LoopSignature, build_signature, generate_extended_axioms
from .clauses import Clause, Derivation, make_clause, render_clause, subsumes
from .invariants import (
    ExistentialInvariant, GroundVerdict, existential_invariants, filter_base_language,
    ground_check, implication_formula, minimize, render_invariant,
)
from .order import BASE, EXTENDED, KBO, Precedence, Signature, UnregisteredSymbol
from .saturate import (
    Calculus, SaturationError, SaturationLimits, SaturationResult, replay, saturate,
)
from .tptp import dump as tptp_dump

__all__ = [
    "AxiomSet", "AxiomWarning", "BASE", "Calculus", "Clause", "Derivation", "EXTENDED",
    "ExistentialInvariant", "FolResult", "GroundVerdict", "KBO", "LoopSignature", "Precedence",
    "SaturationError", "SaturationLimits", "SaturationResult", "Signature", "UnregisteredSymbol",
    "build_signature", "existential_invariants", "filter_base_language",
    "first_order_invariants", "generate_extended_axioms", "ground_check", "implication_formula",
    "make_clause", "minimize", "render_clause", "render_invariant", "replay", "saturate",
    "subsumes", "tptp_dump",
]


@dataclass
class FolResult:
    axioms: AxiomSet
    saturation: SaturationResult
    emitted: list                 # minimized base-language clauses
    formulas: list                # their implication forms, same order
    existential: list             # ExistentialInvariant, attempted only
    seconds: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return self.saturation.partial

    @property
    def signature(self) -> LoopSignature:
        return self.axioms.signature


def first_order_invariants(program, poly_invs=None,
                           limits: SaturationLimits | None = None) -> FolResult:
    """Axioms, saturation and the base-language invariants of ``program``."""
    start = time.perf_counter()
    ax = generate_extended_axioms(program, poly_invs)
    sig = ax.signature
    res = saturate(ax.clauses, sig, Precedence(sig), limits)
    base = [c for c in filter_base_language(res.clauses, sig) if not c.is_empty()]
    emitted = minimize(base)
    notes = list(ax.skipped)
    if res.partial:
        notes.append(f"saturation stopped early ({res.reason}); output is sound but may be incomplete")
    if res.refuted:
        notes.append("the axioms are inconsistent (empty clause derived)")
    formulas = []
    for c in emitted:
        try:
            formulas.append(render_invariant(c, sig))
        except ValueError:
            formulas.append(render_clause(c))
    exist = existential_invariants(res.clauses, sig)
    return FolResult(ax, res, emitted, formulas, exist, time.perf_counter() - start, notes)
