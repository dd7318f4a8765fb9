"""Polynomial invariants by eliminating loop counters from closed forms.

Each guarded path is solved as its own assignment-only loop. Path sequences
are composed with one fresh counter per segment, every sequence yields an
ideal free of counters and exponentials, and the ideals of all sequences up
to a length bound are intersected until the reduced basis stops changing.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from .exactalg import MonomialOrder, PolyRing, Polynomial
from .groebner import (
    DEFAULT_LIMITS,
    GBLimits,
    GroebnerBasis,
    Ideal,
    eliminate,
    groebner_basis,
    intersect,
    reduce_modulo,
)
from .loopspec.interpreter import Trace
from .loopspec.syntax import (
    GuardedPath,
    Program,
    extract_paths,
    Assign,
    Var,
    format_path,
    iter_path_sequences,
    walk_expr,
)
from .recsolve import (
    ClosedFormSystem,
    ExponentialRelationSet,
    exponential_relations,
    extract_recurrences,
    fresh_name,
    initial_symbol,
    solve_cfinite,
)

GREVLEX = MonomialOrder.grevlex()


# -- single paths and merging ----------------------------------------------------------


def path_invariant_ideal(closed_forms: ClosedFormSystem,
                         exp_rels: ExponentialRelationSet | None = None,
                         limits: GBLimits = DEFAULT_LIMITS) -> Ideal:
    """Relations among the solved variables valid after any number of iterations.

    Builds <x - x(k)> plus the exponential relations and eliminates the
    counter and the exponential variables. The result lives over the solved
    variables followed by whatever parameters and initial symbols remain.
    """
    cf = closed_forms
    if exp_rels is None:
        exp_rels = exponential_relations(cf.bases, cf.exp_vars, limits)
    drop = [cf.counter, *cf.exp_vars]
    rest = [g for g in cf.ring.gens_names if g not in drop]
    ring = PolyRing(list(cf.forms) + drop + rest)
    gens = [ring.gen(v) - f.to_ring(ring) for v, f in cf.forms.items()]
    gens += [g.to_ring(ring) for g in exp_rels.generators]
    return eliminate(Ideal(ring, gens), drop, limits)


def merge_branches(ideals: Sequence[Ideal], limits: GBLimits = DEFAULT_LIMITS) -> Ideal:
    """Intersection of the given ideals: relations valid on every branch."""
    if not ideals:
        raise ValueError("nothing to merge")
    acc = ideals[0]
    for other in ideals[1:]:
        acc = _intersect_fast(acc, other, limits)
    return acc


def _contained(small: Ideal, big_gb: GroebnerBasis) -> bool:
    return all(not reduce_modulo(g, big_gb) for g in small)


def _intersect_fast(i1: Ideal, i2: Ideal, limits: GBLimits) -> Ideal:
    # skip the auxiliary-variable elimination when one ideal contains the other
    if i1.is_zero() or i2.is_zero():
        return Ideal(i1.ring)
    gb2 = groebner_basis(i2, GREVLEX, limits)
    if _contained(i1, gb2):
        return i1
    gb1 = groebner_basis(i1, GREVLEX, limits)
    if _contained(i2, gb1):
        return i2
    return intersect(i1, i2, limits)


# -- the fixed point ----------------------------------------------------------------------


@dataclass(frozen=True)
class PolyInvConfig:
    L_max: int = 3
    limits: GBLimits = DEFAULT_LIMITS


@dataclass
class InvariantIdeal:
    """Reduced grevlex basis over program scalars (and initial symbols).

    The grevlex order ranks later-declared variables higher.
    """
    ring: PolyRing
    gb: GroebnerBasis
    provenance: list
    initial_symbols: dict = field(default_factory=dict)
    display_priority: tuple = ()

    @property
    def generators(self) -> list[Polynomial]:
        return list(self.gb.basis)

    @property
    def variables(self) -> tuple:
        return self.ring.gens_names

    def contains(self, f: Polynomial) -> bool:
        if not f:
            return True
        return self.gb.contains(f.to_ring(self.ring))

    def display(self) -> list[str]:
        return [format_invariant(g, self.display_priority) for g in self.generators]


@dataclass
class PipelineReport:
    paths: list
    recurrences: dict
    closed_forms: dict
    exponential_relations: dict
    variables: tuple
    eliminated: dict
    rounds: list
    stabilized_at: int | None
    possibly_incomplete: bool
    gb_computations: int
    max_basis_size: int
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "paths": self.paths,
            "recurrences": self.recurrences,
            "closed_forms": self.closed_forms,
            "exponential_relations": self.exponential_relations,
            "variables": list(self.variables),
            "eliminated": self.eliminated,
            "rounds": self.rounds,
            "stabilized_at": self.stabilized_at,
            "possibly_incomplete": self.possibly_incomplete,
            "gb_computations": self.gb_computations,
            "max_basis_size": self.max_basis_size,
            "notes": self.notes,
        }


def format_invariant(p: Polynomial, priority: Sequence[str] = ()) -> str:
    """Integer-coefficient rendering ``... = 0`` with a positive leading term.

    Terms are listed lexicographically with ``priority`` (variables not in it
    follow in ring order).
    """
    order = MonomialOrder.lex(list(priority) + [g for g in p.ring.gens_names
                                                  if g not in priority])
    return f"{p.primitive(order).to_str(order)} = 0"


def _display_priority(analysis_vars: Sequence[str], forms: Iterable[ClosedFormSystem]) -> tuple:
    # variables with faster-growing closed forms are written first, so that
    # each identity reads as a definition of its most derived variable
    growth = {v: 0 for v in analysis_vars}
    for cf in forms:
        for v, f in cf.forms.items():
            if v in growth:
                growth[v] = max(growth[v], f.degree_in(cf.counter))
    pos = {v: i for i, v in enumerate(analysis_vars)}
    return tuple(sorted(analysis_vars, key=lambda v: (-growth[v], pos[v])))


def analysis_variables(program: Program, paths: Sequence[GuardedPath]) -> tuple[list, list, dict]:
    """(written scalars, read-only parameters, symbolic initials) in declaration order."""
    written = program.written_scalars()
    read = {x.name for p in paths for s in p.assignments if isinstance(s, Assign)
            for x in walk_expr(s.expr) if isinstance(x, Var)}
    init = program.init_values
    params = [v for v in program.scalars if v in read and v not in written]
    taken = set(program.scalars)
    symbols = {}
    for v in written:
        if v not in init:
            symbols[v] = initial_symbol(v, taken)
            taken.add(symbols[v])
    return written, params, symbols


class _Composer:
    """Closed forms of path sequences over a shared analysis ring."""

    def __init__(self, program: Program, paths: Sequence[GuardedPath], limits: GBLimits):
        self.program = program
        self.limits = limits
        self.written, self.params, self.symbols = analysis_variables(program, paths)
        init = program.init_values
        self.vars = tuple(self.written + self.params + list(self.symbols.values()))
        self.ring = PolyRing(self.vars)
        # later declarations rank higher, so bases are phrased in the
        # earliest-declared variables (typically the loop counter)
        self.order = MonomialOrder.grevlex(tuple(reversed(self.vars)))
        self.systems = {}
        self.forms: dict[int, ClosedFormSystem] = {}
        self.rels: dict[int, ExponentialRelationSet] = {}
        for p in paths:
            rs = extract_recurrences(p, program)
            cf = solve_cfinite(rs)
            self.systems[p.path_id] = rs
            self.forms[p.path_id] = cf
            self.rels[p.path_id] = exponential_relations(cf.bases, cf.exp_vars, limits)
        # read-only scalars with a concrete init are constants
        self.param_values = {v: init[v] for v in self.params if v in init}
        self.start = {}
        for v in self.written:
            self.start[v] = Fraction(init[v]) if v in init else self.symbols[v]

    def sequence_ideal(self, seq: Sequence[int]) -> tuple[Ideal, list[str]]:
        taken = set(self.vars)
        counters, zvars, renames = [], [], []
        for j, pid in enumerate(seq, start=1):
            cf = self.forms[pid]
            kj = fresh_name(f"k{j}", taken)
            taken.add(kj)
            zmap = {}
            for z in cf.exp_vars:
                zmap[z] = fresh_name(f"{z}_{j}", taken)
                taken.add(zmap[z])
            counters.append(kj)
            zvars += list(zmap.values())
            renames.append((kj, zmap))
        drop = counters + zvars
        big = PolyRing(list(self.written) + drop + list(self.params) + list(self.symbols.values()))
        state: dict[str, Polynomial] = {}
        for v in self.written:
            s = self.start[v]
            state[v] = big.gen(s) if isinstance(s, str) else big.const(s)
        params = {p: (big.const(self.param_values[p]) if p in self.param_values else big.gen(p))
                  for p in self.params}
        for pid, (kj, zmap) in zip(seq, renames):
            cf = self.forms[pid]
            mapping: dict = {cf.counter: big.gen(kj)}
            mapping.update({z: big.gen(n) for z, n in zmap.items()})
            mapping.update({cf.initials[v]: state[v] for v in cf.forms})
            mapping.update({p: params[p] for p in cf.params})
            new = {v: f.subs(mapping, big) for v, f in cf.forms.items()}
            state.update(new)
        gens = [big.gen(v) - state[v] for v in self.written]
        for pid, (_, zmap) in zip(seq, renames):
            rel = self.rels[pid]
            for g in rel.generators:
                gens.append(g.subs({z: big.gen(n) for z, n in zmap.items()}, big))
        # parameters fixed by init appear as constants
        gens += [big.gen(p) - big.const(v) for p, v in self.param_values.items()]
        out = eliminate(Ideal(big, gens), drop, self.limits)
        return Ideal(self.ring, [g.to_ring(self.ring) for g in out]), drop


def invariant_fixed_point(program: Program, config: PolyInvConfig | None = None
                          ) -> tuple[InvariantIdeal, PipelineReport]:
    """Polynomial invariant ideal of the guard-free abstraction of ``program``.

    Round L intersects the ideals of all path sequences of length L (no two
    equal neighbours) into the running ideal. The iteration stops when a round
    leaves the reduced basis unchanged; reaching ``L_max`` first marks the
    result as possibly incomplete.
    """
    config = config or PolyInvConfig()
    limits = config.limits
    paths = extract_paths(program.loop)
    comp = _Composer(program, paths, limits)
    n = len(paths)
    stats = {"gb": 0, "max": 0}

    def gb_of(ideal: Ideal) -> GroebnerBasis:
        gb = groebner_basis(ideal, comp.order, limits)
        stats["gb"] += 1
        stats["max"] = max(stats["max"], len(gb))
        return gb

    eliminated: dict[str, list[str]] = {}
    rounds = []
    history: list[GroebnerBasis] = []
    current: Ideal | None = None
    current_gb: GroebnerBasis | None = None
    stabilized_at = None
    for L in range(1, config.L_max + 1):
        seqs = list(iter_path_sequences(n, L))
        for seq in seqs:
            ideal, drop = comp.sequence_ideal(seq)
            stats["gb"] += 1
            eliminated[",".join(map(str, seq))] = drop
            if current is None:
                current, current_gb = ideal, gb_of(ideal)
                continue
            if _contained(current, gb_of(ideal)):
                continue
            current = intersect(current, ideal, limits)
            current_gb = gb_of(current)
            current = Ideal(comp.ring, current_gb.basis)
        history.append(current_gb)
        rounds.append({"L": L, "sequences": len(seqs), "basis_size": len(current_gb),
                       "basis": [g.to_str(comp.order) for g in current_gb.basis]})
        if L > 1 and current_gb.same_as(history[-2]):
            stabilized_at = L - 1
            break
        if n == 1 or not current_gb.basis:
            # no longer sequences exist, or the zero ideal cannot shrink further
            stabilized_at = L
            break
    possibly_incomplete = stabilized_at is None

    first_seen = []
    for g in current_gb.basis:
        rnd = next(i for i, h in enumerate(history, start=1) if g in h.basis)
        first_seen.append({"paths": [p.path_id for p in paths], "round": rnd})

    priority = _display_priority(comp.vars, comp.forms.values())
    inv = InvariantIdeal(comp.ring, current_gb, first_seen, dict(comp.symbols), priority)
    inv.rounds = history
    report = PipelineReport(
        paths=[format_path(p) for p in paths],
        recurrences={p.path_id: comp.systems[p.path_id].format().splitlines() for p in paths},
        closed_forms={p.path_id: comp.forms[p.path_id].format().splitlines() for p in paths},
        exponential_relations={p.path_id: [str(g) for g in comp.rels[p.path_id]] for p in paths},
        variables=comp.vars,
        eliminated=eliminated,
        rounds=rounds,
        stabilized_at=stabilized_at,
        possibly_incomplete=possibly_incomplete,
        gb_computations=stats["gb"],
        max_basis_size=stats["max"],
        notes=["path sequences are enumerated per length with no repeated neighbours; "
               "the fixed point is detected by equality of reduced bases"],
    )
    return inv, report


# -- trace-based checks ----------------------------------------------------------------


def trace_points(trace: Trace, variables: Sequence[str],
                 initial_symbols: Mapping[str, str] | None = None) -> list[dict]:
    """One valuation of ``variables`` per snapshot (initial symbols from snapshot 0)."""
    initial_symbols = initial_symbols or {}
    first = trace.snapshots[0].scalars
    fixed = {sym: first[v] for v, sym in initial_symbols.items()}
    out = []
    for snap in trace.snapshots:
        point = {}
        for v in variables:
            if v in fixed:
                point[v] = fixed[v]
            elif v in snap.scalars:
                point[v] = snap.scalars[v]
            else:
                raise KeyError(f"trace has no value for {v}")
        out.append(point)
    return out


@dataclass(frozen=True)
class Verdict:
    polynomial: Polynomial
    passed: bool
    counterexample: dict | None = None

    def describe(self) -> str:
        if self.passed:
            return f"pass  {self.polynomial}"
        c = self.counterexample
        vals = ", ".join(f"{k}={v}" for k, v in c["point"].items())
        return (f"FAIL  {self.polynomial}: trace {c['trace']} snapshot {c['k']} "
                f"({vals}) gives {c['value']}")


def verify_on_traces(ideal: InvariantIdeal | Sequence[Polynomial], traces: Sequence[Trace],
                     initial_symbols: Mapping[str, str] | None = None) -> list[Verdict]:
    """Evaluate every generator exactly at every snapshot of every trace."""
    if isinstance(ideal, InvariantIdeal):
        polys, initial_symbols = ideal.generators, ideal.initial_symbols
    else:
        polys = list(ideal)
    verdicts = []
    cache: dict = {}
    for p in polys:
        bad = None
        if p:
            names = p.ring.gens_names
            for ti, tr in enumerate(traces):
                key = (ti, names)
                if key not in cache:
                    cache[key] = trace_points(tr, names, initial_symbols)
                for k, point in enumerate(cache[key]):
                    val = p.eval(point)
                    if val:
                        bad = {"trace": ti, "k": k, "value": val,
                               "point": {v: point[v] for v in sorted(p.variables())}}
                        break
                if bad:
                    break
        verdicts.append(Verdict(p, bad is None, bad))
    return verdicts


class InsufficientTraceData(UserWarning):
    pass


def monomials_up_to(names: Sequence[str], degree: int) -> list[tuple]:
    """Exponent vectors of total degree <= ``degree``, highest degree first."""
    out = []
    for d in range(degree, -1, -1):
        for combo in itertools.combinations_with_replacement(range(len(names)), d):
            e = [0] * len(names)
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def ansatz_oracle(traces: Sequence[Trace], variables: Sequence[str], degree: int,
                  initial_symbols: Mapping[str, str] | None = None) -> list[Polynomial]:
    """Basis of all polynomials of degree <= ``degree`` vanishing on every snapshot.

    Works directly on the data: each snapshot gives one linear equation on the
    unknown coefficients, solved exactly by incremental Gaussian elimination.
    """
    names = tuple(variables)
    ring = PolyRing(names)
    monos = monomials_up_to(names, degree)
    ncols = len(monos)
    pivots: dict[int, list[Fraction]] = {}  # pivot column -> normalized row
    seen = 0
    distinct = set()
    for tr in traces:
        for point in trace_points(tr, names, initial_symbols):
            vals = [point[v] for v in names]
            distinct.add(tuple(vals))
            seen += 1
            row = []
            for m in monos:
                t = Fraction(1)
                for x, e in zip(vals, m):
                    if e:
                        t *= x ** e
                row.append(t)
            for col, prow in pivots.items():
                c = row[col]
                if c:
                    row = [a - c * b for a, b in zip(row, prow)]
            lead = next((i for i, a in enumerate(row) if a), None)
            if lead is None:
                continue
            inv = 1 / row[lead]
            row = [a * inv for a in row]
            for col in list(pivots):
                c = pivots[col][lead]
                if c:
                    pivots[col] = [a - c * b for a, b in zip(pivots[col], row)]
            pivots[lead] = row
            if len(pivots) == ncols:
                return []
    if len(distinct) < 2 * ncols:
        warnings.warn(f"only {len(distinct)} distinct states for {ncols} unknown coefficients; "
                      "the oracle may report spurious relations", InsufficientTraceData)
    basis = []
    for free in range(ncols):
        if free in pivots:
            continue
        vec = {monos[free]: Fraction(1)}
        for col, prow in pivots.items():
            if prow[free]:
                vec[monos[col]] = -prow[free]
        basis.append(Polynomial(ring, vec).primitive(GREVLEX))
    return basis


def clear_denominators(p: Polynomial) -> Polynomial:
    den = 1
    for c in p.terms.values():
        den = lcm(den, c.denominator)
    return p * den
