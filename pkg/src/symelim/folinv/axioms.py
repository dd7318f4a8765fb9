"""Extended-language loop properties (the clause set handed to saturation).

Symbols.  Base: every scalar ``x`` as a constant holding its value after the
last executed iteration, every array ``X`` as a unary function ``X_at`` for
its final contents, and the program's uninterpreted functions.  Extended: a
counter constant for the number of executed iterations, a unary function
``x(i)`` per written scalar for its value before iteration ``i``, the update
predicates ``upd_X(i, p, v)``, one path predicate ``g<j>(i)`` per guarded
path ("iteration i executes path j") and skolem witnesses ``sk_x`` for dense
counters.

Outside the range ``0..n`` the value functions are unconstrained by the loop,
so we fix them: a scalar with a closed form follows it for every integer, any
other scalar keeps its first (resp. last) value below (resp. above) the range.
This makes the unguarded monotonicity and closed-form clauses valid.

The schema list is a reconstruction; each clause carries its schema tag
(``A1`` .. ``A5``) in the derivation note.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from ..exactalg import Polynomial
from ..loopspec.syntax import (
    ArrayAssign, ArrayRead, Assign, BinOp, Call, Cond, Neg, Num as NumE, Program, Var as VarE,
    extract_paths,
)
from ..recsolve import UnsupportedRecurrence, extract_recurrences, fresh_name, path_transition, \
    solve_cfinite
from .clauses import Derivation, PredLit, eq, ge, gt, le, lt, make_clause, ne
from .order import BASE, EXTENDED, Signature
from .terms import App, Term, Var, add, arith, mul, num, padd, pmul, poly_of, sub, subst

I, J, P, V = Var("I"), Var("J"), Var("P"), Var("V")


class AxiomWarning(UserWarning):
    """An axiom schema instance was skipped (unsupported expression form)."""


@dataclass
class LoopSignature(Signature):
    """Signature plus the naming used for one program."""

    counter: str = "n"
    scalar_fn: dict = field(default_factory=dict)  # program scalar -> (const, value fn)
    array_fn: dict = field(default_factory=dict)   # program array -> function name
    path_pred: dict = field(default_factory=dict)  # path id -> predicate name
    upd_pred: dict = field(default_factory=dict)   # array -> predicate name
    skolem: dict = field(default_factory=dict)     # scalar -> skolem name
    origin: dict = field(default_factory=dict)     # (name, arity) -> program name

    def const(self, x: str) -> App:
        return App(self.scalar_fn[x][0])

    def value(self, x: str, at: Term) -> App:
        return App(self.scalar_fn[x][1], (at,))

    @property
    def n(self) -> App:
        return App(self.counter)


@dataclass
class AxiomSet:
    clauses: list
    signature: LoopSignature
    skipped: list
    closed_forms: dict   # scalar -> (numerator, den) with den * x(I) = numerator

    def by_schema(self, tag: str) -> list:
        return [c for c in self.clauses if c.derivation.note.split(":")[0] == tag]


class _Unsupported(Exception):
    pass


def build_signature(program: Program) -> LoopSignature:
    taken = set(program.scalars) | set(program.arrays) | {f for f, _ in program.funs}
    sig = LoopSignature()

    def fresh(stem):
        name = fresh_name(stem, taken)
        taken.add(name)
        return name

    written = program.written_scalars()
    for x in program.scalars:
        sig.add(x, 0, BASE, "const")
        sig.origin[(x, 0)] = x
        sig.scalar_fn[x] = (x, x)
        if x in written:
            sig.add(x, 1, EXTENDED, "value")
    for X in program.arrays:
        name = fresh(f"{X}_at")
        sig.array_fn[X] = name
        sig.add(name, 1, BASE, "array")
        sig.origin[(name, 1)] = X
    for f, arity in program.funs:
        sig.add(f, arity, BASE, "uf")
        sig.origin[(f, arity)] = f
    sig.counter = fresh("n")
    sig.add(sig.counter, 0, EXTENDED, "counter")
    for path in extract_paths(program.loop):
        name = fresh(f"g{path.path_id}")
        sig.path_pred[path.path_id] = name
        sig.add(name, 1, EXTENDED, "path", predicate=True)
    for X in _written_arrays(program):
        name = fresh(f"upd_{X}")
        sig.upd_pred[X] = name
        sig.add(name, 3, EXTENDED, "update", predicate=True)
    return sig


def _written_arrays(program: Program) -> list:
    out = []
    for path in extract_paths(program.loop):
        for s in path.assignments:
            if isinstance(s, ArrayAssign) and s.array not in out:
                out.append(s.array)
    return [X for X in program.arrays if X in out]


# -- symbolic execution of one iteration -------------------------------------------------


class _Exec:
    def __init__(self, program: Program, sig: LoopSignature, at: Term):
        self.program = program
        self.sig = sig
        self.written_arrays = set(_written_arrays(program))
        self.state = {x: (sig.value(x, at) if x in program.written_scalars() else sig.const(x))
                      for x in program.scalars}

    def expr(self, e) -> Term:
        if isinstance(e, NumE):
            return num(e.value)
        if isinstance(e, VarE):
            return self.state[e.name]
        if isinstance(e, Neg):
            return arith({m: -c for m, c in poly_of(self.expr(e.operand)).items()})
        if isinstance(e, BinOp):
            l, r = self.expr(e.left), self.expr(e.right)
            return add(l, r) if e.op == "+" else sub(l, r) if e.op == "-" else mul(l, r)
        if isinstance(e, ArrayRead):
            if e.array in self.written_arrays:
                raise _Unsupported(f"read of array {e.array}, which the loop also writes")
            return App(self.sig.array_fn[e.array], (self.expr(e.index),))
        if isinstance(e, Call):
            return App(e.fn, tuple(self.expr(a) for a in e.args))
        raise _Unsupported(f"expression {e!r}")

    def cond(self, c: Cond):
        l, r = self.expr(c.left), self.expr(c.right)
        return {"<": lt, "<=": le, ">": gt, ">=": ge, "==": eq, "!=": ne}[c.op](l, r)


def _scalar_updates(program, path, sig, at):
    """State after the path (scalar -> term) and the array writes with their states."""
    ex = _Exec(program, sig, at)
    writes = []
    for stmt in path.assignments:
        if isinstance(stmt, Assign):
            try:
                ex.state[stmt.target] = ex.expr(stmt.expr)
            except _Unsupported as err:
                ex.state[stmt.target] = err
        elif isinstance(stmt, ArrayAssign):
            try:
                writes.append((stmt, ex.expr(stmt.index), ex.expr(stmt.value)))
            except _Unsupported as err:
                writes.append((stmt, err, err))
    return ex, writes


def _guards(program, path, sig, at):
    """Path condition literals at iteration ``at`` (loop guard first)."""
    ex = _Exec(program, sig, at)
    out = [ex.cond(program.loop.guard)]
    done = 0
    for g in path.guard_literals:
        while done < g.at:
            stmt = path.assignments[done]
            if isinstance(stmt, Assign):
                ex.state[stmt.target] = ex.expr(stmt.expr)
            done += 1
        out.append(ex.cond(g.effective()))
    return out


# -- generation ---------------------------------------------------------------------


def generate_extended_axioms(program: Program, poly_invs=None) -> AxiomSet:
    """Clausal loop properties over the extended signature.

    ``poly_invs`` is an optional :class:`~symelim.polyinv.InvariantIdeal` whose
    generators are injected as (A5) clauses over the value functions.
    Unsupported forms skip the affected axiom with an :class:`AxiomWarning`.
    """
    sig = build_signature(program)
    paths = extract_paths(program.loop)
    written = program.written_scalars()
    n = sig.n
    out: list = []
    skipped: list = []

    def emit(tag, text, lits):
        c = make_clause(lits, Derivation("input", note=f"{tag}: {text}"))
        if c is not None:
            out.append(c)

    def skip(tag, why):
        skipped.append(f"{tag}: {why}")
        warnings.warn(f"{tag} skipped: {why}", AxiomWarning, stacklevel=3)

    in_range = [ge(I, num(0)), lt(I, n)]          # 0 <= I < n
    not_in_range = [l.negate() for l in in_range]
    g_of = {p.path_id: (lambda t, name=sig.path_pred[p.path_id]: PredLit(True, name, (t,)))
            for p in paths}

    # path predicates: which iteration runs which path
    for p in paths:
        g = g_of[p.path_id]
        for lit in in_range:
            emit("A3", f"path {p.path_id} only inside the loop", [g(I).negate(), lit])
        try:
            for lit in _guards(program, p, sig, I):
                emit("A3", f"path {p.path_id} condition", [g(I).negate(), lit])
        except _Unsupported as err:
            skip("A3", f"condition of path {p.path_id}: {err}")
    emit("A3", "some path runs in every iteration", not_in_range + [g_of[p.path_id](I) for p in paths])
    for a in paths:
        for b in paths:
            if a.path_id < b.path_id:
                emit("A3", "paths are exclusive", [g_of[a.path_id](I).negate(),
                                                   g_of[b.path_id](I).negate()])

    # per-path scalar steps and array writes
    steps: dict = {}
    writes_of: dict = {}
    for p in paths:
        ex, writes = _scalar_updates(program, p, sig, I)
        steps[p.path_id] = {x: ex.state[x] for x in written}
        for x in written:
            rhs = ex.state[x]
            if isinstance(rhs, Exception):
                skip("A3", f"step of {x} on path {p.path_id}: {rhs}")
                continue
            emit("A3", f"step of {x} on path {p.path_id}",
                 [g_of[p.path_id](I).negate(), eq(sig.value(x, add(I, num(1))), rhs)])
        for stmt, idx, val in writes:
            writes_of.setdefault(stmt.array, []).append((p.path_id, idx, val))

    # counters: constant increments on every path
    closed = _closed_forms(program, paths, sig)
    for x in written:
        incs = [_increment(steps[p.path_id][x], sig.value(x, I)) for p in paths]
        if any(d is None for d in incs):
            continue
        xi, xj = sig.value(x, I), sig.value(x, J)
        if all(d >= 0 for d in incs):
            emit("A3", f"{x} is non-decreasing", [gt(I, J), le(xi, xj)])
        elif all(d <= 0 for d in incs):
            emit("A3", f"{x} is non-increasing", [gt(I, J), ge(xi, xj)])
        if set(incs) <= {0, 1} and 1 in incs:
            emit("A3", f"{x} grows by at most one per iteration",
                 [le(sig.value(x, add(I, num(1))), add(xi, num(1)))])
            sk = fresh_name(f"sk_{x}", {k[0] for k in sig.tags})
            sig.skolem[x] = sk
            sig.add(sk, 1, EXTENDED, "skolem")
            w = App(sk, (P,))
            guard = [lt(P, sig.value(x, num(0))), ge(P, sig.value(x, n))]
            emit("A3", f"witness iteration for each value of {x}: in range", guard + [ge(w, num(0))])
            emit("A3", f"witness iteration for each value of {x}: in range", guard + [lt(w, n)])
            emit("A3", f"witness iteration for each value of {x}: value", guard + [eq(sig.value(x, w), P)])
            emit("A3", f"witness iteration for each value of {x}: increment",
                 guard + [g_of[p.path_id](w) for p, d in zip(paths, incs) if d == 1])

    # update introduction, characterization and final-value link
    for X in _written_arrays(program):
        upd = sig.upd_pred[X]
        sites = writes_of.get(X, [])
        usable = [(pid, idx, val) for pid, idx, val in sites if not isinstance(idx, Exception)]
        for pid, idx, val in sites:
            if isinstance(idx, Exception):
                skip("A1", f"write to {X} on path {pid}: {idx}")
                continue
            emit("A1", f"write to {X} on path {pid}",
                 [g_of[pid](I).negate(), PredLit(True, upd, (I, idx, val))])
        ref = PredLit(False, upd, (I, P, V))
        if len(usable) != len(sites):
            skip("A2", f"{X} has an unsupported write")
            skip("A4", f"{X} has an unsupported write")
            continue
        emit("A2", f"updates of {X} happen on writing paths",
             [ref] + [g_of[pid](I) for pid in dict.fromkeys(pid for pid, _, _ in usable)])
        if len(usable) != 1:
            skip("A2", f"{X} is written at {len(usable)} places; position and value not characterized")
            skip("A4", f"{X} is written at {len(usable)} places")
            continue
        (pid, idx, val), = usable
        emit("A2", f"position written in {X}", [ref, eq(P, idx)])
        emit("A2", f"value written in {X}", [ref, eq(V, val)])
        if _injective_index(idx, pid, paths, steps, sig):
            emit("A4", f"final value of {X} at written positions",
                 [ref, eq(App(sig.array_fn[X], (P,)), V)])
        else:
            skip("A4", f"cannot show that writes to {X} hit distinct positions")

    # scalar links, closed forms, injected polynomial invariants
    init = program.init_values
    for x in written:
        emit("A5", f"{x} after the loop", [eq(sig.value(x, n), sig.const(x))])
        if x in init:
            emit("A5", f"{x} before the loop", [eq(sig.value(x, num(0)), num(init[x]))])
    for x, (numerator, den) in closed.items():
        emit("A5", f"closed form of {x}", [eq(mul(num(den), sig.value(x, I)), numerator)])
        emit("A5", f"closed form of {x} after the loop",
             [eq(mul(num(den), sig.const(x)), subst(numerator, {"I": n}))])
    if poly_invs is not None:
        range_incl = [ge(I, num(0)), le(I, n)]
        for g in poly_invs.generators:
            term = _poly_term(g, sig, poly_invs.initial_symbols, I)
            if term is None:
                skip("A5", f"invariant {g} mentions unknown symbols")
                continue
            emit("A5", f"invariant {g} at every iteration",
                 [l.negate() for l in range_incl] + [eq(term, num(0))])
            final = _poly_term(g, sig, poly_invs.initial_symbols, None)
            emit("A5", f"invariant {g} after the loop", [eq(final, num(0))])
    return AxiomSet(out, sig, skipped, closed)


def _increment(rhs, xi: Term):
    if isinstance(rhs, Exception):
        return None
    d = poly_of(sub(rhs, xi))
    if not d:
        return 0
    if list(d) == [()]:
        return d[()]
    return None


def _injective_index(idx: Term, pid: int, paths, steps, sig) -> bool:
    """The write index is x(i) for a counter that strictly grows between writes."""
    for x, (_, fn) in sig.scalar_fn.items():
        xi = App(fn, (I,))
        if idx != xi or x not in steps[pid]:
            continue
        incs = [_increment(steps[p.path_id][x], xi) for p in paths]
        if any(d is None or d < 0 for d in incs):
            return False
        return incs[[p.path_id for p in paths].index(pid)] >= 1
    return False


def _fraction_poly_term(poly: Polynomial, sym):
    """(integer term, denominator) for ``poly`` with symbols mapped by ``sym``."""
    den = 1
    for c in poly.terms.values():
        den = lcm(den, Fraction(c).denominator)
    acc: dict = {}
    names = poly.ring.gens_names
    for mono, c in poly.terms.items():
        term = {(): int(Fraction(c) * den)}
        for name, e in zip(names, mono):
            if not e:
                continue
            base = sym(name)
            if base is None:
                return None
            for _ in range(e):
                term = pmul(term, poly_of(base))
        acc = padd(acc, term)
    return arith(acc), den


def _poly_term(poly: Polynomial, sig: LoopSignature, initial_symbols, at: Term):
    inits = {s: x for x, s in (initial_symbols or {}).items()}

    def sym(name):
        if name in inits:
            return sig.value(inits[name], num(0))
        if name in sig.scalar_fn:
            if at is None or (name, 1) not in sig.tags:
                return sig.const(name)
            return sig.value(name, at)
        return None
    got = _fraction_poly_term(poly, sym)
    return None if got is None else got[0]


def _closed_forms(program, paths, sig) -> dict:
    """Closed forms for scalars updated the same way on every path.

    Maps each such scalar to ``(numerator, den)`` with ``den * x(I) = numerator``.
    """
    written = program.written_scalars()
    try:
        updates = [path_transition(p, program.scalars)[1] for p in paths]
    except UnsupportedRecurrence:
        return {}
    uniform = set()
    for x in written:
        vals = [str(u[x]) if x in u else x for u in updates]
        if all(v == vals[0] for v in vals):
            uniform.add(x)
    # usable only when everything it reads is uniform too
    changed = True
    while changed:
        changed = False
        for x in sorted(uniform):
            deps = updates[0][x].variables() if x in updates[0] else set()
            if (set(deps) & set(written)) - uniform:
                uniform.discard(x)
                changed = True
    if not uniform:
        return {}
    try:
        cf = solve_cfinite(extract_recurrences(paths[0], program), program.init_values)
    except UnsupportedRecurrence:
        return {}
    inits = {s: x for x, s in cf.initials.items()}

    def sym(name):
        if name == cf.counter:
            return I
        if name in inits:
            return sig.value(inits[name], num(0))
        if name in sig.scalar_fn and (name, 1) not in sig.tags:
            return sig.const(name)
        return None

    out = {}
    for x in written:
        if x not in uniform or x not in cf.forms:
            continue
        form = cf.forms[x]
        if set(form.variables()) & set(cf.exp_vars):
            continue
        got = _fraction_poly_term(form, sym)
        if got is not None:
            out[x] = got
    return out
