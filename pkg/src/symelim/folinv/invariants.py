"""Base-language consequences: filtering, minimization, printing and checking."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..loopspec.syntax import (
    And, ArrayRead, BinOp, Call, Cond, Implies, Num as NumE, Or, Quant, Var as VarE, format_formula,
)
from .clauses import EQ, GE, NE, ArithLit, Clause, PredLit, subsumes
from .order import BASE, Signature, UnregisteredSymbol
from .terms import App, Num, Sum, Term, Var, arith, poly_of, replace


def filter_base_language(clauses, sig: Signature) -> list:
    """Clauses whose symbols are all base symbols, in input order.

    Raises :class:`UnregisteredSymbol` if a clause uses a symbol the
    signature does not know; that is an internal error.
    """
    out = []
    for c in clauses:
        syms = c.symbols()
        for s in syms:
            if s not in sig.tags:
                raise UnregisteredSymbol(f"{s[0]}/{s[1]} in clause {c}")
        if all(sig.tags[s] == BASE for s in syms):
            out.append(c)
    return out


def minimize(clauses) -> list:
    """Drop clauses subsumed by another member (the older one wins a tie)."""
    clauses = list(clauses)
    keep = []
    for i, c in enumerate(clauses):
        beaten = False
        for j, d in enumerate(clauses):
            if i == j or not subsumes(d, c):
                continue
            if not subsumes(c, d) or j < i:
                beaten = True
                break
        if not beaten:
            keep.append(c)
    return keep


# -- implication form ----------------------------------------------------------------

_NAMES = "pqrstuvw"


def _is_bound(lit, origin_scalars: set) -> bool:
    """A literal that negates to a range condition on one variable."""
    if not isinstance(lit, ArithLit) or lit.rel != GE:
        return False
    p = poly_of(lit.poly)
    p.pop((), None)
    var_monos = [m for m in p if len(m) == 1 and isinstance(m[0][0], Var)]
    if len(var_monos) != 1 or abs(p[var_monos[0]]) != 1 or var_monos[0][0][1] != 1:
        return False
    rest = [m for m in p if m is not var_monos[0]]
    return all(len(m) == 1 and m[0][1] == 1 and isinstance(m[0][0], App)
               and not m[0][0].args and m[0][0].fn in origin_scalars for m in rest)


class _Printer:
    def __init__(self, sig: Signature, clause: Clause, taken: set):
        self.origin = getattr(sig, "origin", {})
        self.kinds = sig.kinds
        names = sorted(clause.variables(), key=lambda v: int(v[1:]) if v[1:].isdigit() else 0)
        free = [c for c in _NAMES if c not in taken] + [f"p{i}" for i in range(len(names))]
        self.vars = dict(zip(names, free))

    def term(self, t: Term):
        if isinstance(t, Var):
            return VarE(self.vars.get(t.name, t.name.lower()))
        if isinstance(t, Num):
            return NumE(t.value)
        if isinstance(t, App):
            name = self.origin.get((t.fn, len(t.args)), t.fn)
            if not t.args:
                return VarE(name)
            if self.kinds.get((t.fn, len(t.args))) == "array":
                return ArrayRead(name, self.term(t.args[0]))
            return Call(name, tuple(self.term(a) for a in t.args))
        return self.poly(poly_of(t))

    def poly(self, p: dict):
        if not p:
            return NumE(0)
        # highest degree first, constant last
        items = sorted(p.items(), key=lambda mc: (-sum(e for _, e in mc[0]),
                                                  arith({mc[0]: 1}).key if mc[0] else ""))
        out = None
        for m, c in items:
            mag = abs(c)
            body = NumE(mag) if mag != 1 or not m else None
            for a, e in m:
                for _ in range(e):
                    f = self.term(a)
                    body = f if body is None else BinOp("*", body, f)
            if out is None:
                out = body if c > 0 else BinOp("-", NumE(0), body) if m else NumE(c)
            else:
                out = BinOp("+" if c > 0 else "-", out, body)
        return out

    def lit(self, lit, lower_first: bool = False) -> Cond:
        """``lhs op rhs`` with positive terms on the left, turned around when
        only the right side mentions a variable (``p < b`` rather than
        ``b > p``).  ``lower_first`` prints lower bounds as ``0 <= p``."""
        if isinstance(lit, PredLit):
            raise ValueError("predicate literals have no loop-language form")
        p = poly_of(lit.poly)
        const = p.pop((), 0)
        lhs = {m: c for m, c in p.items() if c > 0}
        rhs = {m: -c for m, c in p.items() if c < 0}
        op = {GE: ">=", EQ: "==", NE: "!="}[lit.rel]
        if op == ">=" and not lhs:
            lhs, rhs, op, const = rhs, lhs, "<=", -const
        if const:
            rhs[()] = -const
        if op in (">=", "<=") and rhs.get((), 0) == (1 if op == ">=" else -1):
            rhs.pop(())
            op = ">" if op == ">=" else "<"
        left, right = self.poly(lhs), self.poly(rhs)
        flip = _has_var(rhs) and not _has_var(lhs)
        if lower_first and op in (">=", ">") and _has_var(lhs) and not _has_var(rhs):
            flip = True
        if flip:
            return Cond(_MIRROR[op], right, left)
        return Cond(op, left, right)


_MIRROR = {">=": "<=", "<=": ">=", ">": "<", "<": ">", "==": "==", "!=": "!="}


def _has_var(p: dict) -> bool:
    return any(isinstance(a, Var) for m in p for a, _ in m)


def _conj(fs, op=And):
    out = None
    for f in fs:
        out = f if out is None else op(out, f)
    return out


def _premise_order(c: Cond) -> tuple:
    # lower bounds (0 <= p) before upper bounds (p < b)
    return (not isinstance(c.left, NumE), str(c))


def implication_formula(clause: Clause, sig: Signature):
    """The clause as a loop-language formula ``forall p. premise ==> conclusion``."""
    scalars = {k[0] for k, kind in sig.kinds.items() if kind == "const"}
    pr = _Printer(sig, clause, {getattr(sig, "origin", {}).get(k, k[0]) for k in sig.tags})
    bounds = [l for l in clause.literals if _is_bound(l, scalars)]
    if len(bounds) == len(clause.literals):
        # all range conditions: conclude the one that mentions a program scalar
        symbolic = [l for l in bounds if len(poly_of(l.poly)) - (() in poly_of(l.poly)) > 1]
        bounds.remove(symbolic[0] if symbolic else bounds[-1])
    rest = [l for l in clause.literals if l not in bounds]
    premise = sorted((pr.lit(l.negate(), True) for l in bounds), key=_premise_order)
    conclusion = _conj([pr.lit(l) for l in rest], Or)
    body = conclusion if not premise else Implies(_conj(premise), conclusion)
    names = tuple(pr.vars[v] for v in sorted(pr.vars, key=lambda v: pr.vars[v]))
    return Quant("forall", names, body) if names else body


def render_invariant(clause: Clause, sig: Signature) -> str:
    return format_formula(implication_formula(clause, sig))


# -- ground checking -----------------------------------------------------------------


@dataclass
class GroundVerdict:
    passed: bool
    counterexample: dict | None = None
    checked: int = 0
    skipped: int = 0

    def describe(self) -> str:
        if self.passed:
            return f"pass ({self.checked} assignments, {self.skipped} skipped)"
        return f"fail at {self.counterexample}"


class _Missing(Exception):
    pass


def _evaluate(t: Term, env: dict, snapshot, uf, sig: Signature) -> Fraction:
    if isinstance(t, Var):
        return Fraction(env[t.name])
    if isinstance(t, Num):
        return Fraction(t.value)
    if isinstance(t, Sum):
        total = Fraction(0)
        for m, c in t.items:
            v = Fraction(c)
            for a, e in m:
                v *= _evaluate(a, env, snapshot, uf, sig) ** e
            total += v
        return total
    key = (t.fn, len(t.args))
    kind = sig.kinds.get(key)
    name = getattr(sig, "origin", {}).get(key, t.fn)
    args = [_evaluate(a, env, snapshot, uf, sig) for a in t.args]
    if kind == "const":
        return Fraction(snapshot.scalars[name])
    if kind == "array":
        idx = args[0]
        cells = snapshot.arrays.get(name, {})
        if idx.denominator != 1 or int(idx) not in cells:
            raise _Missing(name)
        return Fraction(cells[int(idx)])
    if kind == "uf":
        return Fraction(uf(name, tuple(args)))
    raise ValueError(f"cannot evaluate extended symbol {t.fn}/{len(t.args)}")


def _holds(lit, env, snapshot, uf, sig) -> bool:
    if isinstance(lit, PredLit):
        raise ValueError("cannot evaluate predicate literal {lit}")
    v = _evaluate(lit.poly, env, snapshot, uf, sig)
    return v >= 0 if lit.rel == GE else v == 0 if lit.rel == EQ else v != 0


def ground_check(clause: Clause | None, trace, bound: int, sig: Signature) -> GroundVerdict:
    """Evaluate ``clause`` on the final state of ``trace`` for every assignment
    of its variables to integers in ``[-bound, bound]``.

    Assignments that read an array cell the trace never recorded are skipped
    and counted.  ``None`` (no clause) passes vacuously.
    """
    if clause is None:
        return GroundVerdict(True)
    names = sorted(clause.variables())
    snap, uf = trace.final, trace.uf
    verdict = GroundVerdict(True)
    for values in itertools.product(range(-bound, bound + 1), repeat=len(names)):
        env = dict(zip(names, values))
        try:
            ok = any(_holds(l, env, snap, uf, sig) for l in clause.literals)
        except _Missing:
            verdict.skipped += 1
            continue
        verdict.checked += 1
        if not ok:
            return GroundVerdict(False, env, verdict.checked, verdict.skipped)
    return verdict


# -- existential witnesses -----------------------------------------------------------


@dataclass
class ExistentialInvariant:
    """``forall p. guard ==> exists q. body`` from clauses sharing a witness."""

    skolem: str
    guard: list          # literals over the universal variable (the clause part)
    body: list           # literals over the witness
    sources: list = field(default_factory=list)
    text: str = ""


def existential_invariants(clauses, sig: Signature) -> list:
    """Group clauses whose only extended symbol is one witness ``sk(Y)``.

    A clause ``G(Y) | W(sk(Y))`` states that outside ``G`` the witness
    satisfies ``W``; clauses with the same skolem term and the same ``G`` are
    conjoined, and abstracting the witness yields an existential formula.
    """
    skolems = {k[0] for k, kind in sig.kinds.items() if kind == "skolem"}
    groups: dict = {}
    for c in clauses:
        ext = {s for s in c.symbols() if sig.tags.get(s) != BASE}
        if len(ext) != 1 or next(iter(ext))[0] not in skolems:
            continue
        sk = next(iter(ext))[0]
        wits = {t for l in c.literals for t in _apps(l) if t.fn == sk}
        if len(wits) != 1:
            continue
        w = next(iter(wits))
        if not isinstance(w.args[0], Var) or c.variables() != {w.args[0].name}:
            continue
        y = w.args[0].name
        guard = [l for l in c.literals if not any(t.fn == sk for t in _apps(l))]
        body = [l for l in c.literals if l not in guard]
        if len(body) != 1:
            continue
        gkey = (sk, tuple(sorted(_rename(l, y).key for l in guard)))
        grp = groups.setdefault(gkey, ExistentialInvariant(sk, [_rename(l, y) for l in guard], []))
        lit = _rename(body[0], y)
        if lit.key not in {b.key for b in grp.body}:
            grp.body.append(lit)
            grp.sources.append(c.id)
    out = []
    for (sk, _), grp in sorted(groups.items(), key=lambda kv: kv[0]):
        grp.text = _render_existential(grp, sig)
        out.append(grp)
    return out


def _apps(lit):
    stack = list(lit.terms())
    while stack:
        t = stack.pop()
        if isinstance(t, App):
            yield t
            stack.extend(t.args)
        elif isinstance(t, Sum):
            for m, _ in t.items:
                stack.extend(a for a, _ in m)


def _rename(lit, y):
    return lit.subst({y: Var("X0")})


def _render_existential(grp: ExistentialInvariant, sig: Signature) -> str:
    w = App(grp.skolem, (Var("X0"),))
    hole = Var("W")
    body = [_replace_term(l, w, hole) for l in grp.body]
    pr = _Printer(sig, Clause(tuple(grp.guard)), {getattr(sig, "origin", {}).get(k, k[0])
                                                  for k in sig.tags})
    pr.vars.setdefault("X0", _NAMES[0])
    pr.vars["W"] = next(c for c in _NAMES if c not in pr.vars.values())
    conds = sorted((pr.lit(l) for l in body), key=_premise_order)
    premise = sorted((pr.lit(l.negate(), True) for l in grp.guard), key=_premise_order)
    inner = Quant("exists", (pr.vars["W"],), _conj(conds))
    formula = inner if not premise else Implies(_conj(premise), inner)
    return format_formula(Quant("forall", (pr.vars["X0"],), formula))


def _replace_term(lit, old, new):
    if isinstance(lit, PredLit):
        return PredLit(lit.positive, lit.pred, tuple(replace(a, old, new) for a in lit.args))
    return ArithLit(lit.rel, replace(lit.poly, old, new))
