"""Literals, clauses and the syntactic checks on them.

Two kinds of literal exist.  A :class:`PredLit` is a possibly negated
predicate atom.  An :class:`ArithLit` states ``poly REL 0`` with REL one of
``>=``, ``=`` and ``!=``; negation is folded in (over the integers
``not (L >= 0)`` is ``-L - 1 >= 0``), so arithmetic literals carry no sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .terms import (
    App, Num, Sum, Term, Var, arith, match, padd, poly_of, pscale, subst,
    symbols, variables,
)

GE, EQ, NE = ">=", "=", "!="


class Literal:
    __slots__ = ()


@dataclass(frozen=True)
class PredLit(Literal):
    positive: bool
    pred: str
    args: tuple

    @property
    def atom(self) -> App:
        return App(self.pred, self.args)

    @property
    def key(self) -> str:
        return ("" if self.positive else "~") + self.atom.key

    def negate(self) -> "PredLit":
        return PredLit(not self.positive, self.pred, self.args)

    def subst(self, sigma) -> "PredLit":
        return PredLit(self.positive, self.pred, tuple(subst(a, sigma) for a in self.args))

    def terms(self) -> tuple:
        return self.args

    def __str__(self):
        return self.key


@dataclass(frozen=True)
class ArithLit(Literal):
    rel: str
    poly: Term

    @property
    def key(self) -> str:
        return f"{self.poly.key} {self.rel} 0"

    def negate(self) -> "ArithLit":
        if self.rel == GE:
            return ArithLit(GE, arith(padd(pscale(poly_of(self.poly), -1), {(): -1})))
        return ArithLit(NE if self.rel == EQ else EQ, self.poly)

    def subst(self, sigma) -> "ArithLit":
        return ArithLit(self.rel, subst(self.poly, sigma))

    def terms(self) -> tuple:
        return (self.poly,)

    def __str__(self):
        return render_arith(self)


# -- normalization -------------------------------------------------------------------

TRUE, FALSE = "true", "false"


def normalize_lit(lit: Literal):
    """Canonical form of a literal, or TRUE / FALSE when it is ground-decided."""
    if isinstance(lit, PredLit):
        return lit
    p = poly_of(lit.poly)
    const = p.pop((), 0)
    if not p:
        holds = {GE: const >= 0, EQ: const == 0, NE: const != 0}[lit.rel]
        return TRUE if holds else FALSE
    g = 0
    for c in p.values():
        g = math.gcd(g, c)
    if lit.rel == GE:
        p = {m: c // g for m, c in p.items()}
        const = math.floor(const / g) if const % g else const // g
    else:
        if const % g:
            return FALSE if lit.rel == EQ else TRUE
        p = {m: c // g for m, c in p.items()}
        const //= g
        lead = min(p, key=lambda m: Sum(((m, 1),)).key)
        if p[lead] < 0:
            p = {m: -c for m, c in p.items()}
            const = -const
    if const:
        p[()] = const
    return ArithLit(lit.rel, arith(p))


def ge(s: Term, t: Term) -> ArithLit:
    return ArithLit(GE, arith(padd(poly_of(s), poly_of(t), -1)))


def gt(s: Term, t: Term) -> ArithLit:
    return ArithLit(GE, arith(padd(padd(poly_of(s), poly_of(t), -1), {(): -1})))


def le(s: Term, t: Term) -> ArithLit:
    return ge(t, s)


def lt(s: Term, t: Term) -> ArithLit:
    return gt(t, s)


def eq(s: Term, t: Term) -> ArithLit:
    return ArithLit(EQ, arith(padd(poly_of(s), poly_of(t), -1)))


def ne(s: Term, t: Term) -> ArithLit:
    return ArithLit(NE, arith(padd(poly_of(s), poly_of(t), -1)))


# -- clauses -------------------------------------------------------------------------


@dataclass
class Derivation:
    rule: str
    parents: tuple = ()
    info: tuple = ()
    note: str = ""
    rewrites: tuple = ()


@dataclass
class Clause:
    literals: tuple
    derivation: Derivation = field(default_factory=lambda: Derivation("input"))
    id: int = -1

    @property
    def key(self) -> str:
        return " | ".join(l.key for l in self.literals) or "$false"

    def is_empty(self) -> bool:
        return not self.literals

    def variables(self) -> set:
        out: set = set()
        for lit in self.literals:
            for t in lit.terms():
                variables(t, out)
        return out

    def symbols(self) -> set:
        out: set = set()
        for lit in self.literals:
            if isinstance(lit, PredLit):
                out.add((lit.pred, len(lit.args)))
            for t in lit.terms():
                symbols(t, out)
        return out

    def weight(self) -> int:
        from .order import weight
        return sum(weight(t) + (1 if isinstance(l, PredLit) else 2)
                   for l in self.literals for t in l.terms())

    def __str__(self):
        return render_clause(self)


def make_clause(literals: Iterable[Literal], derivation: Derivation | None = None):
    """Normalized clause, or None if it is a tautology."""
    lits: dict = {}
    for lit in literals:
        n = normalize_lit(lit)
        if n is TRUE:
            return None
        if n is FALSE:
            continue
        lits.setdefault(n.key, n)
    lits = _drop_stronger(lits)
    ordered = [lits[k] for k in sorted(lits)]
    ordered = _canonical_vars(ordered)
    clause = Clause(tuple(ordered), derivation or Derivation("input"))
    return None if is_tautology(clause) else clause


def _drop_stronger(lits: dict) -> dict:
    # of L + c >= 0 and L + d >= 0 with c <= d the first implies the second,
    # so in a disjunction only the second is needed
    best: dict = {}
    for key, lit in lits.items():
        if isinstance(lit, ArithLit) and lit.rel == GE:
            p = poly_of(lit.poly)
            c = p.pop((), 0)
            body = arith(p).key
            if body not in best or best[body][1] < c:
                best[body] = (key, c)
    keep = {k for k, _ in best.values()}
    return {k: l for k, l in lits.items()
            if not (isinstance(l, ArithLit) and l.rel == GE) or k in keep}


def _canonical_vars(lits: Sequence[Literal]) -> list:
    order: list = []
    for lit in lits:
        for t in lit.terms():
            _collect_in_order(t, order)
    sigma = {name: Var(f"X{i}") for i, name in enumerate(order)}
    if all(sigma[n].name == n for n in order):
        return list(lits)
    renamed = [lit.subst(sigma) for lit in lits]
    renamed = [normalize_lit(l) for l in renamed]
    return sorted({l.key: l for l in renamed}.values(), key=lambda l: l.key)


def _collect_in_order(t: Term, out: list) -> None:
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, App):
        for a in t.args:
            _collect_in_order(a, out)
    elif isinstance(t, Sum):
        for m, _ in t.items:
            for a, _ in m:
                _collect_in_order(a, out)


def rename_clause(lits: Sequence[Literal], suffix: str) -> list:
    names: set = set()
    for lit in lits:
        for t in lit.terms():
            variables(t, names)
    sigma = {n: Var(n + suffix) for n in names}
    return [lit.subst(sigma) for lit in lits]


def is_tautology(clause: Clause) -> bool:
    lits = clause.literals
    preds = {(l.positive, l.atom) for l in lits if isinstance(l, PredLit)}
    if any((not pos, atom) in preds for pos, atom in preds):
        return True
    ariths = [l for l in lits if isinstance(l, ArithLit)]
    for i, a in enumerate(ariths):
        for b in ariths[i + 1:]:
            if a.rel == GE and b.rel == GE:
                total = padd(poly_of(a.poly), poly_of(b.poly))
                const = total.pop((), 0)
                if not total and const >= -1:
                    return True
            elif {a.rel, b.rel} == {EQ, NE} and a.poly == b.poly:
                return True
    return False


# -- subsumption ---------------------------------------------------------------------


def _lit_implies(general: Literal, specific: Literal, sigma: dict):
    """Extensions of sigma under which ``general``σ implies ``specific``."""
    if isinstance(general, PredLit):
        if not isinstance(specific, PredLit) or general.positive != specific.positive \
                or general.pred != specific.pred or len(general.args) != len(specific.args):
            return
        s = match(App("", general.args), App("", specific.args), sigma)
        if s is not None:
            yield s
        return
    if not isinstance(specific, ArithLit) or general.rel != specific.rel:
        return
    s = match(general.poly, specific.poly, sigma)
    if s is not None:
        yield s
        return
    if general.rel != GE:
        return
    # weakening: L >= 0 implies L + c >= 0 for c >= 0
    gp, sp = poly_of(general.poly), poly_of(specific.poly)
    gc, sc = gp.pop((), 0), sp.pop((), 0)
    if sc < gc:
        return
    s = match(arith(gp), arith(sp), sigma)
    if s is not None:
        yield s


def subsumes(general: Clause, specific: Clause) -> bool:
    """Whether some instance of ``general`` implies ``specific`` literal-wise."""
    if len(general.literals) > len(specific.literals):
        return False
    # matching binds only pattern variables, so target variables stay rigid
    return _subsume(list(general.literals), list(specific.literals), {})


def _subsume(pending: list, targets: list, sigma: dict) -> bool:
    if not pending:
        return True
    head, rest = pending[0], pending[1:]
    for target in targets:
        for s in _lit_implies(head, target, sigma):
            if _subsume(rest, targets, s):
                return True
    return False


# -- rendering -----------------------------------------------------------------------


def render_term(t: Term, arrays_as_brackets: bool = False) -> str:
    if isinstance(t, Var):
        return t.name.lower() if arrays_as_brackets else t.name
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, App):
        if not t.args:
            return t.fn
        inner = ", ".join(render_term(a, arrays_as_brackets) for a in t.args)
        if arrays_as_brackets and t.fn.endswith("_at") and len(t.args) == 1:
            return f"{t.fn[:-3]}[{inner}]"
        return f"{t.fn}({inner})"
    return render_poly(poly_of(t), arrays_as_brackets)


def render_poly(p: dict, brackets: bool = False) -> str:
    if not p:
        return "0"
    items = sorted(p.items(), key=lambda mc: (not mc[0], Sum(((mc[0], 1),)).key if mc[0] else ""))
    out = []
    for m, c in items:
        body = "*".join(render_term(a, brackets) + (f"^{e}" if e > 1 else "") for a, e in m)
        mag = abs(c)
        txt = str(mag) if not m else body if mag == 1 else f"{mag}*{body}"
        if not out:
            out.append(txt if c > 0 else f"-{txt}")
        else:
            out.append((" + " if c > 0 else " - ") + txt)
    return "".join(out)


def render_arith(lit: ArithLit, brackets: bool = False) -> str:
    """Literal printed as ``lhs REL rhs`` with positive terms on the left."""
    p = poly_of(lit.poly)
    const = p.pop((), 0)
    pos = {m: c for m, c in p.items() if c > 0}
    neg = {m: -c for m, c in p.items() if c < 0}
    rel = lit.rel
    if rel == GE and not pos:
        pos, neg, rel = neg, pos, "<="
        const = -const
    lhs = render_poly(pos, brackets)
    rhs = dict(neg)
    if const:
        rhs[()] = -const
    if rel in (GE, "<=") and rhs.get((), 0) == (1 if rel == GE else -1):
        # lhs >= r + 1 reads better as lhs > r
        rhs.pop(())
        rel = ">" if rel == GE else "<"
    return f"{lhs} {rel} {render_poly(rhs, brackets)}"


def render_lit(lit: Literal, brackets: bool = False) -> str:
    if isinstance(lit, PredLit):
        body = render_term(lit.atom, brackets)
        return body if lit.positive else f"~{body}"
    return render_arith(lit, brackets)


def render_clause(clause: Clause, brackets: bool = False) -> str:
    if not clause.literals:
        return "$false"
    return " | ".join(render_lit(l, brackets) for l in clause.literals)
