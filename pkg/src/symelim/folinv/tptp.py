"""Clause export in TPTP typed first-order form (TFF) with integer arithmetic.

Dialect: every symbol is declared with a ``type`` line over ``$int``
(predicates return ``$o``); each clause becomes one line
``tff(c<id>, role, ![X0: $int, ...]: (L1 | L2 ...), annotation).``
Inputs get role ``axiom`` and annotation ``introduced(schema, [...])`` naming
their schema; derived clauses get role ``plain`` and
``inference(rule, [status(thm)], [c<parent>, ...])``.  Arithmetic literals
use ``$greatereq``, ``=`` and ``!=`` over ``$sum`` and ``$product``, with
signed integer coefficients.

Names are mangled into the TPTP lower-case namespace: ``c_`` program scalars,
``v_`` value functions, ``arr_`` arrays, ``f_`` uninterpreted functions,
``cnt`` the iteration counter, ``path_`` path predicates, ``upd_`` update
predicates and ``sk_`` witnesses.
"""

from __future__ import annotations

import re

from .clauses import EQ, GE, Clause, PredLit
from .order import Signature
from .terms import App, Num, Term, Var

_PREFIX = {"const": "c_", "value": "v_", "array": "arr_", "uf": "f_", "path": "path_",
           "update": "upd_", "skolem": "sk_"}


def _clean(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", name)


def mangle(sig: Signature, name: str, arity: int) -> str:
    kind = sig.kinds.get((name, arity), "")
    if kind == "counter":
        return "cnt"
    base = getattr(sig, "origin", {}).get((name, arity), name)
    if kind in ("path", "update", "skolem"):
        base = name
        for stem in ("upd_", "sk_"):
            if base.startswith(stem):
                base = base[len(stem):]
        base = base.lstrip("g") if kind == "path" else base
    if kind == "array" and base.endswith("_at"):
        base = base[:-3]
    return _PREFIX.get(kind, "s_") + _clean(base)


def _term(t: Term, sig: Signature) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, App):
        head = mangle(sig, t.fn, len(t.args))
        return head if not t.args else f"{head}({','.join(_term(a, sig) for a in t.args)})"
    parts = []
    for m, c in t.items:
        factors = [_term(a, sig) for a, e in m for _ in range(e)]
        if c != 1 or not factors:
            factors.insert(0, str(c))
        prod = factors[0]
        for f in factors[1:]:
            prod = f"$product({prod},{f})"
        parts.append(prod)
    out = parts[0]
    for p in parts[1:]:
        out = f"$sum({out},{p})"
    return out


def _lit(lit, sig: Signature) -> str:
    if isinstance(lit, PredLit):
        atom = _term(App(lit.pred, lit.args), sig)
        return atom if lit.positive else f"~{atom}"
    body = _term(lit.poly, sig)
    if lit.rel == GE:
        return f"$greatereq({body},0)"
    return f"{body} {'=' if lit.rel == EQ else '!='} 0"


def clause_line(clause: Clause, sig: Signature) -> str:
    d = clause.derivation
    lits = " | ".join(_lit(l, sig) for l in clause.literals) or "$false"
    names = sorted(clause.variables(), key=lambda v: (len(v), v))
    body = f"![{','.join(f'{v}:$int' for v in names)}]: ({lits})" if names else f"({lits})"
    if d.rule == "input":
        schema = d.note.split(":")[0] or "input"
        return f"tff(c{clause.id}, axiom, {body}, introduced({schema.lower()},[]))."
    parents = ",".join(f"c{p}" for p in d.parents + tuple(u for u, _ in d.rewrites))
    return f"tff(c{clause.id}, plain, {body}, inference({d.rule},[status(thm)],[{parents}]))."


def type_lines(sig: Signature) -> list:
    out = []
    for (name, arity) in sorted(sig.tags):
        m = mangle(sig, name, arity)
        res = "$o" if (name, arity) in sig.predicates else "$int"
        if arity == 0:
            ty = res
        elif arity == 1:
            ty = f"$int > {res}"
        else:
            ty = f"({' * '.join(['$int'] * arity)}) > {res}"
        out.append(f"tff(type_{m}, type, {m}: {ty}).")
    return out


def dump(clauses, sig: Signature) -> str:
    """TFF text for ``clauses`` preceded by the symbol declarations."""
    lines = type_lines(sig)
    for i, c in enumerate(clauses):
        if c.id < 0:
            c = Clause(c.literals, c.derivation, i)
        lines.append(clause_line(c, sig))
    return "\n".join(lines) + "\n"
