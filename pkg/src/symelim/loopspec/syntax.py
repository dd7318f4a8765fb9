"""AST of the loop language, pretty-printing, and path extraction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Union

Pos = tuple  # (line, column), excluded from equality


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ArrayRead:
    array: str
    index: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*"
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


Expr = Union[Num, Var, ArrayRead, Call, BinOp, Neg]

RELOPS = ("<", "<=", ">", ">=", "==", "!=")
NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


@dataclass(frozen=True)
class Cond:
    op: str
    left: Expr
    right: Expr
    pos: Pos = field(default=None, compare=False, repr=False)

    def negated(self) -> "Cond":
        return Cond(NEGATED[self.op], self.left, self.right, self.pos)


# -- assertion formulas --------------------------------------------------------

@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" | "exists"
    names: tuple
    body: "Formula"


Formula = Union[Cond, Not, And, Or, Implies, Quant]


# -- statements ----------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ArrayAssign:
    array: str
    index: Expr
    value: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple
    orelse: tuple = ()
    pos: Pos = field(default=None, compare=False, repr=False)


Stmt = Union[Assign, ArrayAssign, If]


@dataclass(frozen=True)
class Loop:
    guard: Cond
    body: tuple

    def __post_init__(self):
        if not self.body:
            raise ValueError("loop body must not be empty")


@dataclass(frozen=True)
class Program:
    scalars: tuple
    arrays: tuple
    funs: tuple  # ((name, arity), ...)
    init: tuple  # ((name, int), ...)
    loop: Loop
    assertion: Formula | None = None

    @property
    def arity(self) -> dict:
        return dict(self.funs)

    @property
    def init_values(self) -> dict:
        return dict(self.init)

    def written_scalars(self) -> list[str]:
        """Scalars assigned somewhere in the loop body, in declaration order."""
        found = {s.target for s in walk_statements(self.loop.body) if isinstance(s, Assign)}
        return [v for v in self.scalars if v in found]

    def written_arrays(self) -> list[str]:
        found = {s.array for s in walk_statements(self.loop.body) if isinstance(s, ArrayAssign)}
        return [a for a in self.arrays if a in found]


def walk_statements(stmts) -> Iterator[Stmt]:
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_statements(s.then)
            yield from walk_statements(s.orelse)


def walk_expr(e) -> Iterator:
    yield e
    if isinstance(e, ArrayRead):
        yield from walk_expr(e.index)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_expr(a)
    elif isinstance(e, BinOp):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Neg):
        yield from walk_expr(e.operand)
    elif isinstance(e, Cond):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)


def statement_exprs(s: Stmt) -> Iterator:
    if isinstance(s, Assign):
        yield s.expr
    elif isinstance(s, ArrayAssign):
        yield s.index
        yield s.value
    else:
        yield s.cond


# -- guarded paths ---------------------------------------------------------------

@dataclass(frozen=True)
class GuardLiteral:
    """Branch condition taken on a path, evaluated after ``at`` assignments."""
    cond: Cond
    taken: bool
    at: int

    def effective(self) -> Cond:
        return self.cond if self.taken else self.cond.negated()


@dataclass(frozen=True)
class GuardedPath:
    path_id: int
    guard_literals: tuple
    assignments: tuple

    @property
    def decisions(self) -> tuple:
        return tuple(g.taken for g in self.guard_literals)

    def written_scalars(self) -> list[str]:
        out = []
        for a in self.assignments:
            if isinstance(a, Assign) and a.target not in out:
                out.append(a.target)
        return out


def extract_paths(loop: Loop) -> list[GuardedPath]:
    """One straight-line path per leaf of the conditional tree, then-branch first."""

    def paths(stmts) -> list[tuple[tuple, tuple]]:
        acc = [((), ())]
        for s in stmts:
            if isinstance(s, If):
                branches = ([(True, p) for p in paths(s.then)]
                            + [(False, p) for p in paths(s.orelse)])
                acc = [
                    (guards + (GuardLiteral(s.cond, taken, len(assigns)),)
                     + tuple(GuardLiteral(g.cond, g.taken, g.at + len(assigns)) for g in bg),
                     assigns + ba)
                    for guards, assigns in acc
                    for taken, (bg, ba) in branches
                ]
            else:
                acc = [(g, a + (s,)) for g, a in acc]
        return acc

    return [GuardedPath(i, g, a) for i, (g, a) in enumerate(paths(loop.body), start=1)]


def count_leaves(stmts) -> int:
    n = 1
    for s in stmts:
        if isinstance(s, If):
            n *= count_leaves(s.then) + count_leaves(s.orelse)
    return n


# -- pretty printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def format_expr(e: Expr, parent: int = 0) -> str:
    if isinstance(e, Num):
        return str(e.value) if e.value >= 0 or parent == 0 else f"({e.value})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrayRead):
        return f"{e.array}[{format_expr(e.index)}]"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, Neg):
        if isinstance(e.operand, Num):
            return f"-({e.operand.value})"  # keep apart from a negative literal
        return f"-{format_expr(e.operand, 3)}"
    prec = _PREC[e.op]
    # operators associate to the left, so a right operand at equal precedence is bracketed
    text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def format_cond(c: Cond) -> str:
    return f"{format_expr(c.left)} {c.op} {format_expr(c.right)}"


def format_formula(f: Formula, parent: int = 0) -> str:
    if isinstance(f, Cond):
        return format_cond(f)
    if isinstance(f, Not):
        return f"!({format_formula(f.body)})"
    if isinstance(f, Quant):
        text = f"{f.kind} {', '.join(f.names)}. {format_formula(f.body)}"
        return f"({text})" if parent else text
    prec, op = {Implies: (1, "==>"), Or: (2, "||"), And: (3, "&&")}[type(f)]
    if isinstance(f, Implies):
        text = f"{format_formula(f.left, prec + 1)} {op} {format_formula(f.right, prec)}"
    else:
        text = f"{format_formula(f.left, prec)} {op} {format_formula(f.right, prec + 1)}"
    return f"({text})" if parent > prec else text


def _format_block(stmts, indent: int) -> list[str]:
    pad = "  " * indent
    lines = []
    for s in stmts:
        if isinstance(s, Assign):
            lines.append(f"{pad}{s.target} := {format_expr(s.expr)};")
        elif isinstance(s, ArrayAssign):
            lines.append(f"{pad}{s.array}[{format_expr(s.index)}] := {format_expr(s.value)};")
        else:
            lines.append(f"{pad}if ({format_cond(s.cond)}) {{")
            lines += _format_block(s.then, indent + 1)
            if s.orelse:
                lines.append(f"{pad}}} else {{")
                lines += _format_block(s.orelse, indent + 1)
            lines.append(f"{pad}}}")
    return lines


def format_program(p: Program) -> str:
    lines = [f"vars {', '.join(p.scalars)};"]
    if p.arrays:
        lines.append(f"arrays {', '.join(p.arrays)};")
    if p.funs:
        lines.append(f"funs {', '.join(f'{n}/{a}' for n, a in p.funs)};")
    if p.init:
        lines.append(" ".join(f"{n} := {v};" for n, v in p.init))
    lines.append(f"while ({format_cond(p.loop.guard)}) {{")
    lines += _format_block(p.loop.body, 1)
    lines.append("}")
    if p.assertion is not None:
        lines.append(f"assert({format_formula(p.assertion)});")
    return "\n".join(lines) + "\n"


def format_path(path: GuardedPath) -> str:
    guards = " && ".join(format_cond(g.effective()) for g in path.guard_literals) or "true"
    body = " ".join(_format_block(path.assignments, 0))
    return f"path {path.path_id} [{guards}]: {body}"


def iter_path_sequences(n_paths: int, length: int) -> Iterator[tuple]:
    """Path-id sequences of exactly ``length`` with no two equal neighbours."""
    for seq in itertools.product(range(1, n_paths + 1), repeat=length):
        if all(a != b for a, b in zip(seq, seq[1:])):
            yield seq
