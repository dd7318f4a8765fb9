"""Recursive-descent parser for ``.loop`` files."""

from __future__ import annotations

import re

from .syntax import (
    RELOPS,
    And,
    ArrayAssign,
    ArrayRead,
    Assign,
    BinOp,
    Call,
    Cond,
    If,
    Implies,
    Loop,
    Neg,
    Not,
    Num,
    Or,
    Program,
    Quant,
    Var,
)


class LoopSpecError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class LoopSyntaxError(LoopSpecError):
    def __init__(self, message, line=None, col=None, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected {' or '.join(repr(e) for e in self.expected)})"
        super().__init__(message, line, col)


class UndeclaredIdentifier(LoopSpecError):
    pass


class ArityMismatch(LoopSpecError):
    pass


KEYWORDS = {"vars", "arrays", "funs", "while", "if", "else", "assert", "forall", "exists"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|==>|<=|>=|==|!=|&&|\|\||[-+*<>;,(){}\[\]/.!])
""", re.VERBOSE)


def tokenize(text: str) -> list[tuple[str, str, int, int]]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LoopSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "op"):
            toks.append((kind, m.group(), line, col))
        elif kind == "id":
            toks.append(("kw" if m.group() in KEYWORDS else "id", m.group(), line, col))
        pos = m.end()
    toks.append(("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.scalars: list[str] = []
        self.arrays: list[str] = []
        self.funs: dict[str, int] = {}
        self.bound: list[str] = []

    # -- token helpers

    def peek(self, offset=0):
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def at(self, value: str) -> bool:
        return self.peek()[1] == value and self.peek()[0] in ("op", "kw")

    def error(self, message, expected=()):
        _, val, line, col = self.peek()
        shown = val or "end of input"
        raise LoopSyntaxError(f"{message}, found {shown!r}", line, col, expected)

    def expect(self, value: str):
        if not self.at(value):
            self.error("unexpected token", (value,))
        tok = self.peek()
        self.i += 1
        return tok

    def ident(self):
        kind, val, line, col = self.peek()
        if kind != "id":
            self.error("expected an identifier", ("identifier",))
        self.i += 1
        return val, (line, col)

    def pos(self):
        return self.peek()[2:4]

    # -- declarations

    def declare(self, name, where):
        if name in self.scalars or name in self.arrays or name in self.funs:
            raise LoopSpecError(f"identifier {name!r} declared twice", *where)

    def program(self) -> Program:
        self.expect("vars")
        for name, where in self.idlist():
            self.declare(name, where)
            self.scalars.append(name)
        self.expect(";")
        if self.at("arrays"):
            self.i += 1
            for name, where in self.idlist():
                self.declare(name, where)
                self.arrays.append(name)
            self.expect(";")
        if self.at("funs"):
            self.i += 1
            while True:
                name, where = self.ident()
                self.declare(name, where)
                self.expect("/")
                kind, val, line, col = self.peek()
                if kind != "num":
                    self.error("expected an arity", ("natural number",))
                self.i += 1
                self.funs[name] = int(val)
                if not self.at(","):
                    break
                self.i += 1
            self.expect(";")
        init = []
        seen = set()
        while self.peek()[0] == "id":
            name, where = self.ident()
            if name not in self.scalars:
                raise UndeclaredIdentifier(f"undeclared scalar {name!r} in init", *where)
            if name in seen:
                raise LoopSpecError(f"scalar {name!r} initialised twice", *where)
            seen.add(name)
            self.expect(":=")
            sign = 1
            if self.at("-"):
                self.i += 1
                sign = -1
            kind, val, line, col = self.peek()
            if kind != "num":
                self.error("init values must be integer constants", ("integer",))
            self.i += 1
            self.expect(";")
            init.append((name, sign * int(val)))
        self.expect("while")
        self.expect("(")
        guard = self.cond()
        self.expect(")")
        body = self.block()
        if not body:
            self.error("loop body must not be empty")
        assertion = None
        if self.at("assert"):
            self.i += 1
            self.expect("(")
            assertion = self.formula()
            self.expect(")")
            self.expect(";")
        if self.peek()[0] != "eof":
            self.error("trailing input after program", ("end of input",))
        return Program(tuple(self.scalars), tuple(self.arrays), tuple(self.funs.items()),
                       tuple(init), Loop(guard, body), assertion)

    def idlist(self):
        out = [self.ident()]
        while self.at(","):
            self.i += 1
            out.append(self.ident())
        return out

    # -- statements

    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek()[0] == "eof":
                self.error("unterminated block", ("}",))
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self):
        where = self.pos()
        if self.at("if"):
            self.i += 1
            self.expect("(")
            cond = self.cond()
            self.expect(")")
            then = self.block()
            orelse = ()
            if self.at("else"):
                self.i += 1
                orelse = self.block()
            return If(cond, then, orelse, where)
        name, where = self.ident()
        if self.at("["):
            if name not in self.arrays:
                raise UndeclaredIdentifier(f"undeclared array {name!r}", *where)
            self.i += 1
            index = self.expr()
            self.expect("]")
            self.expect(":=")
            value = self.expr()
            self.expect(";")
            return ArrayAssign(name, index, value, where)
        if not self.at(":="):
            self.error("expected an assignment", (":=", "["))
        if name not in self.scalars:
            raise UndeclaredIdentifier(f"undeclared scalar {name!r}", *where)
        self.i += 1
        value = self.expr()
        self.expect(";")
        return Assign(name, value, where)

    # -- expressions

    def cond(self) -> Cond:
        where = self.pos()
        left = self.expr()
        op = self.peek()[1]
        if op not in RELOPS or self.peek()[0] != "op":
            self.error("expected a comparison", RELOPS)
        self.i += 1
        return Cond(op, left, self.expr(), where)

    def expr(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            op, where = self.peek()[1], self.pos()
            self.i += 1
            left = BinOp(op, left, self.term(), where)
        return left

    def term(self):
        left = self.unary()
        while self.at("*"):
            where = self.pos()
            self.i += 1
            left = BinOp("*", left, self.unary(), where)
        return left

    def unary(self):
        if self.at("-"):
            where = self.pos()
            self.i += 1
            if self.peek()[0] == "num":
                val = int(self.peek()[1])
                self.i += 1
                return Num(-val, where)
            return Neg(self.unary(), where)
        return self.primary()

    def primary(self):
        kind, val, line, col = self.peek()
        where = (line, col)
        if kind == "num":
            self.i += 1
            return Num(int(val), where)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if kind != "id":
            self.error("expected an expression", ("identifier", "integer", "("))
        self.i += 1
        if self.at("["):
            if val not in self.arrays:
                raise UndeclaredIdentifier(f"undeclared array {val!r}", *where)
            self.i += 1
            index = self.expr()
            self.expect("]")
            return ArrayRead(val, index, where)
        if self.at("("):
            if val not in self.funs:
                raise UndeclaredIdentifier(f"undeclared function {val!r}", *where)
            self.i += 1
            args = [self.expr()]
            while self.at(","):
                self.i += 1
                args.append(self.expr())
            self.expect(")")
            if len(args) != self.funs[val]:
                raise ArityMismatch(
                    f"{val} takes {self.funs[val]} argument(s), got {len(args)}", *where)
            return Call(val, tuple(args), where)
        if val not in self.scalars and val not in self.bound:
            raise UndeclaredIdentifier(f"undeclared identifier {val!r}", *where)
        return Var(val, where)

    # -- assertion formulas

    def formula(self):
        left = self.disjunction()
        if self.at("==>"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("||"):
            self.i += 1
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.fatom()
        while self.at("&&"):
            self.i += 1
            left = And(left, self.fatom())
        return left

    def fatom(self):
        if self.at("!"):
            self.i += 1
            return Not(self.fatom())
        if self.at("forall") or self.at("exists"):
            kind = self.peek()[1]
            self.i += 1
            names = [n for n, _ in self.idlist()]
            self.expect(".")
            self.bound.extend(names)
            try:
                body = self.formula()
            finally:
                del self.bound[len(self.bound) - len(names):]
            return Quant(kind, tuple(names), body)
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                inner = self.formula()
                self.expect(")")
                nxt = self.peek()
                if not (nxt[0] == "op" and nxt[1] in RELOPS + ("+", "-", "*")):
                    return inner
            except LoopSyntaxError:
                pass
            self.i = save
        return self.cond()


def parse_program(text: str) -> Program:
    """Parse a loop program; raises :class:`LoopSpecError` subclasses on bad input."""
    return _Parser(text).program()


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())
