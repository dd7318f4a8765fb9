"""The loop language: syntax tree, parser, guarded paths and a concrete interpreter."""

from .interpreter import (
    IndexOutOfBounds,
    Inputs,
    LoopRuntimeError,
    Snapshot,
    Trace,
    UFInterpretation,
    interpret,
    random_inputs,
    random_traces,
    replay_path,
)
from .parser import (
    ArityMismatch,
    LoopSpecError,
    LoopSyntaxError,
    UndeclaredIdentifier,
    parse_file,
    parse_program,
    tokenize,
)
from .syntax import (
    And,
    ArrayAssign,
    ArrayRead,
    Assign,
    BinOp,
    Call,
    Cond,
    GuardedPath,
    GuardLiteral,
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
    count_leaves,
    extract_paths,
    format_cond,
    format_expr,
    format_formula,
    format_path,
    format_program,
    iter_path_sequences,
)
