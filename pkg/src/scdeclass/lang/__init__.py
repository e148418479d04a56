"""The while-language: syntax, parsing, printing and static queries."""

from .analysis import (
    all_vars,
    array_vars,
    has_branching,
    input_vars,
    is_straight_line,
    is_unnested,
    read_vars,
    written_vars,
)
from .ast import (
    ArrayAssign,
    Assign,
    BinOp,
    Command,
    Expr,
    If,
    Index,
    Lit,
    Program,
    Seq,
    Skip,
    Ternary,
    Var,
    While,
    equal_modulo_seq,
    expr_vars,
    flatten,
    normalize,
    seq,
)
from .parser import ParseError, parse_expr, parse_program
from .policy import Policy, PolicyError, make_policy, validate_policy
from .printer import format_expr, pretty_print

__all__ = [
    "ArrayAssign", "Assign", "BinOp", "Command", "Expr", "If", "Index", "Lit",
    "Program", "Seq", "Skip", "Ternary", "Var", "While",
    "equal_modulo_seq", "expr_vars", "flatten", "normalize", "seq",
    "ParseError", "parse_expr", "parse_program",
    "Policy", "PolicyError", "make_policy", "validate_policy",
    "format_expr", "pretty_print",
    "all_vars", "array_vars", "has_branching", "input_vars", "is_straight_line",
    "is_unnested", "read_vars", "written_vars",
]
