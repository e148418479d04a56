"""Pretty-printer producing source that re-parses to the same AST."""

from __future__ import annotations

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
    flatten,
)

PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6, "!=": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "+": 8, "-": 8,
    "*": 9, "%": 9,
}
_ATOM_PREC = 100


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return PRECEDENCE[e.op]
    return _ATOM_PREC


def format_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Index):
        return f"{e.array}[{format_expr(e.index)}]"
    if isinstance(e, Ternary):
        return f"({format_expr(e.cond)} ? {format_expr(e.then)} : {format_expr(e.orelse)})"
    if isinstance(e, BinOp):
        p = PRECEDENCE[e.op]
        left = format_expr(e.left)
        right = format_expr(e.right)
        # operators are left-associative: a right operand of equal rank needs parens
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _lines(c: Command, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(c, Seq):
        out: list[str] = []
        for s in flatten(c):
            out.extend(_lines(s, indent))
        return out
    if isinstance(c, Skip):
        return [f"{pad}skip;"]
    if isinstance(c, Assign):
        return [f"{pad}{c.var} = {format_expr(c.expr)};"]
    if isinstance(c, ArrayAssign):
        return [f"{pad}{c.array}[{format_expr(c.index)}] = {format_expr(c.expr)};"]
    if isinstance(c, If):
        out = [f"{pad}if ({format_expr(c.cond)}) {{"]
        out += _lines(c.then, indent + 1)
        if isinstance(c.orelse, Skip):
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}}} else {{")
            out += _lines(c.orelse, indent + 1)
            out.append(f"{pad}}}")
        return out
    if isinstance(c, While):
        out = [f"{pad}while ({format_expr(c.cond)}) {{"]
        out += _lines(c.body, indent + 1)
        out.append(f"{pad}}}")
        return out
    raise TypeError(f"not a command: {c!r}")


def pretty_print(p: Program | Command) -> str:
    body = p.body if isinstance(p, Program) else p
    return "\n".join(_lines(body, 0)) + "\n"
