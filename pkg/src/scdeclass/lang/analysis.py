"""Static queries over programs: variable sets, input variables, nesting."""

from __future__ import annotations

from .ast import (
    ArrayAssign,
    Assign,
    Command,
    Expr,
    If,
    Index,
    Program,
    Seq,
    Ternary,
    BinOp,
    While,
    expr_vars,
)


def _body(p: Program | Command) -> Command:
    return p.body if isinstance(p, Program) else p


def read_vars(p: Program | Command) -> set[str]:
    """Variables in read position.

    An array assignment ``a[y] = e`` reads ``a`` as well as ``y`` and ``e``:
    it is a functional update of the whole array value.
    """
    out: set[str] = set()

    def walk(c: Command) -> None:
        if isinstance(c, Assign):
            out.update(expr_vars(c.expr))
        elif isinstance(c, ArrayAssign):
            out.add(c.array)
            out.update(expr_vars(c.index))
            out.update(expr_vars(c.expr))
        elif isinstance(c, Seq):
            walk(c.first)
            walk(c.second)
        elif isinstance(c, If):
            out.update(expr_vars(c.cond))
            walk(c.then)
            walk(c.orelse)
        elif isinstance(c, While):
            out.update(expr_vars(c.cond))
            walk(c.body)

    walk(_body(p))
    return out


def written_vars(p: Program | Command) -> set[str]:
    out: set[str] = set()

    def walk(c: Command) -> None:
        if isinstance(c, Assign):
            out.add(c.var)
        elif isinstance(c, ArrayAssign):
            out.add(c.array)
        elif isinstance(c, Seq):
            walk(c.first)
            walk(c.second)
        elif isinstance(c, If):
            walk(c.then)
            walk(c.orelse)
        elif isinstance(c, While):
            walk(c.body)

    walk(_body(p))
    return out


def all_vars(p: Program | Command) -> set[str]:
    return read_vars(p) | written_vars(p)


def input_vars(p: Program | Command) -> set[str]:
    """Variables that may be read before they are definitely written.

    These must be bound in any initial state. Conditionals intersect the
    definitely-written sets of both branches; loop bodies may not run.
    """
    needed: set[str] = set()

    def reads(e: Expr, defined: frozenset[str]) -> None:
        needed.update(v for v in expr_vars(e) if v not in defined)

    def walk(c: Command, defined: frozenset[str]) -> frozenset[str]:
        if isinstance(c, Assign):
            reads(c.expr, defined)
            return defined | {c.var}
        if isinstance(c, ArrayAssign):
            if c.array not in defined:
                needed.add(c.array)
            reads(c.index, defined)
            reads(c.expr, defined)
            return defined | {c.array}
        if isinstance(c, Seq):
            return walk(c.second, walk(c.first, defined))
        if isinstance(c, If):
            reads(c.cond, defined)
            return walk(c.then, defined) & walk(c.orelse, defined)
        if isinstance(c, While):
            reads(c.cond, defined)
            walk(c.body, defined)
            return defined
        return defined

    walk(_body(p), frozenset())
    return needed


def array_vars(p: Program | Command) -> set[str]:
    """Variables syntactically used as arrays (indexed or index-assigned)."""
    out: set[str] = set()

    def expr(e: Expr) -> None:
        if isinstance(e, Index):
            out.add(e.array)
            expr(e.index)
        elif isinstance(e, BinOp):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, Ternary):
            expr(e.cond)
            expr(e.then)
            expr(e.orelse)

    def walk(c: Command) -> None:
        if isinstance(c, Assign):
            expr(c.expr)
        elif isinstance(c, ArrayAssign):
            out.add(c.array)
            expr(c.expr)
        elif isinstance(c, Seq):
            walk(c.first)
            walk(c.second)
        elif isinstance(c, If):
            expr(c.cond)
            walk(c.then)
            walk(c.orelse)
        elif isinstance(c, While):
            expr(c.cond)
            walk(c.body)

    walk(_body(p))
    return out


def has_branching(c: Command) -> bool:
    """True if ``c`` contains a conditional or loop statement (ternaries don't count)."""
    if isinstance(c, (If, While)):
        return True
    if isinstance(c, Seq):
        return has_branching(c.first) or has_branching(c.second)
    return False


def is_unnested(p: Program | Command) -> bool:
    """True iff no conditional or loop occurs inside a loop body."""

    def walk(c: Command) -> bool:
        if isinstance(c, While):
            return not has_branching(c.body)
        if isinstance(c, Seq):
            return walk(c.first) and walk(c.second)
        if isinstance(c, If):
            return walk(c.then) and walk(c.orelse)
        return True

    return walk(_body(p))


def is_straight_line(p: Program | Command) -> bool:
    return not has_branching(_body(p))


__all__ = [
    "read_vars",
    "written_vars",
    "all_vars",
    "input_vars",
    "array_vars",
    "has_branching",
    "is_unnested",
    "is_straight_line",
]
