"""Abstract syntax of the while-language with arrays and register ternaries.

All nodes are frozen dataclasses, so ASTs are hashable and can be shared
freely between threads and worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

ARITH_OPS = ("+", "-", "*", "%", "^", "&", "|")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + COMPARE_OPS + BOOL_OPS


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Index:
    """Array read ``array[index]``."""

    array: str
    index: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self) -> None:
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Ternary:
    """``cond ? then : orelse`` over atoms only (variables, literals, array reads)."""

    cond: "Atom"
    then: "Atom"
    orelse: "Atom"


Atom = Union[Var, Lit, Index]
Expr = Union[Var, Lit, Index, BinOp, Ternary]


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class ArrayAssign:
    """``array[index] = expr``; the index is a variable or a literal."""

    array: str
    index: Union[Var, Lit]
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Command"
    orelse: "Command"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Command"


Command = Union[Skip, Assign, ArrayAssign, Seq, If, While]


@dataclass(frozen=True)
class Program:
    """A top-level command plus source metadata (ignored by equality)."""

    body: Command
    name: str | None = field(default=None, compare=False)
    var_order: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.var_order:
            object.__setattr__(self, "var_order", tuple(_first_occurrence(self.body)))


def is_atom(e: Expr) -> bool:
    return isinstance(e, (Var, Lit, Index))


def seq(*cmds: Command) -> Command:
    """Right-nested sequence of ``cmds``; the empty sequence is ``Skip()``."""
    if not cmds:
        return Skip()
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = Seq(c, out)
    return out


def flatten(c: Command) -> list[Command]:
    """The statements of ``c`` with sequence nesting removed."""
    if isinstance(c, Seq):
        return flatten(c.first) + flatten(c.second)
    return [c]


def normalize(c: Command) -> Command:
    """Canonical right-nested form, so trees equal up to regrouping compare equal."""
    if isinstance(c, Seq):
        return seq(*[normalize(s) for s in flatten(c)])
    if isinstance(c, If):
        return If(c.cond, normalize(c.then), normalize(c.orelse))
    if isinstance(c, While):
        return While(c.cond, normalize(c.body))
    return c


def equal_modulo_seq(a: Program | Command, b: Program | Command) -> bool:
    ca = a.body if isinstance(a, Program) else a
    cb = b.body if isinstance(b, Program) else b
    return normalize(ca) == normalize(cb)


def expr_vars(e: Expr) -> Iterator[str]:
    """Variable names read by ``e``, in left-to-right order (with repeats)."""
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, Index):
        yield e.array
        yield from expr_vars(e.index)
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
    elif isinstance(e, Ternary):
        yield from expr_vars(e.cond)
        yield from expr_vars(e.then)
        yield from expr_vars(e.orelse)


def _first_occurrence(c: Command) -> list[str]:
    seen: dict[str, None] = {}

    def walk(c: Command) -> None:
        if isinstance(c, Assign):
            for v in expr_vars(c.expr):
                seen.setdefault(v)
            seen.setdefault(c.var)
        elif isinstance(c, ArrayAssign):
            seen.setdefault(c.array)
            for v in expr_vars(c.index):
                seen.setdefault(v)
            for v in expr_vars(c.expr):
                seen.setdefault(v)
        elif isinstance(c, Seq):
            walk(c.first)
            walk(c.second)
        elif isinstance(c, If):
            for v in expr_vars(c.cond):
                seen.setdefault(v)
            walk(c.then)
            walk(c.orelse)
        elif isinstance(c, While):
            for v in expr_vars(c.cond):
                seen.setdefault(v)
            walk(c.body)

    walk(c)
    return list(seen)
