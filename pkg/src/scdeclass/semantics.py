"""Instrumented small-step semantics.

Each transition carries a label: ``None`` for a silent step, or the branch
bit ``0``/``1`` recorded by conditionals and loop guards. The transcript of
a run is the sequence of non-silent labels.

Integers are unbounded. Arrays are tuples, updated functionally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .lang.ast import (
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
)

Value = Union[int, tuple]
State = dict
Transcript = tuple

DEFAULT_BUDGET = 1_000_000


class Fault(Exception):
    """A runtime error. Distinct from any security verdict."""

    kind = "fault"


class UnboundVariable(Fault):
    kind = "unbound"


class IndexOutOfBounds(Fault):
    kind = "index"


class NotAnArray(Fault):
    kind = "not-array"


class NotAnInteger(Fault):
    kind = "not-integer"


class ModByZero(Fault):
    kind = "mod-zero"


class NegativeBitwise(Fault):
    kind = "negative-bitwise"


class BudgetExhausted(Fault):
    """The step budget ran out; the program may not terminate."""

    kind = "budget"


@dataclass(frozen=True)
class RunResult:
    state: dict
    transcript: Transcript
    steps: int


def _lookup(s: Mapping[str, Value], name: str) -> Value:
    try:
        return s[name]
    except KeyError:
        raise UnboundVariable(f"variable {name!r} is unbound") from None


def _int(v: Value, what: str) -> int:
    if not isinstance(v, int):
        raise NotAnInteger(f"{what} is an array, expected an integer")
    return v


def _array(s: Mapping[str, Value], name: str) -> tuple:
    v = _lookup(s, name)
    if not isinstance(v, tuple):
        raise NotAnArray(f"{name!r} is not an array")
    return v


def _bounds(arr: tuple, i: int, name: str) -> None:
    if i < 0 or i >= len(arr):
        raise IndexOutOfBounds(f"index {i} out of bounds for {name!r} of length {len(arr)}")


def apply_op(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "%":
        if b == 0:
            raise ModByZero("mod by zero")
        return a % b
    if op in ("^", "&", "|"):
        if a < 0 or b < 0:
            raise NegativeBitwise(f"bitwise {op!r} on a negative operand")
        return a ^ b if op == "^" else a & b if op == "&" else a | b
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    # both operands are always evaluated: no hidden branch
    if op == "&&":
        return int(a != 0 and b != 0)
    if op == "||":
        return int(a != 0 or b != 0)
    raise ValueError(f"unknown operator {op!r}")


def eval_expr(e: Expr, s: Mapping[str, Value]) -> Value:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return _lookup(s, e.name)
    if isinstance(e, Index):
        arr = _array(s, e.array)
        i = _int(eval_expr(e.index, s), "array index")
        _bounds(arr, i, e.array)
        return arr[i]
    if isinstance(e, BinOp):
        a = _int(eval_expr(e.left, s), f"left operand of {e.op!r}")
        b = _int(eval_expr(e.right, s), f"right operand of {e.op!r}")
        return apply_op(e.op, a, b)
    if isinstance(e, Ternary):
        c = _int(eval_expr(e.cond, s), "ternary condition")
        return eval_expr(e.then if c != 0 else e.orelse, s)
    raise TypeError(f"not an expression: {e!r}")


def step(c: Command, s: State) -> tuple[int | None, Command]:
    """One transition from configuration ``(c, s)``.

    Updates ``s`` in place and returns ``(label, next_command)``. ``c`` must
    not be ``Skip``.
    """
    if isinstance(c, Assign):
        s[c.var] = eval_expr(c.expr, s)
        return None, Skip()
    if isinstance(c, ArrayAssign):
        v = _int(eval_expr(c.expr, s), "array element")
        arr = _array(s, c.array)
        i = _int(eval_expr(c.index, s), "array index")
        _bounds(arr, i, c.array)
        s[c.array] = arr[:i] + (v,) + arr[i + 1:]
        return None, Skip()
    if isinstance(c, Seq):
        if isinstance(c.first, Skip):
            return None, c.second
        label, first = step(c.first, s)
        return label, Seq(first, c.second)
    if isinstance(c, If):
        v = _int(eval_expr(c.cond, s), "guard")
        return (1, c.then) if v != 0 else (0, c.orelse)
    if isinstance(c, While):
        v = _int(eval_expr(c.cond, s), "guard")
        return (1, Seq(c.body, c)) if v != 0 else (0, Skip())
    if isinstance(c, Skip):
        raise ValueError("skip is a terminal configuration")
    raise TypeError(f"not a command: {c!r}")


def run(p: Program | Command, s0: Mapping[str, Value], budget: int = DEFAULT_BUDGET) -> RunResult:
    """Run to completion, returning the final state and the transcript.

    Raises :class:`BudgetExhausted` if more than ``budget`` transitions are
    needed, and any other :class:`Fault` raised during evaluation.
    """
    c = p.body if isinstance(p, Program) else p
    s = dict(s0)
    transcript: list[int] = []
    steps = 0
    while not isinstance(c, Skip):
        if steps >= budget:
            raise BudgetExhausted(f"step budget of {budget} exhausted")
        label, c = step(c, s)
        steps += 1
        if label is not None:
            transcript.append(label)
    return RunResult(s, tuple(transcript), steps)


def run_store(p: Program | Command, s0: Mapping[str, Value], budget: int = DEFAULT_BUDGET) -> dict:
    return run(p, s0, budget).state


def format_transcript(t: Transcript) -> str:
    return "".join(str(b) for b in t)


def format_value(v: Value) -> str:
    if isinstance(v, tuple):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(v)


def freeze_state(s: Mapping[str, Value]) -> tuple:
    """Hashable canonical form of a state."""
    return tuple(sorted(s.items()))
