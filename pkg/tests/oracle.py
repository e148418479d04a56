"""Independent big-step reference interpreter.

Written directly from the rules, without sharing code with the small-step
machine: it recurses over commands, collects branch bits into a list and
signals errors as ``OracleFault(kind)`` with the same kind names.
"""

from __future__ import annotations

from scdeclass.lang.ast import ArrayAssign, Assign, BinOp, If, Index, Lit, Seq, Skip, Ternary, Var, While


class OracleFault(Exception):
    def __init__(self, kind: str):
        super().__init__(kind)
        self.kind = kind


class _Fuel:
    def __init__(self, n: int):
        self.n = n

    def burn(self, k: int = 1) -> None:
        self.n -= k
        if self.n < 0:
            raise OracleFault("budget")


def _num(v):
    if isinstance(v, tuple):
        raise OracleFault("not-integer")
    return v


def _arr(env, name):
    if name not in env:
        raise OracleFault("unbound")
    v = env[name]
    if not isinstance(v, tuple):
        raise OracleFault("not-array")
    return v


def _bin(op, a, b):
    table = {
        "+": lambda: a + b,
        "-": lambda: a - b,
        "*": lambda: a * b,
        "==": lambda: 1 if a == b else 0,
        "!=": lambda: 1 if a != b else 0,
        "<": lambda: 1 if a < b else 0,
        "<=": lambda: 1 if a <= b else 0,
        ">": lambda: 1 if a > b else 0,
        ">=": lambda: 1 if a >= b else 0,
        "&&": lambda: 1 if (a and b) else 0,
        "||": lambda: 1 if (a or b) else 0,
    }
    if op in table:
        return table[op]()
    if op == "%":
        if b == 0:
            raise OracleFault("mod-zero")
        return a - b * (a // b)
    if a < 0 or b < 0:
        raise OracleFault("negative-bitwise")
    return {"^": a ^ b, "&": a & b, "|": a | b}[op]


def ev(e, env):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise OracleFault("unbound")
        return env[e.name]
    if isinstance(e, Index):
        arr = _arr(env, e.array)
        i = _num(ev(e.index, env))
        if not 0 <= i < len(arr):
            raise OracleFault("index")
        return arr[i]
    if isinstance(e, BinOp):
        a = _num(ev(e.left, env))
        b = _num(ev(e.right, env))
        return _bin(e.op, a, b)
    if isinstance(e, Ternary):
        return ev(e.then, env) if _num(ev(e.cond, env)) else ev(e.orelse, env)
    raise TypeError(e)


def ex(c, env, bits, fuel):
    """Execute ``c``; returns nothing, mutates ``env`` and ``bits``."""
    if isinstance(c, Skip):
        return
    if isinstance(c, Assign):
        fuel.burn()
        env[c.var] = ev(c.expr, env)
    elif isinstance(c, ArrayAssign):
        fuel.burn()
        v = _num(ev(c.expr, env))
        arr = _arr(env, c.array)
        i = _num(ev(c.index, env))
        if not 0 <= i < len(arr):
            raise OracleFault("index")
        env[c.array] = tuple(v if k == i else x for k, x in enumerate(arr))
    elif isinstance(c, Seq):
        ex(c.first, env, bits, fuel)
        # the machine spends one silent step discarding the finished first half
        fuel.burn()
        ex(c.second, env, bits, fuel)
    elif isinstance(c, If):
        fuel.burn()
        if _num(ev(c.cond, env)):
            bits.append(1)
            ex(c.then, env, bits, fuel)
        else:
            bits.append(0)
            ex(c.orelse, env, bits, fuel)
    elif isinstance(c, While):
        while True:
            fuel.burn()
            if not _num(ev(c.cond, env)):
                bits.append(0)
                return
            bits.append(1)
            ex(c.body, env, bits, fuel)
            fuel.burn()
    else:
        raise TypeError(c)


def big_step(program, state, budget: int = 1_000_000):
    """Return ``(final_state, transcript, steps)`` or raise :class:`OracleFault`."""
    env = dict(state)
    bits: list[int] = []
    fuel = _Fuel(budget)
    ex(program.body if hasattr(program, "body") else program, env, bits, fuel)
    return env, tuple(bits), budget - fuel.n
