"""Program transformations: side-channel reification, renaming, self-composition,
and the syntactic PC-security check.

Generated variables use the reserved ``__`` marker (``__r<k>`` for
instrumentation, ``<name>__2`` for the second self-composition copy), which
the parser refuses in user programs, so they are always fresh.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import count
from typing import Callable, Iterable, Mapping

from .lang.analysis import all_vars, has_branching, input_vars, is_unnested
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
    expr_vars,
    flatten,
    seq,
)
from .lang.policy import Policy, validate_policy
from .semantics import Value

SECOND_COPY_SUFFIX = "__2"

GENERAL = "general-list"
UNNESTED = "unnested-counters"
HYBRID = "loop-accumulator"


class ReificationError(ValueError):
    pass


def _body(p: Program | Command) -> Command:
    return p.body if isinstance(p, Program) else p


# -- renaming ---------------------------------------------------------------


def rename_expr(e: Expr, f: Callable[[str], str]) -> Expr:
    if isinstance(e, Var):
        return Var(f(e.name))
    if isinstance(e, Lit):
        return e
    if isinstance(e, Index):
        return Index(f(e.array), rename_expr(e.index, f))
    if isinstance(e, BinOp):
        return BinOp(e.op, rename_expr(e.left, f), rename_expr(e.right, f))
    if isinstance(e, Ternary):
        return Ternary(rename_expr(e.cond, f), rename_expr(e.then, f), rename_expr(e.orelse, f))
    raise TypeError(f"not an expression: {e!r}")


def rename_command(c: Command, f: Callable[[str], str]) -> Command:
    if isinstance(c, Skip):
        return c
    if isinstance(c, Assign):
        return Assign(f(c.var), rename_expr(c.expr, f))
    if isinstance(c, ArrayAssign):
        return ArrayAssign(f(c.array), rename_expr(c.index, f), rename_expr(c.expr, f))
    if isinstance(c, Seq):
        return Seq(rename_command(c.first, f), rename_command(c.second, f))
    if isinstance(c, If):
        return If(rename_expr(c.cond, f), rename_command(c.then, f), rename_command(c.orelse, f))
    if isinstance(c, While):
        return While(rename_expr(c.cond, f), rename_command(c.body, f))
    raise TypeError(f"not a command: {c!r}")


def rename(p: Program, mapping: Mapping[str, str]) -> Program:
    """Consistently rename the variables of ``p``.

    Names absent from ``mapping`` are kept. The induced map on the variables
    of ``p`` must be injective.
    """
    names = all_vars(p)
    image = [mapping.get(v, v) for v in names]
    if len(set(image)) != len(image):
        raise ValueError("renaming is not injective on the program's variables")
    f = lambda v: mapping.get(v, v)  # noqa: E731
    return Program(
        rename_command(p.body, f),
        name=p.name,
        var_order=tuple(f(v) for v in p.var_order),
    )


def suffix_renaming(names: Iterable[str], suffix: str = SECOND_COPY_SUFFIX) -> dict[str, str]:
    return {v: v + suffix for v in names}


def invert(mapping: Mapping[str, str]) -> dict[str, str]:
    inv = {v: k for k, v in mapping.items()}
    if len(inv) != len(mapping):
        raise ValueError("mapping is not a bijection")
    return inv


def rename_state(s: Mapping[str, Value], mapping: Mapping[str, str]) -> dict[str, Value]:
    return {mapping.get(k, k): v for k, v in s.items()}


# -- reification --------------------------------------------------------------


@dataclass(frozen=True)
class ReifiedProgram:
    program: Program
    added: tuple[str, ...]
    flavor: str
    # (accumulator, length) pairs of the list encoding, in creation order
    accumulators: tuple[tuple[str, str], ...] = ()

    def initial_state(self, s: Mapping[str, Value]) -> dict[str, Value]:
        """``s`` extended with zeroed instrumentation variables."""
        out = dict(s)
        for v in self.added:
            out.setdefault(v, 0)
        return out


class _Fresh:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.counter = count()
        self.made: list[str] = []

    def __call__(self) -> str:
        while True:
            name = f"__r{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                self.made.append(name)
                return name


def _assign(v: str, e: Expr) -> Assign:
    return Assign(v, e)


def _push(acc: str, length: str, bit: int) -> Command:
    shifted = BinOp("*", Lit(2), Var(acc))
    value = BinOp("+", shifted, Lit(1)) if bit else shifted
    return seq(_assign(acc, value), _assign(length, BinOp("+", Var(length), Lit(1))))


def _then(prefix: Command, c: Command) -> Command:
    return prefix if isinstance(c, Skip) else seq(prefix, c)


def _reify_list(c: Command, acc: str, length: str) -> Command:
    if isinstance(c, Seq):
        return Seq(_reify_list(c.first, acc, length), _reify_list(c.second, acc, length))
    if isinstance(c, If):
        return If(
            c.cond,
            _then(_push(acc, length, 1), _reify_list(c.then, acc, length)),
            _then(_push(acc, length, 0), _reify_list(c.orelse, acc, length)),
        )
    if isinstance(c, While):
        return seq(
            While(c.cond, _then(_push(acc, length, 1), _reify_list(c.body, acc, length))),
            _push(acc, length, 0),
        )
    return c


def reify_general(p: Program) -> ReifiedProgram:
    """Record the whole transcript in an accumulator/length pair.

    The bit list ``t ++ [b]`` is encoded as ``t = 2*t + b; tn = tn + 1``;
    the pair determines the list exactly (see :func:`decode_transcript`).
    """
    fresh = _Fresh(all_vars(p))
    acc, length = fresh(), fresh()
    body = seq(_assign(acc, Lit(0)), _assign(length, Lit(0)), _reify_list(p.body, acc, length))
    return ReifiedProgram(Program(body, name=p.name), (acc, length), GENERAL, ((acc, length),))


def decode_transcript(acc: int, length: int) -> tuple[int, ...]:
    if length < 0 or acc < 0 or acc >> length:
        raise ValueError(f"({acc}, {length}) is not a valid transcript encoding")
    return tuple((acc >> (length - 1 - k)) & 1 for k in range(length))


def _reify_counters(c: Command, fresh: _Fresh, accs: list[tuple[str, str]], hybrid: bool) -> Command:
    if isinstance(c, Seq):
        return Seq(
            _reify_counters(c.first, fresh, accs, hybrid),
            _reify_counters(c.second, fresh, accs, hybrid),
        )
    if isinstance(c, If):
        v = fresh()
        return If(
            c.cond,
            _then(_assign(v, Lit(1)), _reify_counters(c.then, fresh, accs, hybrid)),
            _then(_assign(v, Lit(0)), _reify_counters(c.orelse, fresh, accs, hybrid)),
        )
    if isinstance(c, While):
        if has_branching(c.body):
            if not hybrid:
                raise ReificationError("loop body contains branching; use reify_general")
            acc, length = fresh(), fresh()
            accs.append((acc, length))
            return seq(_assign(acc, Lit(0)), _assign(length, Lit(0)), _reify_list(c, acc, length))
        v = fresh()
        return seq(
            _assign(v, Lit(0)),
            While(c.cond, _then(_assign(v, BinOp("+", Var(v), Lit(1))), c.body)),
        )
    return c


def reify_unnested(p: Program) -> ReifiedProgram:
    """One fresh low variable per loop (iteration counter) and conditional (branch flag).

    Only adequate for unnested programs; raises :class:`ReificationError`
    otherwise.
    """
    if not is_unnested(p):
        raise ReificationError("program is nested (branching inside a loop); use reify_general")
    fresh = _Fresh(all_vars(p))
    body = _reify_counters(p.body, fresh, [], hybrid=False)
    return ReifiedProgram(Program(body, name=p.name), tuple(fresh.made), UNNESTED)


def reify(p: Program) -> ReifiedProgram:
    """Cheapest adequate reification.

    Unnested programs get counters and flags. Otherwise loops that contain
    branching get their own accumulator encoding and everything else still
    gets counters and flags.
    """
    if is_unnested(p):
        return reify_unnested(p)
    fresh = _Fresh(all_vars(p))
    accs: list[tuple[str, str]] = []
    body = _reify_counters(p.body, fresh, accs, hybrid=True)
    return ReifiedProgram(Program(body, name=p.name), tuple(fresh.made), HYBRID, tuple(accs))


# -- self-composition --------------------------------------------------------


@dataclass(frozen=True)
class SelfComposition:
    """A self-composed program with its Hoare-style contract as data.

    ``pre`` pairs must agree initially. At the end, if every ``guard`` pair
    agrees then every ``post`` pair must agree.
    """

    program: Program
    renaming: dict[str, str] = field(compare=False)
    pre: tuple[tuple[str, str], ...]
    guard: tuple[tuple[str, str], ...]
    post: tuple[tuple[str, str], ...]
    shared: frozenset[str] = frozenset()

    def merge_states(self, s1: Mapping[str, Value], s2: Mapping[str, Value]) -> dict[str, Value]:
        """``s1`` plus the renamed copy of ``s2``; shared variables come from ``s1``."""
        out = dict(s1)
        for k, v in s2.items():
            if k in self.shared:
                if k in s1 and s1[k] != v:
                    raise ValueError(f"shared variable {k!r} differs between the two states")
                out.setdefault(k, v)
            else:
                out[self.renaming.get(k, k)] = v
        return out

    def pre_holds(self, s: Mapping[str, Value]) -> bool:
        return all(s[a] == s[b] for a, b in self.pre if a in s and b in s)

    def guard_holds(self, s: Mapping[str, Value]) -> bool:
        return all(s.get(a) == s.get(b) for a, b in self.guard)

    def post_holds(self, s: Mapping[str, Value]) -> bool:
        return all(s.get(a) == s.get(b) for a, b in self.post)

    def holds(self, s: Mapping[str, Value]) -> bool:
        return not self.guard_holds(s) or self.post_holds(s)


def _shared_prefix(c: Command, shared: set[str], never_written_elsewhere: Callable[[str], bool]) -> int:
    """Length of the leading run of statements computable from shared values alone."""
    n = 0
    for stmt in flatten(c):
        if (
            isinstance(stmt, Assign)
            and set(expr_vars(stmt.expr)) <= shared
            and never_written_elsewhere(stmt.var)
        ):
            shared.add(stmt.var)
            n += 1
        else:
            break
    return n


def _compose(
    parts: list[Program],
    pol: Policy,
    guard_vars: Iterable[str],
    post_vars: Iterable[str],
    share_low: bool,
) -> SelfComposition:
    names: set[str] = set()
    for p in parts:
        names |= all_vars(p)
    inputs: set[str] = set()
    written: dict[str, int] = {}
    for p in parts:
        inputs |= input_vars(p)
        for stmt_var in _assignment_targets(p.body):
            written[stmt_var] = written.get(stmt_var, 0) + 1

    shared: set[str] = set()
    prefix: list[Command] = []
    rest = [p.body for p in parts]
    if share_low:
        shared = {v for v in inputs if v in pol.low and v not in written}
        # the subject program is the last part; only its prefix can be shared
        last = flatten(parts[-1].body)
        k = _shared_prefix(parts[-1].body, shared, lambda v: written.get(v, 0) == 1)
        prefix, rest[-1] = last[:k], seq(*last[k:])

    theta = {v: v + SECOND_COPY_SUFFIX for v in sorted(names - shared)}
    clash = set(theta.values()) & names
    if clash:
        raise ValueError(f"renamed copy collides with existing variables: {sorted(clash)}")
    f = lambda v: theta.get(v, v)  # noqa: E731

    body: list[Command] = []
    for i, c in enumerate(rest):
        if i == len(rest) - 1:
            body.extend(prefix)
        body.append(c)
        body.append(rename_command(c, f))
    program = Program(seq(*body), name=parts[-1].name)

    pre = tuple((v, theta[v]) for v in sorted(pol.low & inputs) if v in theta)
    guard = tuple((v, theta[v]) for v in sorted(guard_vars) if v in theta)
    post = tuple((v, theta[v]) for v in sorted(post_vars) if v in theta)
    return SelfComposition(program, theta, pre, guard, post, frozenset(shared))


def _assignment_targets(c: Command) -> list[str]:
    if isinstance(c, Assign):
        return [c.var]
    if isinstance(c, ArrayAssign):
        return [c.array]
    if isinstance(c, Seq):
        return _assignment_targets(c.first) + _assignment_targets(c.second)
    if isinstance(c, If):
        return _assignment_targets(c.then) + _assignment_targets(c.orelse)
    if isinstance(c, While):
        # a write inside a loop may execute many times
        return _assignment_targets(c.body) * 2
    return []


def self_compose(c: Program, pol: Policy, *, share_low: bool = False) -> SelfComposition:
    """``C ; C_theta`` with pre- and postcondition "all low variables agree"."""
    low = pol.low & all_vars(c)
    return _compose([c], pol, (), low, share_low)


def self_compose_declass(
    d: Program, c_reified: ReifiedProgram, pol: Policy, *, share_low: bool = False
) -> SelfComposition:
    """``D ; D_theta ; C^T ; C^T_theta`` for checking security modulo ``d``.

    Postcondition: if the declassified outputs W agree, every low variable of
    the reified program (including instrumentation) agrees.
    """
    checked = validate_policy(c_reified.program, replace(pol, declassifier=d))
    w = checked.released
    ct = c_reified.program
    low = ((checked.low | set(c_reified.added)) & all_vars(ct)) - w
    return _compose([d, ct], checked, w, low, share_low)


# -- syntactic PC-security ----------------------------------------------------


@dataclass(frozen=True)
class SyntacticCheck:
    secure: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.secure


def tainted_vars(p: Program, pol: Policy) -> set[str]:
    """High variables plus every undeclared variable that may receive a high-derived value."""
    tainted = set(pol.high)
    declared = pol.low | pol.high
    stmts: list[tuple[str, set[str]]] = []

    def collect(c: Command) -> None:
        if isinstance(c, Assign):
            stmts.append((c.var, set(expr_vars(c.expr))))
        elif isinstance(c, ArrayAssign):
            stmts.append((c.array, set(expr_vars(c.index)) | set(expr_vars(c.expr))))
        elif isinstance(c, Seq):
            collect(c.first)
            collect(c.second)
        elif isinstance(c, If):
            collect(c.then)
            collect(c.orelse)
        elif isinstance(c, While):
            collect(c.body)

    collect(p.body)
    changed = True
    while changed:
        changed = False
        for target, reads in stmts:
            if target not in declared and target not in tainted and reads & tainted:
                tainted.add(target)
                changed = True
    return tainted


def check_syntactic_pc(p: Program, pol: Policy) -> SyntacticCheck:
    """Sufficient condition for PC-security.

    (i) no value computed from high data is assigned to a low variable, and
    (ii) no conditional or loop guard reads high data. Ternaries are not
    branches.
    """
    tainted = tainted_vars(p, pol)
    violations: list[str] = []

    def high_reads(e: Expr) -> list[str]:
        return sorted({v for v in expr_vars(e) if v in tainted})

    def walk(c: Command) -> None:
        if isinstance(c, Assign):
            bad = high_reads(c.expr)
            if c.var in pol.low and bad:
                violations.append(f"(i) low variable {c.var!r} assigned from high {', '.join(bad)}")
        elif isinstance(c, ArrayAssign):
            bad = sorted(set(high_reads(c.index)) | set(high_reads(c.expr)))
            if c.array in pol.low and bad:
                violations.append(f"(i) low array {c.array!r} updated from high {', '.join(bad)}")
        elif isinstance(c, Seq):
            walk(c.first)
            walk(c.second)
        elif isinstance(c, If):
            bad = high_reads(c.cond)
            if bad:
                violations.append(f"(ii) conditional on high {', '.join(bad)}")
            walk(c.then)
            walk(c.orelse)
        elif isinstance(c, While):
            bad = high_reads(c.cond)
            if bad:
                violations.append(f"(ii) loop guard on high {', '.join(bad)}")
            walk(c.body)

    walk(p.body)
    return SyntacticCheck(not violations, tuple(violations))
