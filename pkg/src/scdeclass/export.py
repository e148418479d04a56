"""Self-composed C verification harnesses for external software model checkers.

A harness declares the shared low inputs once and the high inputs once per
run, then lays out the declassifier copies followed by the subject copies.
It ends in a block that asserts agreement of the checked variables,
guarded by agreement of the declassified outputs. Every agreement is
written as a pair of inequalities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

from .lang.analysis import all_vars, array_vars, input_vars, written_vars
from .lang.ast import (
    ArrayAssign,
    Assign,
    BinOp,
    Command,
    If,
    Lit,
    Program,
    Seq,
    Skip,
    Var,
    While,
    flatten,
    seq,
)
from .lang.policy import Policy, validate_policy
from .lang.printer import format_expr
from .semantics import DEFAULT_BUDGET, Value, run
from .transforms import ReifiedProgram, rename, rename_command

C_KEYWORDS = frozenset(
    "auto break case char const continue default do double else enum extern float for goto if "
    "inline int long register restrict return short signed sizeof static struct switch typedef "
    "union unsigned void volatile while assert main".split()
)


class ExportError(ValueError):
    pass


@dataclass(frozen=True)
class _Part:
    title: str
    program: Program
    names: Mapping[str, str]  # source variable -> C identifier


@dataclass
class CHarness:
    """Emitted C text plus what is needed to replay the harness in-language.

    ``program`` is the straight composition of all copies over the harness
    identifiers; ``check`` runs it on a concrete input pair and evaluates
    the guarded assertions.
    """

    source: str
    subject: str
    declassifier: str | None
    guard: list[tuple[str, str]]
    asserts: list[tuple[str, str]]
    program: Program
    shared: list[str] = field(default_factory=list)
    # input variable -> (identifier in run R, identifier in run S)
    inputs: dict[str, tuple[str, str]] = field(default_factory=dict)

    def initial_state(self, r: Mapping[str, Value], s: Mapping[str, Value]) -> dict[str, Value]:
        state: dict[str, Value] = {}
        for v in self.shared:
            if v in r or v in s:
                if r.get(v) != s.get(v):
                    raise ValueError(f"shared low input {v!r} differs between the two states")
                state[v] = r[v]
        for v, (a, b) in self.inputs.items():
            if v in r:
                state[a] = r[v]
            if v in s:
                state[b] = s[v]
        return state

    def check(self, r: Mapping[str, Value], s: Mapping[str, Value], budget: int = DEFAULT_BUDGET) -> bool:
        """True iff every assertion holds (or the guard fails) on this input pair."""
        final = run(self.program, self.initial_state(r, s), budget).state
        if not all(final[a] == final[b] for a, b in self.guard):
            return True
        return all(final[a] == final[b] for a, b in self.asserts)


# -- naming --------------------------------------------------------------------


def instrumentation_names(added: Sequence[str], taken: set[str]) -> dict[str, str]:
    """Readable names for instrumentation variables: ``t``, then ``t_2``, ``t_3``, ..."""
    out: dict[str, str] = {}
    used = set(taken)
    n = 1
    for v in added:
        while True:
            cand = "t" if n == 1 else f"t_{n}"
            n += 1
            if cand not in used:
                break
        out[v] = cand
        used.add(cand)
    return out


def _c_ident(name: str) -> str:
    if name in C_KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise ExportError(f"variable {name!r} cannot be used as a C identifier")
    return name


def _func_name(name: str | None) -> str:
    base = re.sub(r"\W", "_", name or "harness")
    if base[0].isdigit():
        base = "_" + base
    return base if base not in C_KEYWORDS else base + "_"


# -- C statement printing ---------------------------------------------------------


def _c_assign(c: Assign, declare: bool) -> str:
    if declare:
        return f"int {c.var} = {format_expr(c.expr)};"
    e = c.expr
    if isinstance(e, BinOp) and e.left == Var(c.var):
        if e.right == Lit(1) and e.op in ("+", "-"):
            return f"{c.var}{e.op * 2};"
        if e.op == "+":
            return f"{c.var} += {format_expr(e.right)};"
    return f"{c.var} = {format_expr(e)};"


def _c_lines(c: Command, indent: int, declared: set[str], arrays: set[str], top: bool) -> list[str]:
    pad = "  " * indent
    if isinstance(c, Seq):
        out: list[str] = []
        for s in flatten(c):
            out += _c_lines(s, indent, declared, arrays, top)
        return out
    if isinstance(c, Skip):
        return []
    if isinstance(c, Assign):
        fresh = top and c.var not in declared
        declared.add(c.var)
        return [pad + _c_assign(c, fresh)]
    if isinstance(c, ArrayAssign):
        return [f"{pad}{c.array}[{format_expr(c.index)}] = {format_expr(c.expr)};"]

    # compound statement: declare anything first written inside it
    out = []
    for v in sorted(written_vars(c) - declared - arrays):
        out.append(f"{pad}int {v};")
        declared.add(v)
    if isinstance(c, If):
        out.append(f"{pad}if ({format_expr(c.cond)}) {{")
        out += _c_lines(c.then, indent + 1, declared, arrays, False)
        if isinstance(c.orelse, Skip):
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}}} else {{")
            out += _c_lines(c.orelse, indent + 1, declared, arrays, False)
            out.append(f"{pad}}}")
        return out
    if isinstance(c, While):
        out.append(f"{pad}while({format_expr(c.cond)}) {{")
        out += _c_lines(c.body, indent + 1, declared, arrays, False)
        out.append(f"{pad}}}")
        return out
    raise TypeError(f"not a command: {c!r}")


def _agree(a: str, b: str) -> str:
    return f"{a} <= {b} && {a} >= {b}"


# -- assembly ----------------------------------------------------------------------


def _assemble(
    func: str,
    title: str,
    shared: Sequence[str],
    highs: Sequence[str],
    arrays: set[str],
    array_sizes: Mapping[str, str],
    parts: Sequence[_Part],
    guard: Sequence[tuple[str, str]],
    asserts: Sequence[tuple[str, str]],
) -> str:
    lines = ["#include <assert.h>", "", f"// {title}"]
    if arrays & (set(shared) | set(highs)):
        lines += [
            "// Arrays are variable-length arrays sized by uninitialized variables,",
            "// which model checkers accept but which is not portable C.",
        ]
    lines += ["", f"int {func}() {{", ""]

    def size(v: str) -> str:
        if v in array_sizes:
            return array_sizes[v]
        if "m" in shared:
            return "m"
        raise ExportError(f"no size given for array {v!r}")

    def decl(v: str, ident: str, what: str) -> str:
        if v in arrays:
            return f"  int {ident}[{size(v)}]; // {what}"
        return f"  int {ident}; // {what}"

    for v in shared:
        lines.append(decl(v, v, "low input, shared"))
    if shared:
        lines.append("")
    for group in ([v for v in highs if v not in arrays], [v for v in highs if v in arrays]):
        for v in group:
            for k in (1, 2):
                lines.append(decl(v, f"{v}{k}", f"high input, copy {k}"))
        if group:
            lines.append("")

    shared_set = set(shared)
    for part in parts:
        lines.append(f"  // {part.title}")
        declared = shared_set | {part.names[v] for v in highs if v in part.names}
        body = rename_command(part.program.body, lambda v, n=part.names: n.get(v, v))
        part_arrays = {part.names.get(a, a) for a in arrays}
        lines += _c_lines(body, 1, declared, part_arrays, True)
        lines.append("")

    checks = []
    for a, b in asserts:
        checks += [f"assert({a} <= {b});", f"assert({a} >= {b});"]
    if not checks:
        checks = ["// nothing to assert"]
    if guard:
        cond = " && ".join(_agree(a, b) for a, b in guard)
        lines.append(f"  if ({cond}) {{")
        lines += ["    " + c for c in checks]
        lines.append("  }")
    else:
        lines += ["  " + c for c in checks]
    lines += ["", "  return 0;", "}", ""]
    return "\n".join(lines)


def _ordered(names: set[str], *programs: Program) -> list[str]:
    order: list[str] = []
    for p in programs:
        for v in p.var_order:
            if v in names and v not in order:
                order.append(v)
    return order + sorted(names - set(order))


def _split_inputs(pol: Policy, programs: Sequence[Program], writers: Sequence[Program]) -> tuple[list[str], list[str]]:
    inputs: set[str] = set()
    for p in programs:
        inputs |= input_vars(p)
    written: set[str] = set()
    for p in writers:
        written |= written_vars(p)
    shared = {v for v in inputs if v in pol.low and v not in written}
    clash = {v for v in inputs if v in pol.low and v in written}
    if clash:
        raise ExportError(f"low inputs overwritten by the program cannot be shared: {', '.join(sorted(clash))}")
    ordered = _ordered(inputs, *programs)
    return [v for v in ordered if v in shared], [v for v in ordered if v not in shared]


def _run_names(vars_: set[str], shared: Sequence[str], suffix: Callable[[str], int]) -> dict[str, str]:
    return {v: _c_ident(v if v in shared else f"{v}{suffix(v)}") for v in vars_}


def _label(p: Program, default: str) -> str:
    return (p.name or default).upper()


def emit_c_harness(
    d: Program,
    c_reified: ReifiedProgram,
    pol: Policy,
    *,
    name: str | None = None,
    array_sizes: Mapping[str, str] | None = None,
) -> CHarness:
    """Harness for "the subject is secure modulo ``d``".

    Order: shared low inputs, per-copy high inputs, declassifier copies 1
    and 2, reified subject copies 1 and 2, then assertions over the
    instrumentation and low variables the subject writes, guarded by
    agreement on every declassified output. With no outputs the assertions
    are unguarded.
    """
    c_src = c_reified.program
    checked = validate_policy(c_src, replace(pol, declassifier=d))
    w = checked.released
    inst = instrumentation_names(c_reified.added, all_vars(c_src) | all_vars(d))
    c = rename(c_src, inst)
    shared, highs = _split_inputs(checked, [d, c], [d, c])
    arrays = array_vars(d) | array_vars(c)

    runs = []
    for k in (1, 2):
        names = _run_names(all_vars(d) | all_vars(c), shared, lambda v, k=k: k)
        runs.append(names)
    d_label, c_label = _label(d, "declassifier"), "PROGRAM"
    parts = [_Part(f"{d_label} COPY {k}", d, runs[k - 1]) for k in (1, 2)]
    parts += [_Part(f"{c_label} COPY {k}", c, runs[k - 1]) for k in (1, 2)]

    guard_vars = _ordered(set(w), d)
    checked_vars = ((checked.low | set(inst.values())) & written_vars(c)) - w
    assert_vars = _ordered(checked_vars, c)
    guard = [(runs[0][v], runs[1][v]) for v in guard_vars]
    asserts = [(runs[0][v], runs[1][v]) for v in assert_vars]

    subject = c_src.name or "program"
    title = f"Self-composed harness: {subject} modulo {d.name or 'declassifier'}."
    source = _assemble(
        _func_name(name or subject), title, shared, highs, arrays, dict(array_sizes or {}),
        parts, guard, asserts,
    )
    program = Program(seq(*(rename_command(p.program.body, lambda v, n=p.names: n.get(v, v)) for p in parts)), name=f"{subject}.harness")
    inputs = {v: (runs[0][v], runs[1][v]) for v in highs}
    return CHarness(source, subject, d.name, guard, asserts, program, list(shared), inputs)


def emit_manifest_harness(
    d: Program,
    d_reified: ReifiedProgram,
    pol: Policy,
    *,
    name: str | None = None,
    array_sizes: Mapping[str, str] | None = None,
) -> CHarness:
    """Harness for "``d`` is a manifest declassifier".

    ``d`` runs as copies 1 and 2, its reification as copies 3 and 4 from the
    same inputs. Reified copies reuse the input names of copies 1 and 2 and
    take suffixes 3 and 4 for variables the plain copies also write.
    Assertions compare the instrumentation, guarded by agreement on the
    declassified outputs.
    """
    w = written_vars(d)
    if w & pol.high:
        raise ExportError(f"declassified outputs declared high: {', '.join(sorted(w & pol.high))}")
    checked = validate_policy(d, replace(pol, low=pol.low | w, declassifier=None))
    inst = instrumentation_names(d_reified.added, all_vars(d_reified.program))
    dt = rename(d_reified.program, inst)
    shared, highs = _split_inputs(checked, [d, dt], [d, dt])
    overwritten = written_vars(dt) & set(highs)
    if overwritten:
        raise ExportError(f"reified copies would share overwritten inputs: {', '.join(sorted(overwritten))}")
    arrays = array_vars(d) | array_vars(dt)

    plain = [_run_names(all_vars(d), shared, lambda v, k=k: k) for k in (1, 2)]
    reified = [
        _run_names(all_vars(dt), shared, lambda v, k=k: k + 2 if v in w else k) for k in (1, 2)
    ]
    label = _label(d, "declassifier")
    parts = [_Part(f"{label} COPY {k}", d, plain[k - 1]) for k in (1, 2)]
    parts += [_Part(f"{label}^T COPY {k}", dt, reified[k - 1]) for k in (1, 2)]

    guard = [(plain[0][v], plain[1][v]) for v in _ordered(set(w), d)]
    asserts = [(reified[0][v], reified[1][v]) for v in _ordered(set(inst.values()), dt)]

    subject = d.name or "declassifier"
    title = f"Manifest harness: {subject} against its reification."
    source = _assemble(
        _func_name(name or subject + "Manifest"), title, shared, highs, arrays, dict(array_sizes or {}),
        parts, guard, asserts,
    )
    program = Program(seq(*(rename_command(p.program.body, lambda v, n=p.names: n.get(v, v)) for p in parts)), name=f"{subject}.manifest-harness")
    inputs = {v: (plain[0][v], plain[1][v]) for v in highs}
    return CHarness(source, subject, subject, guard, asserts, program, list(shared), inputs)
