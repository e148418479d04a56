"""Bounded checkers for the four security properties plus reification adequacy.

Every check first runs the program(s) once per initial state, then scans the
pair stream in a fixed order. A fault in any run turns the whole verdict into
FAULT (the lowest-indexed faulting state is reported). Otherwise the first
violating pair in stream order becomes the counterexample, so serial and
parallel runs agree.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from ..lang.analysis import input_vars, written_vars
from ..lang.ast import Program, seq
from ..lang.policy import Policy, PolicyError, validate_policy
from ..semantics import DEFAULT_BUDGET, Fault, Value, run
from ..transforms import SECOND_COPY_SUFFIX, ReifiedProgram, rename
from .domains import EXHAUSTIVE, DomainSpec, StateSpace, all_states, low_equal_space
from .verdict import (
    ADEQUACY_VIOLATION,
    FAULT,
    INSECURE,
    MANIFEST_VIOLATION,
    SECURE,
    SECURE_SAMPLED,
    STORE_LEAK,
    TRANSCRIPT_LEAK,
    Counterexample,
    FaultWitness,
    Verdict,
    worst,
)

_ABSENT = None  # no program value is ever None


# -- low projections ------------------------------------------------------------


def low_key(s: Mapping[str, Value], lows: Iterable[str]) -> tuple:
    """Hashable low projection; a variable missing from ``s`` projects to a marker."""
    return tuple((v, s.get(v, _ABSENT)) for v in sorted(lows))


def low_projection(s: Mapping[str, Value], lows: Iterable[str]) -> dict:
    return {v: s[v] for v in sorted(lows) if v in s}


def low_equiv(a: Mapping[str, Value], b: Mapping[str, Value], pol: Policy | Iterable[str]) -> bool:
    """True iff ``a`` and ``b`` agree on every low variable.

    A low variable bound in only one of the states counts as a disagreement;
    one bound in neither is ignored.
    """
    lows = pol.low if isinstance(pol, Policy) else pol
    return low_key(a, lows) == low_key(b, lows)


# -- running ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Outcome:
    state: dict | None
    transcript: tuple
    fault: tuple[str, str] | None = None


def _run_one(prog: Program, s: Mapping[str, Value], budget: int) -> _Outcome:
    try:
        r = run(prog, s, budget)
    except Fault as f:
        return _Outcome(None, (), (f.kind, str(f)))
    return _Outcome(r.state, r.transcript)


def _run_chunk(args: tuple[Program, list[dict], int]) -> list[_Outcome]:
    prog, states, budget = args
    return [_run_one(prog, s, budget) for s in states]


def run_states(prog: Program, states: Sequence[Mapping[str, Value]], budget: int = DEFAULT_BUDGET, workers: int = 1) -> list[_Outcome]:
    """Run ``prog`` on every state, preserving order."""
    states = [dict(s) for s in states]
    if workers <= 1 or len(states) < 64:
        return _run_chunk((prog, states, budget))
    size = -(-len(states) // (workers * 4))
    chunks = [(prog, states[i:i + size], budget) for i in range(0, len(states), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out: list[_Outcome] = []
        for part in pool.map(_run_chunk, chunks):
            out.extend(part)
        return out


def _first_fault(runs: Sequence[tuple[str, Sequence[_Outcome]]], states: Sequence[dict]) -> FaultWitness | None:
    """Lowest state index wins; at equal index, the earlier program."""
    for i, s in enumerate(states):
        for role, outs in runs:
            f = outs[i].fault
            if f is not None:
                return FaultWitness(role, dict(s), f[0], f[1])
    return None


# -- shared plumbing ----------------------------------------------------------------


def _finish(prop: str, dom: DomainSpec, t0: float, pairs: int, nruns: int, *, cx=None, fault=None, notes=()) -> Verdict:
    if fault is not None:
        status = FAULT
    elif cx is not None:
        status = INSECURE
    else:
        status = SECURE if dom.mode == EXHAUSTIVE else SECURE_SAMPLED
    sampled = dom.mode != EXHAUSTIVE
    return Verdict(
        prop=prop,
        status=status,
        mode=dom.mode,
        pairs=pairs,
        runs=nruns,
        runtime=time.perf_counter() - t0,
        samples=dom.samples if sampled else None,
        seed=dom.seed if sampled else None,
        counterexample=cx,
        fault=fault,
        notes=list(notes),
    )


def _prepare(dom: DomainSpec, needed: set[str], pol: Policy) -> DomainSpec:
    sub = dom.restrict(needed)
    sub.check_covers(needed, pol)
    return sub


def _space(pol: Policy, dom: DomainSpec, reverse: bool) -> StateSpace:
    space = low_equal_space(pol, dom)
    return space.reversed() if reverse else space


def _cx(clause: str, space: StateSpace, a: int, b: int, outs: Sequence[_Outcome], lows, program: str, extra=None) -> Counterexample:
    ra, rb = outs[a], outs[b]
    return Counterexample(
        clause=clause,
        r_state=dict(space.states[a]),
        s_state=dict(space.states[b]),
        r_transcript=ra.transcript,
        s_transcript=rb.transcript,
        r_low=low_projection(ra.state, lows),
        s_low=low_projection(rb.state, lows),
        program=program,
        extra=extra or {},
    )


# -- PC-security --------------------------------------------------------------------


def pc_policy(c: Program, pol: Policy) -> Policy:
    return validate_policy(c, replace(pol, declassifier=None))


def check_pc(c: Program, pol: Policy, dom: DomainSpec, *, workers: int = 1, reverse: bool = False, prop: str = "pc") -> Verdict:
    """Low-equal inputs must give low-equal final stores and equal transcripts."""
    t0 = time.perf_counter()
    pol = pc_policy(c, pol)
    dom = _prepare(dom, input_vars(c), pol)
    space = _space(pol, dom, reverse)
    outs = run_states(c, space.states, dom.budget, workers)
    fault = _first_fault([("subject", outs)], space.states)
    if fault:
        return _finish(prop, dom, t0, 0, len(outs), fault=fault)
    keys = [low_key(o.state, pol.low) for o in outs]
    cx = None
    for a, b in space.pairs():
        if keys[a] != keys[b]:
            cx = _cx(STORE_LEAK, space, a, b, outs, pol.low, "subject")
            break
        if outs[a].transcript != outs[b].transcript:
            cx = _cx(TRANSCRIPT_LEAK, space, a, b, outs, pol.low, "subject")
            break
    return _finish(prop, dom, t0, space.pair_count(), len(outs), cx=cx)


# -- PC-security modulo a declassifier ----------------------------------------------


def declass_policy(c: Program, d: Program, pol: Policy) -> Policy:
    return validate_policy(c, replace(pol, declassifier=d))


def check_declass(c: Program, d: Program, pol: Policy, dom: DomainSpec, *, workers: int = 1, reverse: bool = False, prop: str = "declass") -> Verdict:
    """Clause 1: low-equal final stores. Clause 2: equal D outputs on W imply equal transcripts."""
    t0 = time.perf_counter()
    pol = declass_policy(c, d, pol)
    w = pol.released
    dom = _prepare(dom, input_vars(c) | input_vars(d), pol)
    space = _space(pol, dom, reverse)
    c_outs = run_states(c, space.states, dom.budget, workers)
    d_outs = run_states(d, space.states, dom.budget, workers)
    nruns = len(c_outs) + len(d_outs)
    fault = _first_fault([("subject", c_outs), ("declassifier", d_outs)], space.states)
    if fault:
        return _finish(prop, dom, t0, 0, nruns, fault=fault)
    keys = [low_key(o.state, pol.low) for o in c_outs]
    released = [low_key(o.state, w) for o in d_outs]
    cx = None
    for a, b in space.pairs():
        if keys[a] != keys[b]:
            cx = _cx(STORE_LEAK, space, a, b, c_outs, pol.low, "subject")
            break
        if released[a] == released[b] and c_outs[a].transcript != c_outs[b].transcript:
            extra = {
                "declassified R": low_projection(d_outs[a].state, w),
                "declassified S": low_projection(d_outs[b].state, w),
            }
            cx = _cx(TRANSCRIPT_LEAK, space, a, b, c_outs, pol.low, "subject", extra)
            break
    notes = []
    if cx is not None and cx.clause == TRANSCRIPT_LEAK:
        notes.append("the transcripts differ although the declassifier outputs agree, "
                     "so the difference is not manifest in the declassifier's runs")
    return _finish(prop, dom, t0, space.pair_count(), nruns, cx=cx, notes=notes)


# -- manifest declassifiers -------------------------------------------------------


def manifest_lows(d: Program, pol: Policy) -> frozenset[str]:
    """The low set for a declassifier check: declared lows plus everything D writes."""
    w = written_vars(d)
    clash = w & pol.high
    if clash:
        raise PolicyError([f"declassified outputs declared high: {', '.join(sorted(clash))}"])
    return pol.low | w


def _grouped_transcript_check(outs: Sequence[_Outcome], lows) -> tuple[int, int] | None:
    """Smallest ``(i, j)`` with equal final low projection but different transcripts."""
    first: dict[tuple, int] = {}
    best: tuple[int, int] | None = None
    for j, o in enumerate(outs):
        i = first.setdefault(low_key(o.state, lows), j)
        if i != j and outs[i].transcript != o.transcript:
            if best is None or (i, j) < best:
                best = (i, j)
    return best


def check_manifest(d: Program, pol: Policy, dom: DomainSpec, *, workers: int = 1, reverse: bool = False, prop: str = "manifest") -> Verdict:
    """Over all pairs of inputs: equal final low stores imply equal transcripts.

    Rather than scanning n^2 pairs, final states are grouped by their low
    projection and transcripts compared within each group.
    """
    t0 = time.perf_counter()
    lows = manifest_lows(d, pol)
    dom = _prepare(dom, input_vars(d), replace(pol, low=lows))
    states = all_states(dom)
    if reverse:
        states = states[::-1]
    outs = run_states(d, states, dom.budget, workers)
    fault = _first_fault([("declassifier", outs)], states)
    if fault:
        return _finish(prop, dom, t0, 0, len(outs), fault=fault)
    hit = _grouped_transcript_check(outs, lows)
    cx = None
    if hit is not None:
        space = StateSpace(states)
        cx = _cx(MANIFEST_VIOLATION, space, hit[0], hit[1], outs, lows, "declassifier")
    return _finish(prop, dom, t0, len(states) ** 2, len(outs), cx=cx)


# -- manifest form --------------------------------------------------------------------


def theorem_declassifier(d: Program) -> tuple[Program, dict[str, str]]:
    """A copy of ``d`` with its outputs renamed apart, for use as the declassifier of ``d;q``."""
    mapping = {v: v + SECOND_COPY_SUFFIX for v in sorted(written_vars(d))}
    return rename(d, mapping), mapping


def theorem_policy(d: Program, pol: Policy) -> tuple[Program, Policy]:
    d2, mapping = theorem_declassifier(d)
    w = frozenset(mapping)
    composite = Policy(
        low=(pol.low - w) | frozenset(mapping.values()),
        high=pol.high | w,
        declassifier=d2,
    )
    return d2, composite


def check_remainder(d: Program, q: Program, pol: Policy, dom: DomainSpec, *, workers: int = 1, reverse: bool = False, prop: str = "remainder-pc") -> Verdict:
    """PC-security of ``q`` over the states ``d`` can hand it, with D's outputs low."""
    t0 = time.perf_counter()
    lows = manifest_lows(d, pol)
    qpol = replace(pol, low=lows, high=pol.high - lows, declassifier=None)
    needed = input_vars(seq(d.body, q.body))
    dom = _prepare(dom, needed, qpol)
    starts = all_states(dom)
    d_outs = run_states(d, starts, dom.budget, workers)
    fault = _first_fault([("declassifier", d_outs)], starts)
    if fault:
        return _finish(prop, dom, t0, 0, len(d_outs), fault=fault)

    # distinct intermediate states, grouped by their low projection
    seen: dict[tuple, int] = {}
    states: list[dict] = []
    groups: dict[tuple, list[int]] = {}
    for o in d_outs:
        frozen = tuple(sorted(o.state.items()))
        if frozen not in seen:
            seen[frozen] = len(states)
            groups.setdefault(low_key(o.state, lows), []).append(len(states))
            states.append(o.state)
    space = StateSpace(states, list(groups.values()))
    if reverse:
        space = space.reversed()
    outs = run_states(q, states, dom.budget, workers)
    nruns = len(d_outs) + len(outs)
    fault = _first_fault([("remainder", outs)], states)
    if fault:
        return _finish(prop, dom, t0, 0, nruns, fault=fault)
    keys = [low_key(o.state, lows) for o in outs]
    cx = None
    for a, b in space.pairs():
        if keys[a] != keys[b]:
            cx = _cx(STORE_LEAK, space, a, b, outs, lows, "remainder")
            break
        if outs[a].transcript != outs[b].transcript:
            cx = _cx(TRANSCRIPT_LEAK, space, a, b, outs, lows, "remainder")
            break
    return _finish(prop, dom, t0, space.pair_count(), nruns, cx=cx)


def check_manifest_form(d: Program, q: Program, pol: Policy, dom: DomainSpec, *, workers: int = 1, reverse: bool = False) -> Verdict:
    """``d`` manifest and ``q`` PC-secure, cross-checked against the composition theorem.

    The overall status is the worst of the three components. If both
    components pass but the composition fails, the verdict is INSECURE with
    a note naming the theorem violation.
    """
    t0 = time.perf_counter()
    kw = dict(workers=workers, reverse=reverse)
    manifest = check_manifest(d, pol, dom, **kw)
    remainder = check_remainder(d, q, pol, dom, **kw)
    d2, composite = theorem_policy(d, pol)
    composed = Program(seq(d.body, q.body), name=None)
    theorem = check_declass(composed, d2, composite, dom, prop="theorem", **kw)

    comps = {"manifest": manifest, "remainder-pc": remainder, "theorem": theorem}
    status = worst(*(v.status for v in comps.values()))
    notes = []
    if manifest.secure and remainder.secure and not theorem.secure and theorem.status != FAULT:
        notes.append("THEOREM VIOLATION: both components pass but the composition is not secure modulo the declassifier")
    first_bad = next((v for v in comps.values() if v.status == status and not v.secure), None)
    if status in (SECURE, SECURE_SAMPLED):
        status = SECURE if all(v.status == SECURE for v in comps.values()) else SECURE_SAMPLED
    return Verdict(
        prop="manifest-form",
        status=status,
        mode=dom.mode,
        pairs=sum(v.pairs for v in comps.values()),
        runs=sum(v.runs for v in comps.values()),
        runtime=time.perf_counter() - t0,
        samples=dom.samples if dom.mode != EXHAUSTIVE else None,
        seed=dom.seed if dom.mode != EXHAUSTIVE else None,
        counterexample=first_bad.counterexample if first_bad else None,
        fault=first_bad.fault if first_bad else None,
        components=comps,
        notes=notes,
    )


# -- reification adequacy ---------------------------------------------------------


def check_adequacy(p: Program, rp: ReifiedProgram, pol: Policy, dom: DomainSpec, *, workers: int = 1, reverse: bool = False) -> Verdict:
    """For low-equal pairs: (equal transcripts and low finals of p) iff (low finals of rp agree).

    The reified side compares the low variables together with the added
    instrumentation variables.
    """
    t0 = time.perf_counter()
    pol = pc_policy(p, pol)
    dom = _prepare(dom, input_vars(p), pol)
    space = _space(pol, dom, reverse)
    outs = run_states(p, space.states, dom.budget, workers)
    r_outs = run_states(rp.program, [rp.initial_state(s) for s in space.states], dom.budget, workers)
    nruns = len(outs) + len(r_outs)
    fault = _first_fault([("subject", outs), ("reified", r_outs)], space.states)
    if fault:
        return _finish("adequacy", dom, t0, 0, nruns, fault=fault)
    r_lows = pol.low | set(rp.added)
    keys = [low_key(o.state, pol.low) for o in outs]
    r_keys = [low_key(o.state, r_lows) for o in r_outs]
    cx = None
    for a, b in space.pairs():
        left = keys[a] == keys[b] and outs[a].transcript == outs[b].transcript
        right = r_keys[a] == r_keys[b]
        if left != right:
            extra = {
                "reified low R": low_projection(r_outs[a].state, r_lows),
                "reified low S": low_projection(r_outs[b].state, r_lows),
            }
            cx = _cx(ADEQUACY_VIOLATION, space, a, b, outs, pol.low, "subject", extra)
            break
    return _finish("adequacy", dom, t0, space.pair_count(), nruns, cx=cx)


# -- replay ----------------------------------------------------------------------------


def replay(
    cx: Counterexample,
    prog: Program,
    pol: Policy,
    *,
    declassifier: Program | None = None,
    reified: ReifiedProgram | None = None,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """Re-run a counterexample and confirm it still witnesses its clause.

    ``prog`` is the program the counterexample is about: the subject for
    store/transcript leaks and adequacy, the declassifier for manifest
    violations. For a transcript leak modulo a declassifier, pass it as
    ``declassifier``. The recorded transcripts must also be reproduced.
    """
    r, s = run(prog, cx.r_state, budget), run(prog, cx.s_state, budget)
    if (r.transcript, s.transcript) != (cx.r_transcript, cx.s_transcript):
        return False
    if cx.clause == MANIFEST_VIOLATION:
        lows = manifest_lows(prog, pol)
        return low_equiv(r.state, s.state, lows) and r.transcript != s.transcript
    if cx.clause == ADEQUACY_VIOLATION:
        if reified is None:
            raise ValueError("adequacy replay needs the reified program")
        lows = pc_policy(prog, pol).low
        rr = run(reified.program, reified.initial_state(cx.r_state), budget)
        rs = run(reified.program, reified.initial_state(cx.s_state), budget)
        left = low_equiv(r.state, s.state, lows) and r.transcript == s.transcript
        right = low_equiv(rr.state, rs.state, lows | set(reified.added))
        return left != right
    guard_d = declassifier
    if cx.program == "remainder":
        # the declassifier produced the initial states; its outputs are low
        if declassifier is None:
            raise ValueError("remainder replay needs the declassifier")
        lows = manifest_lows(declassifier, pol)
        guard_d = None
    elif declassifier is not None:
        checked = declass_policy(prog, declassifier, pol)
        lows, w = checked.low, checked.released
    else:
        lows = pc_policy(prog, pol).low
    if not low_equiv(cx.r_state, cx.s_state, lows):
        return False
    if cx.clause == STORE_LEAK:
        return not low_equiv(r.state, s.state, lows)
    if cx.clause == TRANSCRIPT_LEAK:
        if not low_equiv(r.state, s.state, lows) or r.transcript == s.transcript:
            return False
        if guard_d is None:
            return True
        dr, ds = run(guard_d, cx.r_state, budget), run(guard_d, cx.s_state, budget)
        return low_equiv(dr.state, ds.state, w)
    raise ValueError(f"unknown clause {cx.clause!r}")
