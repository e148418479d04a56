import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scdeclass.corpus import load_corpus
from scdeclass.lang import Program, Skip, parse_expr, parse_program
from scdeclass.semantics import (
    BudgetExhausted,
    IndexOutOfBounds,
    ModByZero,
    NegativeBitwise,
    NotAnArray,
    NotAnInteger,
    UnboundVariable,
    eval_expr,
    format_transcript,
    run,
    run_store,
)
from scdeclass.verifier import all_states

from .gen import ProgramGen, random_state
from .oracle import OracleFault, big_step

CORPUS = load_corpus()


def test_ternary_picks_else_on_zero():
    assert eval_expr(parse_expr("k ? x : r"), {"k": 0, "x": 2, "r": 5}) == 5


def test_xor():
    assert eval_expr(parse_expr("3 xor 5"), {}) == 6


def test_array_read():
    assert eval_expr(parse_expr("d[i]"), {"d": (1, 0, 1), "i": 2}) == 1


def test_modexp1_example():
    r = run(CORPUS["modexp1"].program, {"m": 3, "x": 2, "d": (1, 0, 1)})
    assert r.state["r"] == 32
    assert r.transcript == (1, 1, 1, 0, 1, 1, 0)


def test_modexp2_example():
    r = run(CORPUS["modexp2"].program, {"m": 3, "x": 2, "d": (1, 0, 1)})
    assert r.state["r"] == 32
    assert r.transcript == (1, 1, 1, 1, 1, 0)


def test_skip():
    r = run(Program(Skip()), {"a": 1})
    assert r.state == {"a": 1} and r.transcript == () and r.steps == 0


def test_divergence_hits_budget():
    with pytest.raises(BudgetExhausted):
        run(parse_program("while (1) { skip; }"), {}, budget=1000)


def test_hamming_if_store():
    assert run_store(CORPUS["hamming_if"].program, {"m": 3, "d": (1, 0, 1)})["h"] == 2
    r = run(CORPUS["hamming_if"].program, {"m": 0, "d": ()})
    assert r.state["h"] == 0 and r.transcript == (0,)


def test_allzeros_manifest_store():
    assert run_store(CORPUS["allzeros_manifest"].program, {"m": 2, "d": (0, 0)})["allz"] == 1


@pytest.mark.parametrize(
    "src, state, fault",
    [
        ("x = y;", {}, UnboundVariable),
        ("x = d[3];", {"d": (1, 2, 3)}, IndexOutOfBounds),
        ("x = d[-1];", {"d": (1, 2, 3)}, IndexOutOfBounds),
        ("d[i] = 1;", {"d": (0,), "i": 1}, IndexOutOfBounds),
        ("x = y[0];", {"y": 4}, NotAnArray),
        ("x = d + 1;", {"d": (1,)}, NotAnInteger),
        ("x = 3 mod 0;", {}, ModByZero),
        ("x = 0 - 1 xor 1;", {}, NegativeBitwise),
        ("if (d) { skip; }", {"d": (1,)}, NotAnInteger),
    ],
)
def test_faults(src, state, fault):
    with pytest.raises(fault):
        run(parse_program(src), state)


def test_array_update_is_functional():
    s0 = {"d": (0, 0, 0)}
    r = run(parse_program("d[1] = 7;"), s0)
    assert r.state["d"] == (0, 7, 0) and s0["d"] == (0, 0, 0)


def test_boolean_ops_are_total():
    # both sides are evaluated, so a fault on the right is not skipped
    with pytest.raises(ModByZero):
        run(parse_program("x = 0 && (1 mod 0);"), {})


def test_unbounded_integers():
    r = run(parse_program("x = 1; i = 0; while (i < 100) { x = x * 2; i = i + 1; }"), {})
    assert r.state["x"] == 2**100


def test_format_transcript():
    assert format_transcript((1, 1, 0)) == "110"


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_determinism_and_store_consistency(name):
    e = CORPUS[name]
    for s in all_states(e.domain)[:50]:
        a, b = run(e.program, s), run(e.program, s)
        assert a == b
        assert run_store(e.program, s) == a.state


def test_budget_monotonicity():
    p = CORPUS["modexp1"].program
    s = {"m": 4, "x": 3, "d": (1, 1, 0, 1)}
    r = run(p, s)
    assert run(p, s, budget=r.steps) == r
    assert run(p, s, budget=r.steps * 3) == r
    with pytest.raises(BudgetExhausted):
        run(p, s, budget=r.steps - 1)


def test_modexp2_transcript_shape():
    p = CORPUS["modexp2"].program
    for m in range(7):
        for d in itertools.product((0, 1), repeat=m):
            t = run(p, {"m": m, "x": 1, "d": d}).transcript
            hw = sum(1 for b in d if b == 1)
            assert t == (1,) * (m + hw) + (0,)


def _outcome_machine(p, s, budget):
    try:
        r = run(p, s, budget)
        return r.state, r.transcript, r.steps
    except Exception as f:
        return getattr(f, "kind", repr(f))


def _outcome_oracle(p, s, budget):
    try:
        return big_step(p, s, budget)
    except OracleFault as f:
        return f.kind


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_oracle_agrees_on_corpus(name):
    e = CORPUS[name]
    for s in all_states(e.domain):
        assert _outcome_machine(e.program, s, 100_000) == _outcome_oracle(e.program, s, 100_000)


@settings(max_examples=500, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_oracle_agrees_on_random_programs(seed):
    rng = random.Random(seed)
    p = ProgramGen(rng, wild_loops=True).program()
    s = random_state(rng)
    assert _outcome_machine(p, s, 2000) == _outcome_oracle(p, s, 2000)
