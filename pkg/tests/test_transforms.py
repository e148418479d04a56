import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scdeclass.corpus import load_corpus
from scdeclass.lang import (
    Assign,
    Program,
    Skip,
    all_vars,
    equal_modulo_seq,
    flatten,
    make_policy,
    parse_program,
    pretty_print,
    read_vars,
    written_vars,
)
from scdeclass.semantics import Fault, run, run_store
from scdeclass.transforms import (
    GENERAL,
    HYBRID,
    UNNESTED,
    ReificationError,
    ReifiedProgram,
    check_syntactic_pc,
    decode_transcript,
    invert,
    rename,
    rename_state,
    reify,
    reify_general,
    reify_unnested,
    self_compose,
    self_compose_declass,
    suffix_renaming,
)
from scdeclass.verifier import DomainSpec, Interval, Values, all_states, check_pc

from .gen import ProgramGen, random_state

CORPUS = load_corpus()


# -- renaming --------------------------------------------------------------------


def test_rename_assignment():
    p = parse_program("x = 1;")
    assert rename(p, {"x": "x__2"}).body == Assign("x__2", parse_program("x = 1;").body.expr)


def test_rename_hamming():
    p = CORPUS["hamming_if"].program
    q = rename(p, suffix_renaming(all_vars(p)))
    assert "d__2" in read_vars(q) and "h__2" in written_vars(q)
    assert not all_vars(q) & all_vars(p)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_rename_inverse_is_identity(name):
    p = CORPUS[name].program
    theta = suffix_renaming(all_vars(p))
    assert rename(rename(p, theta), invert(theta)) == p


def test_rename_rejects_non_injective():
    with pytest.raises(ValueError):
        rename(parse_program("a = b;"), {"a": "z", "b": "z"})


@pytest.mark.parametrize("name", ["modexp1", "modexp2", "allzeros_nonmanifest"])
def test_rename_preserves_runs(name):
    e = CORPUS[name]
    theta = suffix_renaming(all_vars(e.program))
    q = rename(e.program, theta)
    for s in all_states(e.domain)[:40]:
        a = run(e.program, s)
        b = run(q, rename_state(s, theta))
        assert b.transcript == a.transcript
        assert b.state == rename_state(a.state, theta)


# -- reification -------------------------------------------------------------------


def test_reify_general_skip():
    rp = reify_general(Program(Skip()))
    assert rp.flavor == GENERAL and len(rp.added) == 2
    s = run_store(rp.program, {})
    assert decode_transcript(s[rp.added[0]], s[rp.added[1]]) == ()


def test_reify_general_decodes_modexp1():
    rp = reify_general(CORPUS["modexp1"].program)
    s = run_store(rp.program, rp.initial_state({"m": 3, "x": 2, "d": (1, 0, 1)}))
    acc, n = rp.accumulators[0]
    assert decode_transcript(s[acc], s[n]) == (1, 1, 1, 0, 1, 1, 0)


def test_reify_general_loop_shape():
    rp = reify_general(parse_program("while (e) { skip; }"))
    stmts = flatten(rp.program.body)
    assert isinstance(stmts[-3], type(parse_program("while (e) { skip; }").body))
    # exit bit: the accumulator doubles and the length grows after the loop
    assert pretty_print(Program(stmts[-2])).startswith("__r0 = 2 * __r0")


def test_decode_rejects_garbage():
    with pytest.raises(ValueError):
        decode_transcript(8, 2)
    with pytest.raises(ValueError):
        decode_transcript(0, -1)


def test_reify_unnested_reproduces_instrumented_program():
    rp = reify_unnested(CORPUS["modexp2"].program)
    assert rp.flavor == UNNESTED and len(rp.added) == 1
    renamed = rename(rp.program, {rp.added[0]: "t"})
    assert equal_modulo_seq(renamed, CORPUS["modexp2_instrumented"].program)


def test_reify_unnested_straight_line():
    p = parse_program("a = 1; b = a + 2;")
    rp = reify_unnested(p)
    assert rp.program == p and rp.added == ()


def test_reify_unnested_top_level_if():
    rp = reify_unnested(parse_program("if (h) { a = 1; } else { a = 2; }"))
    v = rp.added[0]
    assert run_store(rp.program, rp.initial_state({"h": 3}))[v] == 1
    assert run_store(rp.program, rp.initial_state({"h": 0}))[v] == 0


def test_reify_unnested_rejects_nesting():
    with pytest.raises(ReificationError):
        reify_unnested(CORPUS["modexp1"].program)


def test_reify_picks_cheapest():
    assert reify(CORPUS["modexp2"].program).flavor == UNNESTED
    rp = reify(CORPUS["modexp1"].program)
    assert rp.flavor == HYBRID and rp.accumulators


@pytest.mark.parametrize("flavor", ["general", "auto"])
@pytest.mark.parametrize("name", sorted(CORPUS))
def test_reification_preserves_semantics(name, flavor):
    e = CORPUS[name]
    rp = reify_general(e.program) if flavor == "general" else reify(e.program)
    assert not set(rp.added) & all_vars(e.program)
    for s in all_states(e.domain)[:200]:
        a = run(e.program, s)
        b = run(rp.program, rp.initial_state(s))
        assert {k: b.state[k] for k in a.state} == a.state
        assert b.transcript == a.transcript
        if rp.flavor == GENERAL:
            acc, n = rp.accumulators[0]
            assert decode_transcript(b.state[acc], b.state[n]) == a.transcript


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_general_encoding_decodes_to_transcript(seed):
    rng = random.Random(seed)
    p = ProgramGen(rng, risky=False).program()
    s = random_state(rng)
    try:
        a = run(p, s)
    except Fault:
        return
    rp = reify_general(p)
    b = run_store(rp.program, rp.initial_state(s))
    acc, n = rp.accumulators[0]
    assert decode_transcript(b[acc], b[n]) == a.transcript


# -- self-composition ----------------------------------------------------------------


def test_self_compose_increment():
    sc = self_compose(parse_program("l = l + 1;"), make_policy({"l"}))
    assert equal_modulo_seq(sc.program, parse_program("l = l + 1; l__2 = l__2 + 1;", allow_reserved=True))
    assert sc.pre == (("l", "l__2"),) and sc.post == (("l", "l__2"),)


def test_self_compose_skip():
    sc = self_compose(Program(Skip()), make_policy())
    assert all(isinstance(c, Skip) for c in flatten(sc.program.body))
    assert len(flatten(sc.program.body)) == 2


def test_self_compose_declass_skips():
    sc = self_compose_declass(Program(Skip()), ReifiedProgram(Program(Skip()), (), UNNESTED), make_policy(declassifier=Program(Skip())))
    assert len(flatten(sc.program.body)) == 4 and sc.guard == ()


def test_self_compose_declass_structure():
    d = CORPUS["hamming_ternary"].program
    rp = reify_unnested(CORPUS["modexp2"].program)
    sc = self_compose_declass(d, rp, make_policy({"m"}, {"x", "d"}))
    assert {a for a, _ in sc.guard} == {"hamming", "hd_i"}
    assert {a for a, _ in sc.post} == set(rp.added) | {"m"}
    parts = flatten(sc.program.body)
    first_loop = next(c for c in parts if hasattr(c, "body"))
    assert "hd_i" in read_vars(first_loop)


def test_shared_low_prefix():
    p = parse_program("n = m + 1; l = n * 2; r = h * n;")
    sc = self_compose(p, make_policy({"m", "l"}, {"h"}), share_low=True)
    stmts = flatten(sc.program.body)
    assert sum(1 for c in stmts if isinstance(c, Assign) and c.var.startswith("n")) == 1
    assert {"m", "n"} <= sc.shared and "h" not in sc.shared


def _faithful(sc, prog, s1, s2):
    merged = sc.merge_states(s1, s2)
    out = run_store(sc.program, merged)
    r1, r2 = run_store(prog, s1), run_store(prog, s2)
    for k, v in r1.items():
        assert out[k] == v
    for k, v in r2.items():
        assert out[sc.renaming.get(k, k) if k not in sc.shared else k] == v


@pytest.mark.parametrize("share", [False, True])
@pytest.mark.parametrize("name", ["modexp1", "modexp2", "hamming_if", "allzeros_nonmanifest"])
def test_self_composition_faithful(name, share):
    e = CORPUS[name]
    sc = self_compose(e.program, e.config.policy(), share_low=share)
    states = all_states(e.domain)
    rng = random.Random(1)
    for _ in range(150):
        s1 = rng.choice(states)
        s2 = dict(rng.choice(states))
        for v in sc.shared:
            if v in s1:
                s2[v] = s1[v]
        if any(v in s2 and v not in s1 for v in sc.shared):
            continue
        try:
            _faithful(sc, e.program, s1, s2)
        except Fault:
            pass


def test_self_composition_contract_matches_pc():
    e = CORPUS["modexp2"]
    rp = reify_unnested(e.program)
    sc = self_compose_declass(e.declassifier, rp, e.config.policy())
    states = all_states(DomainSpec({"m": Interval(0, 3), "x": Interval(0, 1), "d": e.domain.vars["d"]}))
    for s1, s2 in itertools.product(states, repeat=2):
        if s1["m"] != s2["m"]:
            continue
        merged = sc.merge_states(rp.initial_state(s1), rp.initial_state(s2))
        assert sc.holds(run_store(sc.program, merged))


# -- syntactic PC ----------------------------------------------------------------------


def test_syntactic_remainder_of_manifest_form():
    d, q = CORPUS["modexp_manifest"].parts
    pol = make_policy({"m", "j", "hamming"}, {"x", "d", "r", "k", "i"})
    assert check_syntactic_pc(q, pol)


def test_syntactic_branch_on_high():
    res = check_syntactic_pc(parse_program("if (h) { skip; } else { skip; }"), make_policy(set(), {"h"}))
    assert not res and res.violations[0].startswith("(ii)")


def test_syntactic_low_from_high():
    res = check_syntactic_pc(parse_program("l = h + 1;"), make_policy({"l"}, {"h"}))
    assert not res and res.violations[0].startswith("(i)")


def test_syntactic_taint_through_undeclared():
    res = check_syntactic_pc(parse_program("t = h; l = t;"), make_policy({"l"}, {"h"}))
    assert not res


def test_ternary_is_not_a_branch():
    assert check_syntactic_pc(parse_program("r = (h ? a : b);"), make_policy({"a", "b"}, {"h", "r"}))


def _small_domain(p):
    from scdeclass.lang import input_vars

    dom = {}
    for v in input_vars(p):
        dom[v] = Values(((0, 1, 2), (2, 0, 1))) if v == "arr" else Interval(0, 2)
    return dom


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_syntactic_check_is_sound(seed):
    rng = random.Random(seed)
    p = ProgramGen(rng, max_depth=3).program()
    dom = _small_domain(p)
    inputs = sorted(dom)
    low = {v for v in inputs if rng.random() < 0.5}
    high = set(inputs) - low
    # some written variables become low so condition (i) has something to check
    for v in sorted(written_vars(p) - set(inputs)):
        if rng.random() < 0.4:
            low.add(v)
    pol = make_policy(low, high)
    if not check_syntactic_pc(p, pol):
        return
    v = check_pc(p, pol, DomainSpec(dom, budget=20_000))
    assert v.status in ("SECURE", "FAULT"), v.counterexample
