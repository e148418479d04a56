import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scdeclass.corpus import load_corpus
from scdeclass.lang import (
    ArrayAssign,
    Assign,
    BinOp,
    If,
    Index,
    Lit,
    ParseError,
    Program,
    Seq,
    Skip,
    Ternary,
    Var,
    While,
    all_vars,
    equal_modulo_seq,
    flatten,
    input_vars,
    is_unnested,
    make_policy,
    parse_expr,
    parse_program,
    pretty_print,
    read_vars,
    seq,
    validate_policy,
    written_vars,
)
from scdeclass.lang.policy import PolicyError

from .gen import ProgramGen

CORPUS = load_corpus()


def prog(name):
    return CORPUS[name].program


# -- parsing ------------------------------------------------------------------


def test_single_assignment():
    assert parse_program("r = 1;").body == Assign("r", Lit(1))


def test_modexp1_loop_contains_conditional():
    p = prog("modexp1")
    loops = [c for c in flatten(p.body) if isinstance(c, While)]
    assert len(loops) == 1
    assert any(isinstance(c, If) for c in flatten(loops[0].body))


def test_ternary_operands():
    p = parse_program("r = (a ? x : r);")
    assert p.body == Assign("r", Ternary(Var("a"), Var("x"), Var("r")))


def test_ternary_rejects_compound_condition():
    with pytest.raises(ParseError):
        parse_program("r = (a + b) ? x : y;")


def test_ternary_rejects_compound_branch():
    with pytest.raises(ParseError):
        parse_program("r = a ? x + 1 : y;")


def test_array_assignment_rejects_compound_index():
    with pytest.raises(ParseError) as info:
        parse_program("skip;\nd[i + 1] = 0;")
    assert info.value.line == 2


def test_array_assignment_forms():
    assert parse_program("a[i] = 3;").body == ArrayAssign("a", Var("i"), Lit(3))
    assert parse_program("R[0] = 1;").body == ArrayAssign("R", Lit(0), Lit(1))


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_program("x = 1;\n  y = ;")
    assert (info.value.line, info.value.col) == (2, 7)


def test_unknown_character():
    with pytest.raises(ParseError):
        parse_program("x = 1 $ 2;")


def test_reserved_identifiers():
    with pytest.raises(ParseError):
        parse_program("x__2 = 1;")
    assert parse_program("x__2 = 1;", allow_reserved=True).body == Assign("x__2", Lit(1))


def test_keyword_operators_and_sugar():
    p = parse_program("k = k xor d[i]; a = b mod 3; c = a and b; c = a or b;")
    ops = [c.expr.op for c in flatten(p.body)]
    assert ops == ["^", "%", "&&", "||"]
    assert parse_program("h += 1;").body == Assign("h", BinOp("+", Var("h"), Lit(1)))
    assert parse_program("a *= 2;").body == Assign("a", BinOp("*", Var("a"), Lit(2)))
    assert parse_program("i--;").body == Assign("i", BinOp("-", Var("i"), Lit(1)))
    assert parse_program("t++;").body == Assign("t", BinOp("+", Var("t"), Lit(1)))


def test_unary_operators():
    assert parse_expr("!s") == BinOp("==", Var("s"), Lit(0))
    assert parse_expr("-3") == Lit(-3)
    assert parse_expr("-x") == BinOp("-", Lit(0), Var("x"))


def test_precedence():
    assert parse_expr("a + b * c") == BinOp("+", Var("a"), BinOp("*", Var("b"), Var("c")))
    assert parse_expr("a - b - c") == BinOp("-", BinOp("-", Var("a"), Var("b")), Var("c"))
    assert parse_expr("s ^ d[i] ^ (d[j] & (k % 2))").op == "^"
    assert parse_expr("a == 1 && b < 2").op == "&&"


def test_comments_skip_and_missing_else():
    p = parse_program("// hello\nskip; ; if (x) { y = 1; }\n")
    assert If(Var("x"), Assign("y", Lit(1)), Skip()) in flatten(p.body)


# -- printing -------------------------------------------------------------------


def test_print_skip():
    assert pretty_print(Program(Skip())) == "skip;\n"


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_corpus_round_trip(name):
    p = prog(name)
    text = pretty_print(p)
    again = parse_program(text, allow_reserved=True)
    assert equal_modulo_seq(again, p)
    assert pretty_print(again) == text


def test_manifest_parts_round_trip():
    d, q = CORPUS["modexp_manifest"].parts
    for part in (d, q):
        once = pretty_print(parse_program(pretty_print(part)))
        assert pretty_print(parse_program(once)) == once


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_round_trip(seed):
    p = ProgramGen(random.Random(seed), wild_loops=True).program()
    again = parse_program(pretty_print(p))
    assert equal_modulo_seq(again, p)


def test_regrouping_is_invisible():
    a, b, c = Assign("a", Lit(1)), Assign("b", Lit(2)), Assign("c", Lit(3))
    left = Program(Seq(Seq(a, b), c))
    right = Program(Seq(a, Seq(b, c)))
    assert equal_modulo_seq(left, right)
    assert pretty_print(left) == pretty_print(right)


# -- static queries -------------------------------------------------------------


def test_hamming_if_vars():
    p = prog("hamming_if")
    assert written_vars(p) == {"h", "i"}
    assert read_vars(p) >= {"m", "d", "i", "h"}


def test_modexp2_written():
    assert written_vars(prog("modexp2")) == {"r", "i", "k"}


def test_skip_vars():
    assert read_vars(Program(Skip())) == set() and written_vars(Program(Skip())) == set()


def test_input_vars():
    assert input_vars(prog("modexp1")) == {"m", "d", "x"}
    assert input_vars(parse_program("if (c) { y = 1; } else { z = 2; } w = y;")) == {"c", "y"}
    assert input_vars(parse_program("while (c) { y = 1; c = 0; } w = y;")) == {"c", "y"}
    assert input_vars(parse_program("a[0] = 1;")) == {"a"}


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_var_set_is_read_union_written(name):
    p = prog(name)
    assert all_vars(p) == read_vars(p) | written_vars(p)
    assert set(p.var_order) == all_vars(p)


def test_is_unnested_examples():
    assert is_unnested(prog("modexp2"))
    assert not is_unnested(prog("modexp1"))
    assert is_unnested(Program(Skip()))


def _branch_under_loop(c, in_loop=False):
    if isinstance(c, Seq):
        return _branch_under_loop(c.first, in_loop) or _branch_under_loop(c.second, in_loop)
    if isinstance(c, If):
        return in_loop or _branch_under_loop(c.then, in_loop) or _branch_under_loop(c.orelse, in_loop)
    if isinstance(c, While):
        return in_loop or _branch_under_loop(c.body, True)
    return False


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_is_unnested_matches_brute_force(seed):
    p = ProgramGen(random.Random(seed), wild_loops=True).program()
    assert is_unnested(p) == (not _branch_under_loop(p.body))


# -- policies -----------------------------------------------------------------------


def test_declassifier_sharing_variables_rejected():
    pol = make_policy({"m"}, {"x", "d"}, prog("hamming_if"))
    with pytest.raises(PolicyError) as info:
        validate_policy(prog("modexp2"), pol)
    assert any("i" in e and "occurring" in e for e in info.value.errors)


def test_renamed_declassifier_accepted():
    pol = make_policy({"m"}, {"x", "d"}, prog("hamming_ternary"))
    checked = validate_policy(prog("modexp2"), pol)
    assert pol.released == {"hamming", "hd_i"}
    assert checked.low == {"m", "hamming", "hd_i"}


def test_empty_program_policy():
    assert validate_policy(Program(Skip()), make_policy()).low == frozenset()


def test_policy_errors():
    p = parse_program("l = h + u;")
    with pytest.raises(PolicyError) as info:
        validate_policy(p, make_policy({"h"}, {"h"}))
    msgs = " ".join(info.value.errors)
    assert "both low and high" in msgs and "undeclared" in msgs and "u" in msgs


def test_released_declared_high_rejected():
    d = parse_program("w = s;")
    with pytest.raises(PolicyError):
        validate_policy(parse_program("l = 1;"), make_policy({"l"}, {"s", "w"}, d))


def test_undeclared_declassifier_input_rejected():
    d = parse_program("w = q;")
    with pytest.raises(PolicyError):
        validate_policy(parse_program("l = 1;"), make_policy({"l"}, set(), d))


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_validate_policy_by_perturbation(seed):
    rng = random.Random(seed)
    p = ProgramGen(rng).program()
    inputs = sorted(input_vars(p))
    low = {v for v in inputs if rng.random() < 0.5}
    good = make_policy(low, set(inputs) - low)
    validate_policy(p, good)
    if inputs:
        v = rng.choice(inputs)
        with pytest.raises(PolicyError):
            validate_policy(p, make_policy(good.low - {v}, good.high - {v}))
        with pytest.raises(PolicyError):
            validate_policy(p, make_policy(good.low | {v}, good.high | {v}))
    victim = rng.choice(sorted(all_vars(p)))
    with pytest.raises(PolicyError):
        validate_policy(p, make_policy(good.low, good.high, Program(Assign(victim, Lit(0)))))


def test_index_expression_allowed_on_read():
    assert parse_expr("R[k * s]") == Index("R", BinOp("*", Var("k"), Var("s")))


def test_seq_helper():
    assert seq() == Skip()
    a = Assign("a", Lit(1))
    assert seq(a) == a
