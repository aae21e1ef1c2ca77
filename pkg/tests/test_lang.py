import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from progen import random_program, random_rename, random_reordering, true_dependencies
from taskgen import REFERENCE_PROGRAMS, color_swap_task, enclosure_task
from vimrl.interpreter import ExecutionError, Interpreter, RuntimeTypeError
from vimrl.lang import (
    Call,
    Instruction,
    Num,
    OperationSignature,
    Program,
    Ref,
    VimrlSyntaxError,
    VimrlTypeError,
    canonical_text,
    canonicalize,
    check_well_formed,
    dependency_graph,
    flatten,
    parse,
    print_program,
    program_size,
    type_check,
)
from vimrl.ops import default_registry

REG = default_registry()


def test_parse_attract_program():
    p = parse("output = attract(input)")
    assert p == Program((Instruction("output", Call("attract", (Ref("input"),))),))
    assert p.instructions[0].call.args[0].kind == "identifier_ref"


def test_parse_empty():
    assert parse("") == Program()
    assert print_program(Program()) == ""


def test_parse_nested_and_negative():
    ins = parse("x = f(g(input), -3)").instructions[0]
    nested, lit = ins.call.args
    assert nested.kind == "nested_operation" and nested == Call("g", (Ref("input"),))
    assert lit.kind == "number_literal" and lit.value == -3


def test_parse_bare_operation_and_comments():
    p = parse("# a comment\n\n  trim(input)  \n")
    assert p.instructions == (Instruction(None, Call("trim", (Ref("input"),))),)


def test_print_normalizes_spacing():
    assert print_program(parse("output=attract( input )")) == "output = attract(input)"


def test_enclosure_program_prints_three_lines_in_order():
    text = REFERENCE_PROGRAMS["enclosure"]
    assert print_program(parse(text)) == text
    assert program_size(parse(text)) == 3
    assert program_size(parse(REFERENCE_PROGRAMS["attract"])) == 1
    assert program_size(Program()) == 0


@pytest.mark.parametrize(
    "src, line, col, production",
    [
        ("output = ", 1, 9, "assignment"),
        ("x = f(", 1, 7, "argument"),
        ("x = f(a b)", 1, 9, "operation"),
        ("ok = f(a)\n1x = f(a)", 2, 1, "instruction"),
        ("x = f()", 1, 7, "argument"),
        ("x = f(a) y", 1, 10, "instruction"),
        ("x = f(a$)", 1, 8, "instruction"),
    ],
)
def test_syntax_errors_locate_problem(src, line, col, production):
    with pytest.raises(VimrlSyntaxError) as err:
        parse(src)
    assert (err.value.line, err.value.column, err.value.production) == (line, col, production)


def test_identifiers_case_sensitive():
    p = parse("A = trim(input)\na = trim(A)")
    assert p.defined() == ["A", "a"]


def test_type_check_examples():
    rep = type_check(parse("output = attract(input)"), REG)
    assert rep.final_env["output"] == "image"
    with pytest.raises(VimrlTypeError) as err:
        type_check(parse("output = draw(input, enclosed)"), REG)
    assert (err.value.index, err.value.kind) == (0, "undefined_variable")
    with pytest.raises(VimrlTypeError) as err:
        type_check(parse("x = trim(5)"), REG)
    assert err.value.kind == "type_mismatch"
    with pytest.raises(VimrlTypeError) as err:
        type_check(parse("x = trim(input)\ny = nope(x)"), REG)
    assert (err.value.index, err.value.kind) == (1, "unknown_operation")
    with pytest.raises(VimrlTypeError) as err:
        type_check(parse("x = trim(input, input)"), REG)
    assert err.value.kind == "arity"


def test_type_check_literals_and_discards():
    rep = type_check(parse("fill_holes(input, 4)\nx = scale_up(input, 2)"), REG)
    assert rep.discarded == (0,)
    with pytest.raises(VimrlTypeError):
        type_check(parse("x = fill_holes(input, 12)"), REG)


def test_type_check_reports_source_index_for_nested_calls():
    with pytest.raises(VimrlTypeError) as err:
        type_check(parse("a = trim(input)\nb = flip_h(trim(5))"), REG)
    assert err.value.index == 1


def test_signature_rules():
    with pytest.raises(ValueError):
        OperationSignature("h", ("image", "image"), "image", "high")
    with pytest.raises(ValueError):
        OperationSignature("z", (), "image", "low")


def test_well_formedness():
    check_well_formed(parse("a = trim(input)\nb = flip_h(a)"))
    with pytest.raises(VimrlTypeError):
        check_well_formed(parse("b = flip_h(a)\na = trim(input)"))


def test_flatten_hoists_nested_calls():
    p = flatten(parse("x = overlay(flip_h(input), trim(input))"))
    assert print_program(p) == "tmp1 = flip_h(input)\ntmp2 = trim(input)\nx = overlay(tmp1, tmp2)"


def test_canonicalize_examples():
    a = parse("a = flip_h(input)\nb = flip_v(input)\noutput = overlay(a, b)")
    b = parse("b = flip_v(input)\na = flip_h(input)\noutput = overlay(a, b)")
    assert canonicalize(a) == canonicalize(b)
    single = parse("output = trim(input)")
    assert canonicalize(single) == single
    chain = parse("a = trim(input)\noutput = flip_h(a)")
    assert canonicalize(chain) == chain


def test_dependency_graph_covers_background():
    p = parse("a = trim(input)\nb = set_background(3)\nc = flip_h(input)")
    preds = dependency_graph(p)
    assert 0 in preds[1] and 1 in preds[2]


def test_canonical_text_collapses_renaming():
    a = parse("p = flip_h(input)\nq = trim(p)")
    b = parse("zz = flip_h(input)\nk = trim(zz)")
    assert canonical_text(a) == canonical_text(b)


def _all_valid_orders(p):
    preds = true_dependencies(p)
    n = len(preds)
    for perm in itertools.permutations(range(n)):
        pos = {j: k for k, j in enumerate(perm)}
        if all(pos[i] < pos[j] for j in range(n) for i in preds[j]):
            yield Program(tuple(p.instructions[j] for j in perm))


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(1, 4))
def test_exhaustive_permutations_share_one_canonical_form(rng, n):
    p = random_program(rng, REG, n)
    forms = {canonical_text(q) for q in _all_valid_orders(p)}
    assert len(forms) == 1


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(0, 6))
def test_round_trip_and_idempotence(rng, n):
    p = random_program(rng, REG, n, nest=0.2)
    assert parse(print_program(p)) == p
    c = canonicalize(p)
    assert canonicalize(c) == c
    assert canonical_text(random_rename(random_reordering(flatten(p), rng), rng)) == canonical_text(p)


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(1, 4), st.sampled_from([color_swap_task, enclosure_task]))
def test_canonical_form_executes_identically(rng, n, make_task):
    task = make_task()
    p = random_program(rng, REG, n)
    q = random_reordering(p, rng)
    interp = Interpreter(task, REG)
    for g in task.test_inputs + tuple(i for i, _ in task.train):
        results = []
        for prog in (p, q, canonicalize(p)):
            try:
                results.append(interp.execute(prog, g)[0])
            except ExecutionError:
                results.append("error")
        assert results[0] == results[1] == results[2]


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(1, 4))
def test_accepted_programs_never_mismatch_tags(rng, n):
    task = enclosure_task()
    p = random_program(rng, REG, n)
    type_check(p, REG)
    interp = Interpreter(task, REG)
    for g in task.test_inputs + (task.train[0][0],):
        try:
            interp.execute(p, g)
        except RuntimeTypeError:
            raise
        except ExecutionError:
            pass


def test_numbers_print_and_parse_back():
    p = Program((Instruction("x", Call("scale_up", (Ref("input"), Num(-2)))),))
    assert parse(print_program(p)) == p


def test_random_program_generator_is_type_correct():
    rng = random.Random(0)
    for _ in range(50):
        type_check(random_program(rng, REG, 4, nest=0.3), REG)
