import itertools
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from apoplan.nplp import (
    AProd, AVar, BLit, Const, INDEPENDENCE, MAX, NplpError, NpProgram, NpRule,
    ONE, enumerate_answer_sets, least_model, reduct, render_atom, satisfies,
    satisfies_program,
)
from apoplan.nplp_text import NplpParseError, format_program, parse_program


def rule(head, body=(), head_ann=ONE):
    return NpRule(head=head, head_ann=head_ann,
                  body=tuple(BLit(atom=a) if isinstance(a, tuple) else a
                             for a in body))


def test_least_model_facts_and_chain():
    prog = NpProgram(rules=(
        rule(("a",), head_ann=Const(Fraction(1, 2))),
        NpRule(head=("b",),
               body=(BLit(atom=("a",), ann=Const(Fraction(1, 2))),)),
        NpRule(head=("c",), body=(BLit(atom=("a",)),)),  # needs h(a) >= 1
    ))
    h = least_model(prog)
    assert h == {("a",): Fraction(1, 2), ("b",): Fraction(1)}


def test_least_model_max_strategy_combines():
    prog = NpProgram(rules=(
        rule(("a",), head_ann=Const(Fraction(1, 2))),
        rule(("a",), head_ann=Const(Fraction(1, 4))),
    ))
    assert least_model(prog)[("a",)] == Fraction(1, 2)


def test_independence_strategy():
    prog = NpProgram(rules=(
        rule(("a",), head_ann=Const(Fraction(1, 2))),
        rule(("a",), head_ann=Const(Fraction(1, 2))),
    ), strategies=(("a", "independence"),))
    assert least_model(prog)[("a",)] == Fraction(3, 4)


def test_annotation_variable_binds_exactly():
    # U is bound to h(state(0)) itself, so the head annotation is 1/2 * 1/2
    prog = NpProgram(rules=(
        rule(("state", 0), head_ann=Const(Fraction(1, 2))),
        NpRule(head=("state", 1), head_ann=AProd((Const(Fraction(1, 2)), AVar("U"))),
               body=(BLit(atom=("state", 0), ann=AVar("U")),)),
    ))
    assert least_model(prog)[("state", 1)] == Fraction(1, 4)


def test_body_annotation_threshold():
    prog = NpProgram(rules=(
        rule(("a",), head_ann=Const(Fraction(1, 2))),
        NpRule(head=("b",), body=(BLit(atom=("a",), ann=Const(Fraction(3, 4))),)),
    ))
    assert ("b",) not in least_model(prog)


def test_annotation_out_of_range_rejected():
    prog = NpProgram(rules=(
        rule(("a",), head_ann=Const(Fraction(3, 2))),
    ))
    with pytest.raises(NplpError, match="outside"):
        least_model(prog)


def test_satisfies_semantics():
    h = {("a",): Fraction(1, 2)}
    assert satisfies(h, ("a",), Fraction(1, 2))
    assert not satisfies(h, ("a",), Fraction(3, 4))
    assert satisfies(h, ("a",), Fraction(3, 4), negated=True)
    assert not satisfies(h, ("a",), Fraction(1, 2), negated=True)


def test_reduct_strips_negation():
    prog = NpProgram(rules=(
        NpRule(head=("a",), body=(BLit(atom=("b",), neg=True),)),
        rule(("b",), [("c",)]),
    ))
    red = reduct(prog, {})
    assert all(not b.neg for r in red.rules for b in r.body)
    assert len(red.rules) == 2
    # with b fully true, the negated rule is deleted
    assert len(reduct(prog, {("b",): Fraction(1)}).rules) == 1


def test_even_negative_loop_two_answer_sets():
    prog = NpProgram(rules=(
        NpRule(head=("a",), body=(BLit(atom=("b",), neg=True),)),
        NpRule(head=("b",), body=(BLit(atom=("a",), neg=True),)),
    ))
    models = enumerate_answer_sets(prog)
    assert [sorted(map(render_atom, h)) for h in models] == [["a"], ["b"]]


def test_odd_negative_loop_no_answer_set():
    prog = NpProgram(rules=(
        NpRule(head=("a",), body=(BLit(atom=("a",), neg=True),)),
    ))
    assert enumerate_answer_sets(prog) == []


def test_stratified_negation_single_answer_set():
    prog = NpProgram(rules=(
        rule(("a",)),
        NpRule(head=("b",), body=(BLit(atom=("a",), neg=True),)),
        NpRule(head=("c",), body=(BLit(atom=("b",), neg=True),)),
    ))
    models = enumerate_answer_sets(prog)
    assert len(models) == 1
    assert sorted(map(render_atom, models[0])) == ["a", "c"]


def test_non_boolean_negation_rejected():
    prog = NpProgram(rules=(
        NpRule(head=("a",),
               body=(BLit(atom=("b",), ann=Const(Fraction(1, 2)), neg=True),)),
    ))
    with pytest.raises(NplpError, match="boolean-negation"):
        enumerate_answer_sets(prog)


def test_answer_sets_satisfy_program():
    prog = NpProgram(rules=(
        rule(("p",), head_ann=Const(Fraction(1, 2))),
        NpRule(head=("a",), body=(BLit(atom=("b",), neg=True),)),
        NpRule(head=("b",), body=(BLit(atom=("a",), neg=True),)),
        rule(("q",), [("a",), ("p",)], head_ann=Const(Fraction(1, 3))),
    ))
    models = enumerate_answer_sets(prog)
    assert len(models) == 2
    for h in models:
        assert satisfies_program(h, reduct(prog, h))


# ---------------------------------------------------------------------------
# property tests


_VALUES = [Fraction(0), Fraction(1, 2), Fraction(1)]
_ATOMS = [("a",), ("b",), ("c",), ("d",)]


@st.composite
def positive_programs(draw):
    n_rules = draw(st.integers(min_value=1, max_value=6))
    rules = []
    for _ in range(n_rules):
        head = draw(st.sampled_from(_ATOMS))
        ann = Const(draw(st.sampled_from(_VALUES[1:])))
        body_atoms = draw(st.lists(st.sampled_from(_ATOMS), max_size=2, unique=True))
        body = tuple(
            BLit(atom=a, ann=Const(draw(st.sampled_from(_VALUES[1:]))))
            for a in body_atoms)
        rules.append(NpRule(head=head, head_ann=ann, body=body))
    return NpProgram(rules=tuple(rules))


@settings(max_examples=60, deadline=None)
@given(positive_programs())
def test_least_model_is_minimal_model(prog):
    h = least_model(prog)
    assert satisfies_program(h, prog)
    # exhaustive lattice search: every satisfying assignment dominates h
    for combo in itertools.product(_VALUES, repeat=len(_ATOMS)):
        g = {a: v for a, v in zip(_ATOMS, combo) if v > 0}
        if satisfies_program(g, prog):
            for atom, v in h.items():
                assert g.get(atom, Fraction(0)) >= v


@settings(max_examples=40, deadline=None)
@given(positive_programs())
def test_reduct_identity_on_negation_free(prog):
    assert reduct(prog, {}) == prog
    h = least_model(prog)
    assert reduct(prog, h) == prog


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([MAX, INDEPENDENCE]),
       st.sampled_from(_VALUES), st.sampled_from(_VALUES), st.sampled_from(_VALUES))
def test_strategies_commutative_associative_monotone(strategy, a, b, c):
    compose = strategy.compose
    assert compose(a, b) == compose(b, a)
    assert compose(a, compose(b, c)) == compose(compose(a, b), c)
    assert compose(a, Fraction(0)) == a
    assert 0 <= compose(a, b) <= 1
    assert compose(a, b) >= max(a, b) if strategy is INDEPENDENCE else True


# ---------------------------------------------------------------------------
# textual format


def test_text_roundtrip_tiger_program(tiger):
    from apoplan.compiler import compile_theory
    prog = compile_theory(tiger, 2)
    parsed = parse_program(format_program(prog))
    assert parsed.rules == tuple(replace(r, schema=None) for r in prog.rules)
    assert parsed.default_strategy == prog.default_strategy


def test_text_roundtrip_strategies():
    prog = NpProgram(rules=(rule(("a",)),),
                     strategies=(("state", "independence"),),
                     default_strategy="independence")
    parsed = parse_program(format_program(prog))
    assert parsed.strategies == prog.strategies
    assert parsed.default_strategy == "independence"


def test_text_parse_error_reports_line():
    with pytest.raises(NplpParseError, match="line 2"):
        parse_program("a.\nb <- c\n")


def test_format_is_deterministic(tiger):
    from apoplan.compiler import compile_theory
    assert format_program(compile_theory(tiger, 1)) == \
        format_program(compile_theory(tiger, 1))
