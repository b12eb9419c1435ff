from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from apoplan.fuzz import generate_theory
from apoplan.theory import (
    ApoError, GroundingError, ParseError, close_initial_formula, ground_theory,
    negate, parse_theory, serialize_theory, validate_theory,
)


def test_tiger_shape(tiger):
    assert sorted(tiger.fluents) == ["htl", "tl"]
    assert len(tiger.actions) == 3
    assert sum(len(a.outcomes) for a in tiger.actions) == 8
    assert tiger.discount == Fraction(9, 10)
    listen = tiger.action("listen")
    assert listen.kind == "sensing"
    assert [o.prob for o in listen.outcomes] == [
        Fraction(17, 20), Fraction(3, 20), Fraction(17, 20), Fraction(3, 20)]
    assert all(o.reward == -1 for o in listen.outcomes)
    openL = tiger.action("openL")
    assert openL.kind == "non-sensing"
    assert {o.reward for o in openL.outcomes} == {-100, 10}


def test_tiger_validates(tiger):
    assert validate_theory(tiger)


def test_roundtrip_tiger(tiger):
    assert parse_theory(serialize_theory(tiger)) == tiger


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_theory("fluent a\nb.")
    assert e.value.line is not None


def test_inconsistent_effect_rejected():
    with pytest.raises(ApoError):
        parse_theory(
            "fluent tl.\ninitially {tl}: 1.\nexecutable a if {}.\n"
            "action a causes {tl, -tl}: 1: 0 if {}.\ndiscount 1/2.\n")


def test_duplicate_declaration_rejected():
    with pytest.raises(ApoError):
        parse_theory(
            "fluent a.\nfluent a.\ninitially {a}: 1.\nexecutable b if {}.\n"
            "action b causes {}: 1: 0 if {}.\ndiscount 1/2.\n")


def test_validation_bad_probability_sum(tiger_text):
    bad = tiger_text.replace("17/20", "4/5", 1)
    report = validate_theory(parse_theory(bad))
    assert not report
    assert any("sum" in v.message for v in report.violations)


def test_validation_discount_out_of_range(tiger_text):
    bad = tiger_text.replace("discount 9/10.", "discount 1.")
    report = validate_theory(parse_theory(bad))
    assert not report
    assert any("discount" in v.message for v in report.violations)


def test_validation_report_json(tiger_text):
    bad = tiger_text.replace("discount 9/10.", "discount 2.")
    rows = validate_theory(parse_theory(bad)).to_json()
    assert rows and set(rows[0]) == {"decl", "rule", "message"}


def test_closure_completes_initial_formulas(tiger):
    for entry in tiger.initial:
        closed = close_initial_formula(tiger, entry.formula)
        assert {l.lstrip("-") for l in closed} == set(tiger.fluents)
        assert not any(negate(l) in closed for l in closed)


def test_ground_identity_on_ground_theory(tiger):
    assert ground_theory(tiger) == tiger


VARIABLE_THEORY = """
fluent open(left), open(right).
domain D = {left, right}.
initially {-open(left), -open(right)}: 1.
executable push(D) if {}.
action push(D) causes
    {open(D)}: 1: 1 if {-open(D)} ;
    {}: 1: 0 if {open(D)}.
discount 1/2.
"""


def test_grounding_expands_domains():
    grounded = ground_theory(parse_theory(VARIABLE_THEORY))
    assert sorted(a.name for a in grounded.actions) == ["push(left)", "push(right)"]
    left = grounded.action("push(left)")
    assert left.outcomes[0].effect == frozenset({"open(left)"})
    assert validate_theory(grounded)


def test_grounding_undeclared_variable():
    text = ("fluent a.\ninitially {a}: 1.\nexecutable b(X) if {}.\n"
            "action b(X) causes {a}: 1: 0 if {}.\ndiscount 1/2.\n")
    with pytest.raises(GroundingError, match="no domain for X"):
        ground_theory(parse_theory(text))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_roundtrip_fuzzed(seed):
    theory = generate_theory(seed)
    assert parse_theory(serialize_theory(theory)) == theory
