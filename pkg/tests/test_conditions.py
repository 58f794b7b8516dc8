"""Predicate language: parsing, printing, evaluation."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eventrca import Event, EventType, PropertyKind, PropertySpec
from eventrca.conditions import (
    And,
    Comparison,
    Literal,
    Not,
    Or,
    PropertyRef,
    check_condition_refs,
    condition_to_text,
    eval_condition,
    parse_condition,
)
from eventrca.errors import (
    BadConditionReference,
    ConditionSyntaxError,
    MissingTargetEvent,
)

from .oracles import eval_condition_oracle


def test_parse_equality_of_refs():
    expr = parse_condition("source.DataCenter == target.DataCenter")
    assert expr == Comparison(
        PropertyRef("source", "DataCenter"), "==", PropertyRef("target", "DataCenter")
    )


def test_parse_not_over_ordering():
    expr = parse_condition("NOT (source.count > 5)")
    assert expr == Not(Comparison(PropertyRef("source", "count"), ">", Literal(5)))


def test_precedence_not_and_or():
    expr = parse_condition("NOT source.a == 1 AND source.b == 2 OR source.c == 3")
    # ((NOT a==1) AND b==2) OR c==3
    assert isinstance(expr, Or)
    assert isinstance(expr.left, And)
    assert isinstance(expr.left.left, Not)


def test_parentheses_override_precedence():
    expr = parse_condition("source.a == 1 AND (source.b == 2 OR source.c == 3)")
    assert isinstance(expr, And)
    assert isinstance(expr.right, Or)


def test_literals():
    expr = parse_condition('source.name == "DC \\"1\\"" OR source.x == -2.5 OR source.ok == true')
    text = condition_to_text(expr)
    assert parse_condition(text) == expr


@pytest.mark.parametrize(
    "bad, position",
    [
        ("source.a ==", 11),
        ("== 5", 0),
        ("source.a == 5 AND", 17),
        ("(source.a == 5", 14),
        ("source.a == 5 %", 14),
    ],
)
def test_syntax_error_has_position(bad, position):
    with pytest.raises(ConditionSyntaxError) as err:
        parse_condition(bad)
    assert err.value.position == position


# -- round-trip property -------------------------------------------------------

_names = st.sampled_from(["a", "b", "count", "DataCenter"])
_operands = st.one_of(
    st.builds(PropertyRef, st.sampled_from(["source", "target"]), _names),
    st.builds(Literal, st.integers(-50, 50)),
    st.builds(Literal, st.floats(-10, 10, allow_nan=False).map(lambda f: round(f, 3))),
    st.builds(Literal, st.booleans()),
    st.builds(Literal, st.text(alphabet="abc \"\\'", max_size=6)),
)
_comparisons = st.builds(
    Comparison, _operands, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), _operands
)
_expressions = st.recursive(
    _comparisons,
    lambda children: st.one_of(
        st.builds(Not, children),
        st.builds(And, children, children),
        st.builds(Or, children, children),
    ),
    max_leaves=12,
)


@settings(max_examples=300, deadline=None)
@given(_expressions)
def test_print_parse_round_trip(expr):
    assert parse_condition(condition_to_text(expr)) == expr


# -- evaluation ----------------------------------------------------------------

def _latency(service, dc):
    return Event.of(service, "Latency Spike", 0, {"DataCenter": dc})


def test_same_datacenter_true():
    expr = parse_condition("source.DataCenter == target.DataCenter")
    assert eval_condition(expr, _latency("C", "DC-1"), _latency("E", "DC-1")) is True


def test_cross_datacenter_false():
    expr = parse_condition("source.DataCenter == target.DataCenter")
    assert eval_condition(expr, _latency("C", "DC-1"), _latency("D", "DC-2")) is False


def test_missing_target_event_raises():
    expr = parse_condition("source.DataCenter == target.DataCenter")
    with pytest.raises(MissingTargetEvent):
        eval_condition(expr, _latency("C", "DC-1"), None)


def test_mismatched_kinds_are_false_with_diagnostic():
    source = Event.of("s", "T", 0, {"a": "text"})
    target = Event.of("t", "T", 0, {"a": 5})
    diagnostics = []
    expr = parse_condition("source.a == target.a")
    assert eval_condition(expr, source, target, diagnostics) is False
    assert diagnostics
    # != across kinds is also false: mismatched comparisons never hold
    assert eval_condition(parse_condition("source.a != target.a"), source, target) is False


def test_ordering_on_text_is_false():
    source = Event.of("s", "T", 0, {"a": "zzz"})
    diagnostics = []
    assert eval_condition(parse_condition('source.a > "aaa"'), source, None, diagnostics) is False
    assert diagnostics


def test_missing_property_is_false():
    source = Event.of("s", "T", 0, {})
    assert eval_condition(parse_condition("source.ghost == 1"), source) is False


def test_int_and_real_compare_numerically():
    source = Event.of("s", "T", 0, {"a": 5})
    assert eval_condition(parse_condition("source.a == 5.0"), source) is True
    assert eval_condition(parse_condition("source.a < 5.5"), source) is True


def test_compound_matches_truth_table_oracle():
    expr = parse_condition(
        "source.p == true AND (source.q == true OR NOT source.r == true)"
    )
    for p, q, r in itertools.product([False, True], repeat=3):
        event = Event.of("s", "T", 0, {"p": p, "q": q, "r": r})
        expected = eval_condition_oracle(expr, {"source": {"p": p, "q": q, "r": r}, "target": {}})
        assert eval_condition(expr, event) is expected
        assert expected == (p and (q or not r))


@settings(max_examples=200, deadline=None)
@given(_expressions, st.data())
def test_random_expressions_match_oracle(expr, data):
    values = {
        name: data.draw(
            st.one_of(
                st.integers(-5, 5),
                st.booleans(),
                st.sampled_from(["abc", "a", "zzz"]),
                st.floats(-5, 5, allow_nan=False),
            )
        )
        for name in ["a", "b", "count", "DataCenter"]
    }
    source = Event.of("s", "T", 0, values)
    target = Event.of("t", "T", 0, values)
    env = {"source": dict(values), "target": dict(values)}
    assert eval_condition(expr, source, target) == eval_condition_oracle(expr, env)


@settings(max_examples=100, deadline=None)
@given(_expressions.filter(lambda e: isinstance(e, (And, Or))))
def test_and_or_operand_order_irrelevant(expr):
    values = {"a": 1, "b": 2, "count": 3, "DataCenter": "DC-1"}
    source = Event.of("s", "T", 0, values)
    target = Event.of("t", "T", 0, values)
    swapped = type(expr)(expr.right, expr.left)
    assert eval_condition(expr, source, target) == eval_condition(swapped, source, target)


# -- static reference checking ---------------------------------------------------

def _type_with(name, *specs):
    return EventType(name, 60, tuple(PropertySpec(n, k) for n, k in specs))


def test_check_refs_accepts_valid():
    source_type = _type_with("S", ("DataCenter", PropertyKind.TEXT))
    target_type = _type_with("T", ("DataCenter", PropertyKind.TEXT))
    check_condition_refs(
        parse_condition("source.DataCenter == target.DataCenter"), source_type, target_type
    )


def test_check_refs_unknown_property():
    source_type = _type_with("S")
    with pytest.raises(BadConditionReference):
        check_condition_refs(parse_condition("source.nope == 1"), source_type, None)


def test_check_refs_target_forbidden_for_dynamic():
    source_type = _type_with("S", ("x", PropertyKind.INTEGER))
    with pytest.raises(BadConditionReference):
        check_condition_refs(parse_condition("target.x == 1"), source_type, None)


def test_check_refs_ordering_requires_numeric():
    source_type = _type_with("S", ("name", PropertyKind.TEXT))
    with pytest.raises(BadConditionReference):
        check_condition_refs(parse_condition('source.name > "a"'), source_type, None)
