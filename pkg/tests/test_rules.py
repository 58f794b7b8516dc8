"""Rule parsing, the management graphs, and corpus validation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eventrca import (
    EngineConfig,
    EventType,
    EventTypeCatalog,
    Rule,
    RuleKind,
    RuleScope,
    ServiceScope,
    add_or_update_rule,
    build_rule_graphs,
    extract_rules,
    parse_rules,
    remove_rule,
    validate_rules,
)
from eventrca.errors import (
    BadConditionReference,
    BadWeight,
    ConflictingRules,
    EmptyCorpus,
    SelfLoopInSameGraph,
    UnknownEventTypeInRule,
)
from eventrca.rules import RuleGraphs, parse_rule

from .conftest import CHECKOUT_RADIUS


@pytest.fixture(scope="module")
def catalog():
    return EventTypeCatalog(
        [EventType(name, 3600) for name in ("A", "B", "C", "D")]
    )


def obj(kind="static", source="A", target="B", service="outgoing", **extra):
    base = {"kind": kind, "source": source, "target": target,
            "direction": "caused_by", "service": service}
    base.update(extra)
    return base


class TestParseRules:
    def test_outgoing_same_type_rule_is_valid(self, catalog):
        [rule] = parse_rules([obj(source="A", target="A")], catalog)
        assert rule.scope is ServiceScope.OUTGOING
        assert rule.rule_scope is RuleScope.DIFF

    def test_self_rule_on_same_type_rejected(self, catalog):
        with pytest.raises(SelfLoopInSameGraph):
            parse_rules([obj(source="A", target="A", service="self")], catalog)

    def test_dynamic_rule_with_template(self, catalog):
        [rule] = parse_rules(
            [obj(kind="dynamic", source="A", target="B", service="DB-{db_name}")], catalog
        )
        assert rule.kind is RuleKind.DYNAMIC
        assert rule.template == "DB-{db_name}"

    def test_unknown_event_type(self, catalog):
        with pytest.raises(UnknownEventTypeInRule):
            parse_rules([obj(source="Nope")], catalog)

    def test_bad_weight(self, catalog):
        with pytest.raises(BadWeight):
            parse_rules([obj(weight=0.0)], catalog)
        with pytest.raises(BadWeight):
            parse_rules([obj(weight=1.5)], catalog)

    def test_bad_condition_reference(self, catalog):
        with pytest.raises(BadConditionReference):
            parse_rules([obj(condition="source.ghost == 1")], catalog)

    def test_condition_text_canonicalized(self, catalog):
        [rule] = parse_rules([obj(condition="(1 == 1) AND (2 == 2)")], catalog)
        assert rule.condition_text == "1 == 1 AND 2 == 2"


class TestRuleGraphs:
    def test_one_self_rule_lands_in_same_graph(self, catalog):
        rules = parse_rules([obj(service="self")], catalog)
        graphs = build_rule_graphs(rules)
        assert set(graphs.same_graph) == {("A", "B")}
        assert not graphs.diff_graph

    def test_conditional_overwrites_basic_with_warning(self, catalog):
        rules = parse_rules(
            [obj(), obj(condition="1 == 1")],
            catalog,
        )
        graphs = build_rule_graphs(rules)
        assert len(graphs.warnings) == 1
        assert graphs.diff_graph[("A", "B")].conditional

    def test_two_basic_rules_conflict(self, catalog):
        with pytest.raises(ConflictingRules):
            build_rule_graphs(parse_rules([obj(), obj(service="incoming")], catalog))

    def test_two_conditional_rules_conflict(self, catalog):
        with pytest.raises(ConflictingRules):
            build_rule_graphs(
                parse_rules([obj(condition="1 == 1"), obj(condition="2 == 2")], catalog)
            )

    def test_same_and_diff_graphs_are_disjoint_keyspaces(self, catalog):
        rules = parse_rules([obj(service="self"), obj(service="outgoing")], catalog)
        graphs = build_rule_graphs(rules)  # no conflict: different scopes
        assert set(graphs.same_graph) == {("A", "B")}
        assert set(graphs.diff_graph) == {("A", "B")}

    def test_add_to_empty_no_warning(self, catalog):
        [rule] = parse_rules([obj()], catalog)
        graphs, warnings = add_or_update_rule(RuleGraphs.empty(), rule)
        assert warnings == []
        assert graphs.diff_graph[("A", "B")] is rule

    def test_add_conditional_over_basic_warns_once(self, catalog):
        basic, conditional = parse_rules([obj(), obj(condition="1 == 1")], catalog)
        graphs, _ = add_or_update_rule(RuleGraphs.empty(), basic)
        graphs, warnings = add_or_update_rule(graphs, conditional)
        assert len(warnings) == 1
        assert graphs.diff_graph[("A", "B")].conditional

    def test_add_self_loop_rejected(self, catalog):
        with pytest.raises(SelfLoopInSameGraph):
            Rule(RuleKind.STATIC, "A", "A", scope=ServiceScope.SELF)

    def test_remove_existing(self, catalog):
        [rule] = parse_rules([obj()], catalog)
        graphs, _ = add_or_update_rule(RuleGraphs.empty(), rule)
        removed = remove_rule(graphs, "A", "B", RuleScope.DIFF)
        assert not removed.diff_graph
        assert removed.warnings == ()

    def test_remove_absent_warns(self, catalog):
        removed = remove_rule(RuleGraphs.empty(), "A", "B", RuleScope.DIFF)
        assert len(removed.warnings) == 1

    def test_remove_then_extract(self, catalog):
        rules = parse_rules([obj(), obj(source="B", target="C")], catalog)
        graphs = build_rule_graphs(rules)
        graphs = remove_rule(graphs, "A", "B", RuleScope.DIFF)
        assert [r.source for r in extract_rules(graphs)] == ["B"]

    def test_extract_counts(self, catalog):
        rules = parse_rules(
            [obj(), obj(source="B", target="C"), obj(source="C", target="D", service="self")],
            catalog,
        )
        assert len(extract_rules(build_rule_graphs(rules))) == 3

    def test_extract_empty(self):
        assert extract_rules(RuleGraphs.empty()) == []

    def test_round_trip_identity(self, catalog):
        rules = parse_rules(
            [
                obj(),
                obj(source="B", target="C", condition="1 == 1"),
                obj(source="C", target="D", service="self"),
                obj(kind="dynamic", source="D", target="A", service="X-1"),
            ],
            catalog,
        )
        graphs = build_rule_graphs(rules)
        assert build_rule_graphs(extract_rules(graphs)) == graphs


_types = ["A", "B", "C", "D"]


@st.composite
def rule_sets(draw):
    """Random conflict-free rule sets over four event types."""
    catalog = EventTypeCatalog([EventType(n, 3600) for n in _types])
    keys = draw(
        st.sets(
            st.tuples(
                st.sampled_from(["same", "diff"]),
                st.sampled_from(_types),
                st.sampled_from(_types),
            ).filter(lambda k: not (k[0] == "same" and k[1] == k[2])),
            min_size=0,
            max_size=10,
        )
    )
    rules = []
    for scope, source, target in sorted(keys):
        conditional = draw(st.booleans())
        weight = draw(st.sampled_from([0.25, 0.5, 1.0]))
        spec = {
            "kind": "static",
            "source": source,
            "target": target,
            "direction": draw(st.sampled_from(["caused_by", "causes"])),
            "service": "self" if scope == "same" else draw(st.sampled_from(["outgoing", "incoming"])),
            "weight": weight,
        }
        if conditional:
            spec["condition"] = draw(st.sampled_from(["1 == 1", "2 > 1", "true == true"]))
        rules.append(parse_rule(spec, catalog))
    return rules


@settings(max_examples=120, deadline=None)
@given(rule_sets())
def test_round_trip_property(rules):
    graphs = build_rule_graphs(rules)
    assert build_rule_graphs(extract_rules(graphs)) == graphs


@settings(max_examples=60, deadline=None)
@given(rule_sets(), st.data())
def test_single_status_after_add_remove_sequences(rules, data):
    graphs = RuleGraphs.empty()
    for rule in rules:
        graphs, _ = add_or_update_rule(graphs, rule)
    for _ in range(data.draw(st.integers(0, 4))):
        source = data.draw(st.sampled_from(_types))
        target = data.draw(st.sampled_from(_types))
        scope = data.draw(st.sampled_from([RuleScope.SAME, RuleScope.DIFF]))
        graphs = remove_rule(graphs, source, target, scope)
    for graph in (graphs.same_graph, graphs.diff_graph):
        for key, rule in graph.items():
            assert key == (rule.source, rule.target)  # exactly one rule per key


class TestValidateRules:
    def test_perfect_singleton_corpus(
        self, checkout_rules, checkout_incident, checkout_catalog
    ):
        config = EngineConfig(catalog=checkout_catalog, radius=CHECKOUT_RADIUS)
        report = validate_rules(checkout_rules, [checkout_incident], config)
        assert report.total == 1
        assert report.top1 == 1.0
        assert report.ranks == (1,)

    def test_missing_rule_degrades_rank(
        self, checkout_rules, checkout_incident, checkout_catalog
    ):
        config = EngineConfig(catalog=checkout_catalog, radius=CHECKOUT_RADIUS)
        full = validate_rules(checkout_rules, [checkout_incident], config)
        without_deploy_rule = [
            r for r in checkout_rules if r.target != "Code Deployment"
        ]
        crippled = validate_rules(without_deploy_rule, [checkout_incident], config)
        assert crippled.ranks[0] is None or crippled.ranks[0] > full.ranks[0]
        assert crippled.top1 == 0.0

    def test_empty_corpus(self, checkout_rules, checkout_catalog):
        with pytest.raises(EmptyCorpus):
            validate_rules(checkout_rules, [], EngineConfig(catalog=checkout_catalog))
