"""Document codecs, graph export, and DOT orientation."""

import json

import pytest

from eventrca import analyze_incident, extract_subgraph, build_causality_graph
from eventrca.documents import (
    catalog_to_object,
    dump_document,
    graph_to_object,
    incident_to_object,
    load_catalog,
    load_corpus,
    load_global_graph,
    load_incident,
    load_rules,
    parse_frequency_table,
    frequency_table_to_object,
    rules_to_object,
    write_corpus,
)
from eventrca.errors import DocumentError
from eventrca.export import (
    causal_path,
    ecg_from_document,
    ecg_to_document,
    ecg_to_dot,
    ranked_to_document,
    ranked_to_table,
)

from .conftest import CHECKOUT_RADIUS


class TestCatalogDocuments:
    def test_round_trip(self, checkout_catalog, tmp_path):
        path = dump_document(catalog_to_object(checkout_catalog), tmp_path / "catalog.json")
        loaded = load_catalog(path)
        assert catalog_to_object(loaded) == catalog_to_object(checkout_catalog)

    def test_missing_field_diagnostic(self, tmp_path):
        path = dump_document({"event_types": [{"name": "X"}]}, tmp_path / "catalog.json")
        with pytest.raises(DocumentError) as err:
            load_catalog(path)
        assert "lookback_period" in str(err.value)

    def test_unknown_kind_rejected(self, tmp_path):
        path = dump_document(
            {
                "event_types": [
                    {
                        "name": "X",
                        "lookback_period": 1,
                        "property_schema": [{"property_name": "p", "kind": "decimal"}],
                    }
                ]
            },
            tmp_path / "catalog.json",
        )
        with pytest.raises(DocumentError, match="decimal"):
            load_catalog(path)


class TestGraphDocuments:
    def test_round_trip(self, checkout_graph, tmp_path):
        path = dump_document(graph_to_object(checkout_graph), tmp_path / "graph.json")
        assert load_global_graph(path) == checkout_graph

    def test_self_loop_diagnostic_names_file(self, tmp_path):
        path = dump_document({"nodes": ["a"], "edges": [["a", "a"]]}, tmp_path / "g.json")
        with pytest.raises(DocumentError) as err:
            load_global_graph(path)
        assert "g.json" in str(err.value)


class TestRuleDocuments:
    def test_round_trip(self, checkout_rules, checkout_catalog, tmp_path):
        path = dump_document(rules_to_object(checkout_rules), tmp_path / "rules.json")
        assert load_rules(path, checkout_catalog) == checkout_rules

    def test_non_list_rejected(self, checkout_catalog, tmp_path):
        path = dump_document({"rules": []}, tmp_path / "rules.json")
        with pytest.raises(DocumentError):
            load_rules(path, checkout_catalog)


class TestIncidentDocuments:
    def test_round_trip(self, checkout_incident, checkout_catalog, tmp_path):
        path = dump_document(
            incident_to_object(checkout_incident), tmp_path / "incident.json"
        )
        assert load_incident(path, checkout_catalog) == checkout_incident

    def test_separate_graph_overrides(self, checkout_incident, checkout_catalog, tmp_path):
        obj = incident_to_object(checkout_incident)
        snapshot = obj.pop("snapshot")
        path = dump_document(obj, tmp_path / "incident.json")
        with pytest.raises(DocumentError):
            load_incident(path, checkout_catalog)  # no snapshot anywhere
        from eventrca.documents import parse_global_graph

        loaded = load_incident(path, checkout_catalog, snapshot=parse_global_graph(snapshot))
        assert loaded == checkout_incident

    def test_schema_violation_is_document_error(self, checkout_incident, checkout_catalog, tmp_path):
        obj = incident_to_object(checkout_incident)
        obj["events"][0]["type_name"] = "No Such Type"
        path = dump_document(obj, tmp_path / "incident.json")
        with pytest.raises(DocumentError) as err:
            load_incident(path, checkout_catalog)
        assert "incident.json" in str(err.value)

    def test_label_properties_coerced_like_events(self, tmp_path):
        # a real-kind property written as a JSON integer must not break
        # label identity matching after the round trip
        from eventrca import (
            Event,
            EventType,
            EventTypeCatalog,
            PropertyKind,
            PropertySpec,
        )
        from eventrca.depgraph import GlobalDependencyGraph

        catalog = EventTypeCatalog(
            [EventType("Spike", 3600, (PropertySpec("ratio", PropertyKind.REAL),))]
        )
        graph = {"nodes": ["a"], "edges": []}
        event = {"service": "a", "type_name": "Spike", "start_time": 1000,
                 "properties": {"ratio": 3}}
        path = dump_document(
            {
                "snapshot": graph,
                "initial_services": ["a"],
                "trigger_time": 1000,
                "events": [event],
                "label": dict(event),
            },
            tmp_path / "incident.json",
        )
        incident = load_incident(path, catalog)
        assert incident.label == incident.events[0]
        assert incident.label.props["ratio"] == 3.0
        assert isinstance(incident.label.props["ratio"], float)


class TestCorpus:
    def test_write_and_load(self, checkout_incident, checkout_catalog, checkout_rules, tmp_path):
        corpus_dir = tmp_path / "corpus"
        write_corpus(corpus_dir, [checkout_incident] * 3, checkout_catalog, checkout_rules)
        catalog, rules, names, incidents = load_corpus(corpus_dir)
        assert len(incidents) == 3
        assert incidents[0] == checkout_incident
        assert rules == checkout_rules
        assert names == [f"incident-{i:04d}.json" for i in range(3)]

    def test_dynamic_label_survives_round_trip(self, tmp_path):
        # database-style incidents label an event the engine creates
        # dynamically; the serialized label must still match it exactly
        from eventrca import (
            EngineConfig,
            SimulationParams,
            generate_corpus,
            rank_root_causes,
        )

        params = SimulationParams(
            service_count=30, edge_density=0.1, event_noise_rate=0.0, chain_length=1, seed=6
        )
        _, rules, catalog, corpus = generate_corpus(params, 12)
        dynamic_labeled = [i for i in corpus if i.label.service.startswith("DB-")]
        assert dynamic_labeled, "expected at least one database-rooted incident"
        corpus_dir = tmp_path / "corpus"
        write_corpus(corpus_dir, dynamic_labeled, catalog, rules)
        _, loaded_rules, _, loaded = load_corpus(corpus_dir)
        for incident in loaded:
            assert incident.label not in incident.events
            ranking = rank_root_causes(incident, loaded_rules, catalog, radius=2)
            assert ranking.rank_of(incident.label) == 1

    def test_manifest_without_catalog_needs_explicit_one(self, tmp_path):
        (tmp_path / "manifest.json").write_text(json.dumps({"incidents": []}))
        with pytest.raises(DocumentError):
            load_corpus(tmp_path)


def test_frequency_table_document_round_trip():
    obj = {"domains": {"checkout": {"Code Deployment": 4}}, "default": {"Code Deployment": 9}}
    table = parse_frequency_table(obj)
    assert table.lookup("checkout", "Code Deployment") == 4
    assert table.lookup(None, "Code Deployment") == 9
    assert frequency_table_to_object(table) == obj


class TestEcgExport:
    @pytest.fixture
    def ecg(self, checkout_graph, checkout_events, checkout_rules, checkout_catalog):
        sub = extract_subgraph(checkout_graph, {"Checkout"}, CHECKOUT_RADIUS)
        return build_causality_graph(sub, checkout_events, checkout_rules, checkout_catalog)

    def test_structured_round_trip(self, ecg):
        doc = ecg_to_document(ecg)
        assert doc["orientation"] == "caused_by"
        reloaded = ecg_from_document(json.loads(json.dumps(doc)))
        assert reloaded.events == ecg.events
        assert [
            (l.source, l.target, l.weight, l.rule_name) for l in reloaded.links
        ] == [(l.source, l.target, l.weight, l.rule_name) for l in ecg.links]
        assert reloaded.subgraph == ecg.subgraph

    def test_dot_arrows_flipped_to_cause_of(self, ecg):
        dot = ecg_to_dot(ecg)
        index = {e: i for i, e in enumerate(ecg.events)}
        deploy = next(e for e in ecg.events if e.type_name == "Code Deployment")
        latency_e = next(
            e
            for e in ecg.events
            if e.type_name == "Latency Spike" and e.service == "Service-E"
        )
        # internal link: symptom -> cause; display arrow: cause -> symptom
        assert f"e{index[deploy]} -> e{index[latency_e]}" in dot
        assert f"e{index[latency_e]} -> e{index[deploy]}" not in dot

    def test_dot_with_no_links_lists_nodes(self, ecg, checkout_catalog, checkout_graph, checkout_events):
        sub = extract_subgraph(checkout_graph, {"Checkout"}, CHECKOUT_RADIUS)
        bare = build_causality_graph(sub, checkout_events, [], checkout_catalog)
        dot = ecg_to_dot(bare)
        assert dot.count("->") == 0
        assert dot.count("label=") == len(bare.events)

    def test_causal_path_reaches_initial_event(self, ecg):
        deploy = next(e for e in ecg.events if e.type_name == "Code Deployment")
        path = causal_path(ecg, deploy)
        assert path[0].service == "Checkout"
        assert path[-1] == deploy
        assert len(path) == 5

    def test_causal_path_isolated_event_is_singleton(self, ecg):
        cpu = next(e for e in ecg.events if e.type_name == "High CPU")
        assert causal_path(ecg, cpu) == [cpu]


class TestRankedExport:
    def test_document_and_table(
        self, checkout_incident, checkout_rules, checkout_catalog
    ):
        result = analyze_incident(
            checkout_incident, checkout_rules, checkout_catalog, radius=CHECKOUT_RADIUS
        )
        doc = ranked_to_document(result.ranking, result.ecg)
        assert doc["entries"][0]["event"]["type_name"] == "Code Deployment"
        assert doc["entries"][0]["rank"] == 1
        assert doc["entries"][0]["causes_rules"]  # explainability: rule names present
        table = ranked_to_table(result.ranking, result.ecg)
        assert "Code Deployment" in table.splitlines()[1]
        assert "path to #1" in table
