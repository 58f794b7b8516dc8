"""Shared fixtures: the checkout incident from the motivating example and friends."""

from __future__ import annotations

import pytest

from eventrca import (
    Event,
    EventType,
    EventTypeCatalog,
    GlobalDependencyGraph,
    Incident,
    PropertyKind,
    PropertySpec,
    parse_rules,
    validate_incident,
)

TRIGGER = 1627821364000  # 2021/08/01-12:36:04 UTC in epoch ms


@pytest.fixture(scope="session")
def checkout_catalog() -> EventTypeCatalog:
    text = PropertyKind.TEXT
    return EventTypeCatalog(
        [
            EventType("API Call Timeout", 3600),
            EventType("Latency Spike", 3600, (PropertySpec("DataCenter", text),)),
            EventType("Code Deployment", 86400),
            EventType("High CPU", 3600),
            EventType("High GC", 3600),
        ]
    )


@pytest.fixture(scope="session")
def checkout_rule_objects() -> list[dict]:
    return [
        {
            "kind": "static",
            "source": "API Call Timeout",
            "target": "API Call Timeout",
            "direction": "caused_by",
            "service": "outgoing",
        },
        {
            "kind": "static",
            "source": "API Call Timeout",
            "target": "Latency Spike",
            "direction": "caused_by",
            "service": "outgoing",
        },
        {
            "kind": "static",
            "source": "Latency Spike",
            "target": "Latency Spike",
            "direction": "caused_by",
            "service": "outgoing",
            "condition": "source.DataCenter == target.DataCenter",
        },
        {
            "kind": "static",
            "source": "Latency Spike",
            "target": "Code Deployment",
            "direction": "caused_by",
            "service": "self",
        },
    ]


@pytest.fixture(scope="session")
def checkout_rules(checkout_catalog, checkout_rule_objects):
    return parse_rules(checkout_rule_objects, checkout_catalog)


@pytest.fixture(scope="session")
def checkout_graph() -> GlobalDependencyGraph:
    return GlobalDependencyGraph.of(
        ["Checkout", "Service-A", "Service-B", "Service-C", "Service-D", "Service-E"],
        [
            ("Checkout", "Service-A"),
            ("Checkout", "Service-B"),
            ("Service-A", "Service-B"),
            ("Service-A", "Service-C"),
            ("Service-C", "Service-D"),
            ("Service-C", "Service-E"),
        ],
    )


@pytest.fixture(scope="session")
def checkout_events() -> list[Event]:
    return [
        Event.of("Checkout", "API Call Timeout", TRIGGER),
        Event.of("Service-A", "API Call Timeout", TRIGGER - 1000),
        Event.of("Service-B", "High CPU", TRIGGER - 2000),
        Event.of("Service-B", "High GC", TRIGGER - 2000),
        Event.of("Service-C", "Latency Spike", TRIGGER - 3000, {"DataCenter": "DC-1"}),
        Event.of("Service-D", "Latency Spike", TRIGGER - 3000, {"DataCenter": "DC-2"}),
        Event.of("Service-E", "Latency Spike", TRIGGER - 4000, {"DataCenter": "DC-1"}),
        Event.of("Service-E", "Code Deployment", TRIGGER - 5000),
    ]


@pytest.fixture(scope="session")
def checkout_label() -> Event:
    return Event.of("Service-E", "Code Deployment", TRIGGER - 5000)


@pytest.fixture(scope="session")
def checkout_incident(checkout_graph, checkout_events, checkout_label, checkout_catalog):
    incident = Incident(
        snapshot=checkout_graph,
        initial_services=frozenset({"Checkout"}),
        events=tuple(checkout_events),
        trigger_time=TRIGGER,
        label=checkout_label,
        domain_tag="checkout",
    )
    return validate_incident(incident, checkout_catalog)


# the checkout chain is three hops deep; the analysis radius must reach it
CHECKOUT_RADIUS = 3


@pytest.fixture(scope="session")
def untie_catalog() -> EventTypeCatalog:
    return EventTypeCatalog(
        [
            EventType("Symptom", 3600),
            EventType("Local Fault", 3600),
            EventType("Remote Fault", 3600),
        ]
    )


@pytest.fixture(scope="session")
def untie_rules(untie_catalog):
    return parse_rules(
        [
            {
                "kind": "static",
                "source": "Symptom",
                "target": "Local Fault",
                "direction": "caused_by",
                "service": "self",
            },
            {
                "kind": "static",
                "source": "Symptom",
                "target": "Remote Fault",
                "direction": "caused_by",
                "service": "outgoing",
            },
        ],
        untie_catalog,
    )


@pytest.fixture(scope="session")
def untie_incident(untie_catalog):
    """Two initial services; the tied candidates differ only in access distance.

    Service-A invokes Service-B. The symptom on A is caused by either the
    local fault on A (unreachable from B: distance 0 + 2) or the remote
    fault on B (distance 1 + 0).
    """
    graph = GlobalDependencyGraph.of(["Service-A", "Service-B"], [("Service-A", "Service-B")])
    events = (
        Event.of("Service-A", "Symptom", TRIGGER),
        Event.of("Service-A", "Local Fault", TRIGGER - 1000),
        Event.of("Service-B", "Remote Fault", TRIGGER - 1000),
    )
    incident = Incident(
        snapshot=graph,
        initial_services=frozenset({"Service-A", "Service-B"}),
        events=events,
        trigger_time=TRIGGER,
    )
    return validate_incident(incident, untie_catalog)
