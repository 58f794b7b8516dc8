"""Rendering of rankings and causality graphs.

The structured graph export keeps the internal orientation (an edge points
from a symptom to its possible cause) and says so in an explicit
`orientation` field. DOT output flips every arrow to "is cause of" so the
rendered picture reads in propagation order.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .causality import CausalLink, EventCausalityGraph
from .depgraph import DependencySubgraph
from .documents import event_to_object, parse_event
from .model import Event
from .ranking import RankedRootCauses

CAUSED_BY = "caused_by"  # internal orientation marker


def causal_path(ecg: EventCausalityGraph, event: Event) -> list[Event]:
    """Shortest link path from an initial-service event to `event`.

    Links run symptom -> cause, so the path explains how suspicion reached
    the candidate. An event with no such path (or itself on an initial
    service) yields a single-element path.
    """
    starts = sorted(
        (e for e in ecg.events if e.service in ecg.initial_services),
        key=lambda e: e.sort_key,
    )
    if event in starts:
        return [event]
    parent: dict[Event, Event] = {}
    frontier = deque(starts)
    seen = set(starts)
    while frontier:
        current = frontier.popleft()
        for link in ecg.links_by_source.get(current, ()):
            nxt = link.target
            if nxt in seen:
                continue
            seen.add(nxt)
            parent[nxt] = current
            if nxt == event:
                path = [event]
                while path[-1] in parent:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            frontier.append(nxt)
    return [event]


def ranked_to_document(ranked: RankedRootCauses, ecg: EventCausalityGraph | None = None) -> dict:
    """Structured form of a ranking, with per-event link rules when available."""
    entries = []
    for position, entry in enumerate(ranked, start=1):
        record = {
            "rank": position,
            "event": event_to_object(entry.event),
            "score": entry.score,
            "access_distance_sum": entry.access_distance_sum,
            "frequency": entry.frequency,
        }
        if ecg is not None:
            record["caused_by_rules"] = sorted(
                {l.rule_name for l in ecg.links_by_source.get(entry.event, ())}
            )
            record["causes_rules"] = sorted(
                {l.rule_name for l in ecg.links_by_target.get(entry.event, ())}
            )
        entries.append(record)
    return {"entries": entries}


def ranked_to_table(
    ranked: RankedRootCauses,
    ecg: EventCausalityGraph | None = None,
    path_depth: int = 3,
    limit: int | None = None,
) -> str:
    """Human-readable ranking; top entries get their causal path appended."""
    if not ranked.entries:
        return "no root cause candidates"
    lines = [f"{'rank':>4}  {'score':>10}  {'dist':>4}  {'freq':>4}  event"]
    shown = ranked.entries if limit is None else ranked.entries[:limit]
    for position, entry in enumerate(shown, start=1):
        lines.append(
            f"{position:>4}  {entry.score:>10.6f}  {entry.access_distance_sum:>4}"
            f"  {entry.frequency:>4}  {entry.event.describe()}"
        )
    if ecg is not None:
        for position, entry in enumerate(ranked.entries[:path_depth], start=1):
            steps = causal_path(ecg, entry.event)
            rendered = " -> ".join(e.describe() for e in steps)
            lines.append(f"path to #{position}: {rendered}")
    return "\n".join(lines)


# -- causality graph export ------------------------------------------------------

def ecg_to_document(ecg: EventCausalityGraph) -> dict:
    index = {event: i for i, event in enumerate(ecg.events)}
    return {
        "orientation": CAUSED_BY,
        "events": [{"id": i, **event_to_object(e)} for i, e in enumerate(ecg.events)],
        "links": [
            {
                "source": index[l.source],
                "target": index[l.target],
                "weight": l.weight,
                "rule": l.rule_name,
            }
            for l in ecg.links
        ],
        "subgraph": {
            "nodes": sorted(ecg.subgraph.nodes),
            "edges": [list(e) for e in sorted(ecg.subgraph.edges)],
            "initial_services": sorted(ecg.subgraph.initial_services),
            "radius": ecg.subgraph.radius,
        },
    }


def ecg_from_document(obj: dict) -> EventCausalityGraph:
    events = [parse_event(entry) for entry in obj["events"]]
    links = tuple(
        CausalLink(
            source=events[link["source"]],
            target=events[link["target"]],
            weight=link["weight"],
            rule_name=link["rule"],
        )
        for link in obj["links"]
    )
    sub = obj["subgraph"]
    subgraph = DependencySubgraph(
        nodes=frozenset(sub["nodes"]),
        edges=frozenset(tuple(e) for e in sub["edges"]),
        initial_services=frozenset(sub["initial_services"]),
        radius=sub["radius"],
    )
    return EventCausalityGraph(
        events=tuple(events),
        links=links,
        subgraph=subgraph,
        initial_services=subgraph.initial_services,
    )


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def ecg_to_dot(ecg: EventCausalityGraph, name: str = "causality") -> str:
    """Graphviz rendering with arrows flipped to the "is cause of" direction."""
    index = {event: i for i, event in enumerate(ecg.events)}
    lines = [f"digraph {_dot_quote(name)} {{", "  rankdir=LR;"]
    for event, i in index.items():
        type_part = event.type_name.replace('"', '\\"')
        service_part = event.service.replace('"', '\\"')
        lines.append(f'  e{i} [label="{type_part}\\n{service_part}"];')
    for link in ecg.links:
        # display orientation: cause -> symptom
        lines.append(
            f"  e{index[link.target]} -> e{index[link.source]}"
            f" [label=\"{link.weight:g}\"];"
        )
    lines.append("}")
    return "\n".join(lines)


def services_to_table(services: Sequence[tuple[str, float]]) -> str:
    if not services:
        return "no services scored"
    lines = [f"{'rank':>4}  {'score':>10}  service"]
    for position, (service, score) in enumerate(services, start=1):
        lines.append(f"{position:>4}  {score:>10.6f}  {service}")
    return "\n".join(lines)
