"""Event causality graph construction.

Dynamic rules run first and materialize hidden services and events (for
example databases that are not part of the traced topology). The static
phase then expands causal links recursively, starting from the events on
the initial services; each newly linked event becomes a new origin until
no further links can be created.

A link source -> target means "source is possibly caused by target".
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .conditions import eval_condition
from .depgraph import DependencySubgraph, add_dynamic_service
from .errors import TemplateInterpolationError
from .model import Event, EventTypeCatalog, default_for_kind, kind_of_value
from .rules import Direction, Rule, RuleKind, ServiceScope, build_rule_graphs

_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")


@dataclass(frozen=True)
class CausalLink:
    source: Event
    target: Event
    weight: float
    rule_name: str

    @property
    def sort_key(self):
        return (self.source.sort_key, self.target.sort_key)


@dataclass(frozen=True)
class EventCausalityGraph:
    """Directed weighted graph over events, plus the (possibly extended) subgraph."""

    events: tuple[Event, ...]
    links: tuple[CausalLink, ...]
    subgraph: DependencySubgraph
    initial_services: frozenset[str]
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    @cached_property
    def links_by_source(self) -> dict[Event, tuple[CausalLink, ...]]:
        out: dict[Event, list[CausalLink]] = {e: [] for e in self.events}
        for link in self.links:
            out[link.source].append(link)
        return {e: tuple(ls) for e, ls in out.items()}

    @cached_property
    def links_by_target(self) -> dict[Event, tuple[CausalLink, ...]]:
        out: dict[Event, list[CausalLink]] = {e: [] for e in self.events}
        for link in self.links:
            out[link.target].append(link)
        return {e: tuple(ls) for e, ls in out.items()}

    def dangling(self, event: Event) -> bool:
        """An event with no outgoing links has no identified further cause."""
        return not self.links_by_source[event]


def interpolate_template(template: str, source: Event) -> str:
    """Fill `{prop}` placeholders in a dynamic-rule service template."""

    def substitute(match: re.Match) -> str:
        prop = match.group(1)
        if prop not in source.props:
            raise TemplateInterpolationError(
                f"template '{template}' references '{prop}', absent from {source.describe()}"
            )
        return str(source.props[prop])

    return _PLACEHOLDER_RE.sub(substitute, template)


def dynamic_target_event(rule: Rule, source: Event, catalog: EventTypeCatalog) -> Event:
    """Materialize the event a dynamic rule creates for a source event.

    The new event starts when the source does. Schema properties whose name
    and kind match a source property are copied; the rest take kind defaults.
    """
    service = interpolate_template(rule.template or "", source)
    target_type = catalog.get(rule.target)
    properties = {}
    for spec in target_type.schema:
        value = source.props.get(spec.name)
        if value is not None and kind_of_value(value) == spec.kind:
            properties[spec.name] = value
        else:
            properties[spec.name] = default_for_kind(spec.kind)
    return Event.of(service, rule.target, source.start_time, properties)


def _link_ends(rule: Rule, origin: Event, other: Event) -> tuple[Event, Event]:
    if rule.direction == Direction.CAUSED_BY:
        return origin, other
    return other, origin


def apply_dynamic_rules(
    sub: DependencySubgraph,
    events: Sequence[Event],
    rules: Sequence[Rule],
    catalog: EventTypeCatalog,
    diagnostics: list[str] | None = None,
) -> tuple[DependencySubgraph, list[Event], list[CausalLink]]:
    """Apply every dynamic rule to every event, once.

    Returns the (possibly extended) subgraph, the full event list including
    created events, and the created links. Re-application is a no-op.
    """
    dynamic_rules = [r for r in rules if r.kind == RuleKind.DYNAMIC]
    known = dict.fromkeys(events)
    links: dict[tuple[Event, Event], CausalLink] = {}

    # created events may themselves match dynamic rules; run to a fixpoint so
    # that a second application can never add anything
    pending = deque(sorted(events, key=lambda e: e.sort_key))
    while pending:
        event = pending.popleft()
        for rule in dynamic_rules:
            if rule.source != event.type_name:
                continue
            if rule.condition is not None and not eval_condition(
                rule.condition, event, None, diagnostics
            ):
                continue
            created = dynamic_target_event(rule, event, catalog)
            if created.service not in sub.nodes:
                sub = add_dynamic_service(sub, created.service, attach_to=event.service)
            if created not in known:
                known[created] = None
                pending.append(created)
            source, target = _link_ends(rule, event, created)
            new = CausalLink(source, target, rule.weight, rule.name)
            existing = links.get((source, target))
            if existing is None or (new.rule_name, new.weight) < (
                existing.rule_name,
                existing.weight,
            ):
                links[(source, target)] = new

    return sub, list(known), sorted(links.values(), key=lambda l: l.sort_key)


def candidate_targets(
    rule: Rule,
    source: Event,
    events: Iterable[Event],
    sub: DependencySubgraph,
) -> list[Event]:
    """Events a static rule may link the source event to.

    SELF looks on the source's own service, OUTGOING on its direct
    successors in the dependency subgraph, INCOMING on its predecessors.
    """
    assert rule.kind == RuleKind.STATIC and rule.scope is not None
    if rule.scope == ServiceScope.SELF:
        services = {source.service}
    elif rule.scope == ServiceScope.OUTGOING:
        services = set(sub.successors.get(source.service, ()))
    else:
        services = set(sub.predecessors.get(source.service, ()))
    found = [
        e
        for e in events
        if e.type_name == rule.target and e.service in services and e != source
    ]
    return sorted(found, key=lambda e: e.sort_key)


def build_causality_graph(
    sub: DependencySubgraph,
    events: Sequence[Event],
    rules: Sequence[Rule],
    catalog: EventTypeCatalog,
) -> EventCausalityGraph:
    """Construct the event causality graph for one incident.

    Only events on subgraph services participate. Dynamic rules run first;
    the recursive static phase then saturates links reachable from the
    initial services' events. The result is independent of input ordering.
    """
    initial = sub.initial_services
    in_scope = [e for e in events if e.service in sub.nodes]
    graphs = build_rule_graphs(rules)
    diagnostics: list[str] = []

    sub, all_events, dyn_links = apply_dynamic_rules(
        sub, in_scope, rules, catalog, diagnostics
    )
    all_events = sorted(all_events, key=lambda e: e.sort_key)

    by_type: dict[str, list[Event]] = {}
    for event in all_events:
        by_type.setdefault(event.type_name, []).append(event)

    # resolved entries: conditional has already displaced basic per pair
    static_by_source: dict[str, list[Rule]] = {}
    for graph in (graphs.same_graph, graphs.diff_graph):
        for key in sorted(graph):
            rule = graph[key]
            if rule.kind == RuleKind.STATIC:
                static_by_source.setdefault(rule.source, []).append(rule)

    links: dict[tuple[Event, Event], CausalLink] = {
        (l.source, l.target): l for l in dyn_links
    }
    outgoing: dict[Event, list[Event]] = {}
    for l in dyn_links:
        outgoing.setdefault(l.source, []).append(l.target)

    worklist = deque(e for e in all_events if e.service in initial)
    queued = set(worklist)
    while worklist:
        origin = worklist.popleft()
        # follow links already attached to this origin (dynamic phase output)
        for nxt in outgoing.get(origin, ()):
            if nxt not in queued:
                queued.add(nxt)
                worklist.append(nxt)
        for rule in static_by_source.get(origin.type_name, ()):
            pool = by_type.get(rule.target, ())
            for candidate in candidate_targets(rule, origin, pool, sub):
                if rule.condition is not None and not eval_condition(
                    rule.condition, origin, candidate, diagnostics
                ):
                    continue
                source, target = _link_ends(rule, origin, candidate)
                new = CausalLink(source, target, rule.weight, rule.name)
                existing = links.get((source, target))
                # when several rules can derive one pair, keep the least rule
                # name so the result never depends on traversal order
                if existing is None or (new.rule_name, new.weight) < (
                    existing.rule_name,
                    existing.weight,
                ):
                    links[(source, target)] = new
                if candidate not in queued:
                    queued.add(candidate)
                    worklist.append(candidate)

    return EventCausalityGraph(
        events=tuple(all_events),
        links=tuple(sorted(links.values(), key=lambda l: l.sort_key)),
        subgraph=sub,
        initial_services=initial,
        diagnostics=tuple(diagnostics),
    )
