"""Synthetic incident generation.

The simulator plants a root-cause event at the downstream end of an
invocation chain and emits the symptom events an incident of that shape
would produce, consistent with the provided rule set so the causality
builder can reconstruct the chain. Context-mismatched decoy branches and
Poisson "soft error" noise are layered on top. Everything is a pure
function of (params, seed).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .causality import dynamic_target_event
from .conditions import Comparison, PropertyRef
from .depgraph import GlobalDependencyGraph
from .errors import InfeasibleParams
from .model import (
    Event,
    EventType,
    EventTypeCatalog,
    Incident,
    PropertyKind,
    PropertySpec,
    default_for_kind,
    validate_incident,
)
from .rules import Direction, Rule, RuleKind, ServiceScope

BUSINESS_DOMAIN = "business_domain"
SERVICE_BASED = "service_based"

# fixed epoch anchor so corpora depend only on the seed, never on the clock
BASE_TRIGGER_MS = 1_700_000_000_000

_CONTEXT_VALUES = ("dc-1", "dc-2", "dc-3")
_DECOY_PROBABILITY = 0.8


@dataclass(frozen=True)
class SimulationParams:
    """Knobs of the synthetic corpus generator."""

    service_count: int = 50
    edge_density: float = 0.05
    event_noise_rate: float = 0.0
    chain_length: int = 2
    seed: int = 0
    domain_mix: Mapping[str, float] = field(
        default_factory=lambda: {BUSINESS_DOMAIN: 0.5, SERVICE_BASED: 0.5}
    )

    def __post_init__(self):
        if self.service_count < 1:
            raise InfeasibleParams("service_count must be >= 1")
        if not (0 < self.edge_density <= 1):
            raise InfeasibleParams("edge_density must lie in (0, 1]")
        if self.event_noise_rate < 0:
            raise InfeasibleParams("event_noise_rate must be >= 0")
        if self.chain_length < 1:
            raise InfeasibleParams("chain_length must be >= 1")
        if abs(sum(self.domain_mix.values()) - 1.0) > 1e-9:
            raise InfeasibleParams("domain_mix proportions must sum to 1")
        if any(p < 0 for p in self.domain_mix.values()):
            raise InfeasibleParams("domain_mix proportions must be >= 0")


def standard_catalog() -> EventTypeCatalog:
    """Event types the bundled simulation scenario uses."""
    text = PropertyKind.TEXT
    return EventTypeCatalog(
        [
            EventType("Request Error Spike", 3600),
            EventType("Latency Spike", 3600, (PropertySpec("DataCenter", text),)),
            EventType("Code Deployment", 86400),
            EventType("DB Markdown", 3600, (PropertySpec("db_name", text),)),
            EventType("DB Issues", 3600, (PropertySpec("db_name", text),)),
            EventType("Soft Error", 3600),
        ]
    )


def standard_rules(catalog: EventTypeCatalog) -> list[Rule]:
    """Causal rules matching `standard_catalog`; `Soft Error` has none."""
    del catalog  # shape documented by the standard catalog
    static = RuleKind.STATIC
    caused_by = Direction.CAUSED_BY
    return [
        Rule(static, "Request Error Spike", "Request Error Spike", caused_by, ServiceScope.OUTGOING),
        Rule(static, "Request Error Spike", "Latency Spike", caused_by, ServiceScope.OUTGOING),
        Rule(
            static,
            "Latency Spike",
            "Latency Spike",
            caused_by,
            ServiceScope.OUTGOING,
            condition=Comparison(
                PropertyRef("source", "DataCenter"), "==", PropertyRef("target", "DataCenter")
            ),
            condition_text="source.DataCenter == target.DataCenter",
        ),
        Rule(static, "Latency Spike", "Code Deployment", caused_by, ServiceScope.SELF),
        Rule(static, "Latency Spike", "DB Markdown", caused_by, ServiceScope.SELF),
        Rule(RuleKind.DYNAMIC, "DB Markdown", "DB Issues", caused_by, template="DB-{db_name}"),
    ]


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _sample_edges(n: int, density: float, rng: np.random.Generator) -> set[tuple[int, int]]:
    if n <= 1200:
        mask = rng.random((n, n)) < density
        np.fill_diagonal(mask, False)
        rows, cols = np.nonzero(mask)
        return set(zip(rows.tolist(), cols.tolist()))
    # large graphs: draw the edge count, then sample ordered pairs directly
    population = n * (n - 1)
    m = int(rng.binomial(population, density))
    picks = rng.integers(0, population, size=m)
    edges = set()
    for k in picks.tolist():
        i, j0 = divmod(k, n - 1)
        j = j0 + (j0 >= i)
        edges.add((i, j))
    return edges


def _acyclic_chain(
    start: str,
    graph: GlobalDependencyGraph,
    length: int,
    rng: np.random.Generator,
) -> list[str] | None:
    """A downstream path of `length` hops from `start` with no back edges.

    Shortest paths can carry no forward shortcuts; rejecting chains whose
    later services invoke earlier ones leaves the planted symptom chain
    cycle-free, so its mass drains into the planted root cause.
    """
    successors = graph.successors
    dist = {start: 0}
    parent: dict[str, str] = {}
    frontier = deque([start])
    at_depth: dict[int, list[str]] = {0: [start]}
    while frontier:
        node = frontier.popleft()
        d = dist[node]
        if d == length:
            continue
        for nxt in successors.get(node, ()):
            if nxt not in dist:
                dist[nxt] = d + 1
                parent[nxt] = node
                at_depth.setdefault(d + 1, []).append(nxt)
                frontier.append(nxt)
    ends = sorted(at_depth.get(length, ()))
    if not ends:
        return None
    order = rng.permutation(len(ends))
    for idx in order[:16].tolist():
        path = [ends[idx]]
        while path[-1] != start:
            path.append(parent[path[-1]])
        path.reverse()
        clean = all(
            (path[j], path[i]) not in graph.edges
            for i in range(len(path))
            for j in range(i + 1, len(path))
        )
        if clean:
            return path
    return None


def _find_chain(
    graph: GlobalDependencyGraph, length: int, rng: np.random.Generator, attempts: int = 64
) -> list[str] | None:
    nodes = sorted(graph.nodes)
    if length == 0 or len(nodes) == 1:
        return [nodes[int(rng.integers(len(nodes)))]]
    order = rng.permutation(len(nodes))
    for idx in order[:attempts].tolist():
        chain = _acyclic_chain(nodes[idx], graph, length, rng)
        if chain is not None:
            return chain
    return None


def generate_topology(params: SimulationParams) -> GlobalDependencyGraph:
    """Random directed service topology, reproducible from the seed.

    Regenerates (deterministically) until some service can reach
    `chain_length` downstream hops, so incidents are always plantable.
    """
    n = params.service_count
    names = [f"svc-{i:04d}" for i in range(n)]
    if n == 1:
        return GlobalDependencyGraph.of(names, [])
    need = min(params.chain_length, n - 1)
    for attempt in range(16):
        rng = _rng(params.seed, 1, attempt)
        edges = [(names[a], names[b]) for a, b in sorted(_sample_edges(n, params.edge_density, rng))]
        graph = GlobalDependencyGraph.of(names, edges)
        if _find_chain(graph, need, _rng(params.seed, 1, attempt, 1)) is not None:
            return graph
    raise InfeasibleParams(
        f"no topology with a {need}-hop chain found for n={n}, density={params.edge_density}"
    )


# -- rule-set introspection ----------------------------------------------------

@dataclass(frozen=True)
class _Scenario:
    """The rule structures an incident is generated against."""

    entry_rule: Rule  # entry symptom -> chain symptom, outgoing
    chain_rule: Rule  # chain symptom -> chain symptom, outgoing
    context_prop: str | None  # equality-tested property of the chain rule, if any
    terminal_rules: tuple[Rule, ...]  # chain symptom -> root cause type, self
    dynamic_by_source: Mapping[str, Rule]  # root cause type -> dynamic rule


def _context_property(rule: Rule) -> str | None:
    cond = rule.condition
    if (
        isinstance(cond, Comparison)
        and cond.op == "=="
        and isinstance(cond.left, PropertyRef)
        and isinstance(cond.right, PropertyRef)
        and cond.left.name == cond.right.name
    ):
        return cond.left.name
    return None


def _scenario_from_rules(rules: Sequence[Rule]) -> _Scenario:
    candidates = [
        r
        for r in rules
        if r.kind == RuleKind.STATIC
        and r.scope == ServiceScope.OUTGOING
        and r.source == r.target
        and r.direction == Direction.CAUSED_BY
    ]
    # prefer a context-aware propagation rule: it is what decoys exercise
    candidates.sort(key=lambda r: (not r.conditional, r.name))
    dynamic_by_source = {r.source: r for r in rules if r.kind == RuleKind.DYNAMIC}
    for chain_rule in candidates:
        entry_rule = next(
            (
                r
                for r in rules
                if r.kind == RuleKind.STATIC
                and r.scope == ServiceScope.OUTGOING
                and r.target == chain_rule.source
                and r.source != r.target
                and r.direction == Direction.CAUSED_BY
            ),
            None,
        )
        terminal_rules = tuple(
            r
            for r in rules
            if r.kind == RuleKind.STATIC
            and r.scope == ServiceScope.SELF
            and r.source == chain_rule.source
            and r.direction == Direction.CAUSED_BY
            and r.condition is None
        )
        if entry_rule is None or not terminal_rules:
            continue
        return _Scenario(
            entry_rule=entry_rule,
            chain_rule=chain_rule,
            context_prop=_context_property(chain_rule),
            terminal_rules=terminal_rules,
            dynamic_by_source=dynamic_by_source,
        )
    raise InfeasibleParams(
        "rule set has no propagation chain (outgoing self-type rule with an entry"
        " rule feeding it and an unconditional self rule terminating it)"
    )


# -- event fabrication ---------------------------------------------------------

def _fill_properties(
    et: EventType,
    rng: np.random.Generator,
    overrides: Mapping[str, object] | None = None,
    randomize: bool = False,
) -> dict:
    props: dict = {}
    for spec in et.schema:
        if overrides and spec.name in overrides:
            props[spec.name] = overrides[spec.name]
        elif randomize:
            if spec.kind == PropertyKind.TEXT:
                if spec.name == "db_name":
                    props[spec.name] = f"db-{int(rng.integers(100)):02d}"
                else:
                    props[spec.name] = _CONTEXT_VALUES[int(rng.integers(len(_CONTEXT_VALUES)))]
            elif spec.kind == PropertyKind.INTEGER:
                props[spec.name] = int(rng.integers(0, 100))
            elif spec.kind == PropertyKind.REAL:
                props[spec.name] = float(np.round(rng.uniform(0, 100), 3))
            else:
                props[spec.name] = bool(rng.integers(0, 2))
        else:
            props[spec.name] = default_for_kind(spec.kind)
    return props


def _event_time(trigger: int, offset_ms: int, et: EventType) -> int:
    # keep every event safely inside its type's lookback window
    limit = int(et.lookback_seconds * 1000 * 0.9)
    return trigger - min(offset_ms, limit)


def simulate_incident(
    topology: GlobalDependencyGraph,
    rules: Sequence[Rule],
    params: SimulationParams,
    catalog: EventTypeCatalog,
    index: int = 0,
) -> Incident:
    """Generate one labeled incident on the given topology.

    The planted root cause sits `chain_length` hops downstream of the
    most-upstream symptomatic service(s); the label is the planted event
    (or, for database-style roots, the event the dynamic rule creates).
    """
    rng = _rng(params.seed, 2, index)
    scenario = _scenario_from_rules(rules)
    chain = _find_chain(topology, params.chain_length, rng)
    if chain is None or len(chain) < params.chain_length + 1:
        raise InfeasibleParams(
            f"topology has no {params.chain_length}-hop chain to plant an incident on"
        )

    kinds = sorted(params.domain_mix)
    probs = np.array([params.domain_mix[k] for k in kinds])
    kind = kinds[int(rng.choice(len(kinds), p=probs / probs.sum()))]

    trigger = BASE_TRIGGER_MS + int(rng.integers(0, 86_400_000))
    step_ms = 60_000
    symptom_type = catalog.get(scenario.chain_rule.source)
    entry_type = catalog.get(scenario.entry_rule.source)
    context_values = list(_CONTEXT_VALUES)
    chain_context = context_values[int(rng.integers(len(context_values)))]

    def symptom_props(context: str) -> dict:
        if scenario.context_prop is None:
            return _fill_properties(symptom_type, rng)
        return _fill_properties(symptom_type, rng, overrides={scenario.context_prop: context})

    events: list[Event] = []

    # initial (entry) services: upstream neighbours of the first chain hop
    if kind == BUSINESS_DOMAIN:
        candidates = [
            s
            for s in topology.predecessors.get(chain[1], ())
            if s == chain[0] or s not in chain
        ]
        take = min(3, len(candidates))
        idx = rng.choice(len(candidates), size=take, replace=False)
        picked = sorted({candidates[i] for i in idx.tolist()} | {chain[0]})
    else:
        picked = [chain[0]]
    initial_services = frozenset(picked)
    for service in picked:
        events.append(
            Event.of(
                service,
                entry_type.name,
                _event_time(trigger, 0, entry_type),
                _fill_properties(entry_type, rng),
            )
        )

    for hop, service in enumerate(chain[1:], start=1):
        events.append(
            Event.of(
                service,
                symptom_type.name,
                _event_time(trigger, hop * step_ms, symptom_type),
                symptom_props(chain_context),
            )
        )

    # plant the root cause on the last chain service; direct root causes
    # (deployments and the like) outnumber dynamic-dependency ones 3:1
    plain = [r for r in scenario.terminal_rules if r.target not in scenario.dynamic_by_source]
    dyn_backed = [r for r in scenario.terminal_rules if r.target in scenario.dynamic_by_source]
    if plain and dyn_backed:
        group = plain if rng.random() < 0.75 else dyn_backed
    else:
        group = plain or dyn_backed
    terminal = group[int(rng.integers(len(group)))]
    root_type = catalog.get(terminal.target)
    root_time = _event_time(trigger, (params.chain_length + 1) * step_ms, root_type)
    root_event = Event.of(
        chain[-1], root_type.name, root_time, _fill_properties(root_type, rng, randomize=True)
    )
    events.append(root_event)
    dynamic = scenario.dynamic_by_source.get(root_type.name)
    label = dynamic_target_event(dynamic, root_event, catalog) if dynamic else root_event

    # decoy branches: same symptom type, mismatched context, own terminal event.
    # kept away from entry successors: the entry rule is context-free and
    # would otherwise legitimately link the decoy under the full rules too
    if scenario.context_prop is not None:
        entry_reach = set(initial_services)
        for entry in initial_services:
            entry_reach.update(topology.successors.get(entry, ()))
        other_contexts = [c for c in context_values if c != chain_context]
        for hop, service in enumerate(chain[:-1], start=0):
            if hop == 0:
                continue
            off_chain = [
                s
                for s in topology.successors.get(service, ())
                if s not in chain and s not in entry_reach
            ]
            if not off_chain or rng.random() >= _DECOY_PROBABILITY:
                continue
            decoy = off_chain[int(rng.integers(len(off_chain)))]
            decoy_context = other_contexts[int(rng.integers(len(other_contexts)))]
            events.append(
                Event.of(
                    decoy,
                    symptom_type.name,
                    _event_time(trigger, hop * step_ms, symptom_type),
                    symptom_props(decoy_context),
                )
            )
            events.append(
                Event.of(
                    decoy,
                    root_type.name,
                    _event_time(trigger, (hop + 1) * step_ms, root_type),
                    _fill_properties(root_type, rng, randomize=True),
                )
            )

    # soft-error noise: uniform over the cataloged event types, except the
    # scenario's terminal root-cause types (soft errors are non-critical and
    # irrelevant; planting root-cause-typed noise would tie with the label)
    if params.event_noise_rate > 0:
        terminal_types = {r.target for r in scenario.terminal_rules}
        noise_types = [et for et in catalog if et.name not in terminal_types]
        if not noise_types:
            noise_types = list(catalog)
        for service in sorted(topology.nodes):
            for _ in range(int(rng.poisson(params.event_noise_rate))):
                et = noise_types[int(rng.integers(len(noise_types)))]
                offset = int(rng.uniform(0, et.lookback_seconds * 900))
                events.append(
                    Event.of(
                        service,
                        et.name,
                        _event_time(trigger, offset, et),
                        _fill_properties(et, rng, randomize=True),
                    )
                )

    incident = Incident(
        snapshot=topology,
        initial_services=initial_services,
        events=tuple(events),
        trigger_time=trigger,
        label=label,
        domain_tag=kind,
    )
    return validate_incident(incident, catalog)


def generate_corpus(
    params: SimulationParams,
    count: int,
    catalog: EventTypeCatalog | None = None,
    rules: Sequence[Rule] | None = None,
) -> tuple[GlobalDependencyGraph, list[Rule], EventTypeCatalog, list[Incident]]:
    """A shared topology plus `count` labeled incidents on it."""
    if count < 1:
        raise InfeasibleParams("corpus size must be >= 1")
    catalog = catalog or standard_catalog()
    rules = list(rules) if rules is not None else standard_rules(catalog)
    topology = generate_topology(params)
    incidents = [
        simulate_incident(topology, rules, params, catalog, index=i) for i in range(count)
    ]
    return topology, rules, catalog, incidents
