"""Service dependency graphs and incident-scoped subgraph extraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import (
    DanglingEdgeEndpoint,
    DuplicateService,
    SelfLoop,
    UnknownAttachService,
    UnknownInitialService,
)

Edge = tuple[str, str]


def _adjacency(nodes: frozenset[str], edges: frozenset[Edge], reverse: bool) -> dict[str, tuple[str, ...]]:
    out: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        if reverse:
            out[b].append(a)
        else:
            out[a].append(b)
    return {n: tuple(sorted(vs)) for n, vs in out.items()}


def _check_edges(nodes: frozenset[str], edges: Iterable[Edge]) -> frozenset[Edge]:
    deduped = set()
    for a, b in edges:
        if a == b:
            raise SelfLoop(f"edge ({a}, {b}) is a self-loop")
        if a not in nodes or b not in nodes:
            raise DanglingEdgeEndpoint(f"edge ({a}, {b}) references an unknown service")
        deduped.add((a, b))
    return frozenset(deduped)


@dataclass(frozen=True)
class GlobalDependencyGraph:
    """Directed graph of service invocations; edge (a, b) means a depends on b.

    Bi-directional pairs and cycles are allowed; self-loops are not.
    """

    nodes: frozenset[str]
    edges: frozenset[Edge]

    @classmethod
    def of(cls, nodes: Iterable[str], edges: Iterable[Edge]) -> "GlobalDependencyGraph":
        node_set = frozenset(nodes)
        for n in node_set:
            if not n:
                raise DanglingEdgeEndpoint("service names must be non-empty")
        return cls(node_set, _check_edges(node_set, edges))

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        return _adjacency(self.nodes, self.edges, reverse=False)

    @cached_property
    def predecessors(self) -> dict[str, tuple[str, ...]]:
        return _adjacency(self.nodes, self.edges, reverse=True)


@dataclass(frozen=True)
class DependencySubgraph:
    """The incident-scoped slice of the global graph around the initial services."""

    nodes: frozenset[str]
    edges: frozenset[Edge]
    initial_services: frozenset[str]
    radius: int

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        return _adjacency(self.nodes, self.edges, reverse=False)

    @cached_property
    def predecessors(self) -> dict[str, tuple[str, ...]]:
        return _adjacency(self.nodes, self.edges, reverse=True)


def bfs_within(start: str, adjacency: dict[str, tuple[str, ...]], depth: int) -> dict[str, int]:
    """Hop distances from `start` to every node reachable within `depth`."""
    dist = {start: 0}
    frontier = deque([start])
    while frontier:
        node = frontier.popleft()
        d = dist[node]
        if d == depth:
            continue
        for nxt in adjacency.get(node, ()):
            if nxt not in dist:
                dist[nxt] = d + 1
                frontier.append(nxt)
    return dist


def extract_subgraph(
    global_graph: GlobalDependencyGraph,
    initial_services: Iterable[str],
    radius: int,
) -> DependencySubgraph:
    """Select every service within `radius` hops of an initial service.

    A service qualifies if it can be reached from an initial service, or
    can reach one, in at most `radius` directed hops; the subgraph keeps
    all global edges between qualifying services.
    """
    initial = frozenset(initial_services)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    unknown = sorted(initial - global_graph.nodes)
    if unknown:
        raise UnknownInitialService(f"initial services not in global graph: {unknown}")

    selected: set[str] = set()
    for v in initial:
        selected.update(bfs_within(v, global_graph.successors, radius))
        selected.update(bfs_within(v, global_graph.predecessors, radius))
    nodes = frozenset(selected)
    edges = frozenset((a, b) for a, b in global_graph.edges if a in nodes and b in nodes)
    return DependencySubgraph(nodes=nodes, edges=edges, initial_services=initial, radius=radius)


def add_dynamic_service(
    sub: DependencySubgraph, new_service: str, attach_to: str
) -> DependencySubgraph:
    """Extend a subgraph with a dynamically discovered dependency.

    Adds `new_service` and a directed edge attach_to -> new_service;
    the input subgraph is left unchanged.
    """
    if not new_service:
        raise DuplicateService("dynamic service name must be non-empty")
    if attach_to not in sub.nodes:
        raise UnknownAttachService(f"cannot attach to unknown service '{attach_to}'")
    if new_service in sub.nodes:
        raise DuplicateService(f"service '{new_service}' already exists")
    return DependencySubgraph(
        nodes=sub.nodes | {new_service},
        edges=sub.edges | {(attach_to, new_service)},
        initial_services=sub.initial_services,
        radius=sub.radius,
    )
