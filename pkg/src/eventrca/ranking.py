"""Root cause ranking over the event causality graph.

Scores come from a weighted personalized PageRank in which dangling events
(no outgoing causal link, hence no identified further cause) carry elevated
teleport mass, and mass stranded on dangling rows is redistributed by the
same personalization vector. Ties are broken by access distance from the
initial services, then by historical root-cause frequency, then by canonical
event identity so the final ordering is a strict total order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .causality import EventCausalityGraph, build_causality_graph
from .depgraph import DependencySubgraph, bfs_within, extract_subgraph
from .errors import EmptyGraph, UnknownService
from .model import Event, EventTypeCatalog, Incident

if TYPE_CHECKING:
    from .rules import Rule

DEFAULT_RADIUS = 2


@dataclass(frozen=True)
class RankParams:
    """Parameters of the ranking iteration."""

    f_n: float = 0.5
    alpha: float = 0.85
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if not (0 < self.f_n <= 1):
            raise ValueError("f_n must lie in (0, 1]")
        if not (0 < self.alpha < 1):
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


@dataclass(frozen=True)
class FrequencyTable:
    """Historical root-cause counts per event type, optionally per domain.

    Lookup falls back from (domain, type) to type alone, then to zero.
    """

    by_domain: Mapping[tuple[str, str], int] = field(default_factory=dict)
    fallback: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for count in list(self.by_domain.values()) + list(self.fallback.values()):
            if count < 0:
                raise ValueError("frequency counts must be >= 0")

    @classmethod
    def empty(cls) -> "FrequencyTable":
        return cls({}, {})

    def lookup(self, domain_tag: str | None, type_name: str) -> int:
        if domain_tag is not None and (domain_tag, type_name) in self.by_domain:
            return self.by_domain[(domain_tag, type_name)]
        return self.fallback.get(type_name, 0)


@dataclass(frozen=True)
class RankedEntry:
    event: Event
    score: float
    access_distance_sum: int
    frequency: int


@dataclass(frozen=True)
class RankedRootCauses:
    """Ordered root-cause candidates with tie-break metadata."""

    entries: tuple[RankedEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def rank_of(self, event: Event) -> int | None:
        """1-based rank of an event, or None when it was not ranked."""
        for i, entry in enumerate(self.entries, start=1):
            if entry.event == event:
                return i
        return None

    @classmethod
    def empty(cls) -> "RankedRootCauses":
        return cls(())


@dataclass(frozen=True)
class EngineConfig:
    """Everything the end-to-end engine needs besides the incident and rules."""

    catalog: EventTypeCatalog
    params: RankParams = RankParams()
    radius: int = DEFAULT_RADIUS
    frequencies: FrequencyTable = FrequencyTable.empty()


def power_iteration(
    n: int,
    src: np.ndarray,
    dst: np.ndarray,
    weights: np.ndarray,
    personalization: np.ndarray,
    params: RankParams,
) -> np.ndarray:
    """Personalized PageRank by power iteration over an edge list.

    Rows are normalized by total outgoing weight; mass on rows without
    outgoing edges is redistributed according to the personalization vector.
    Starts from the personalization vector and stops when the L1 change
    drops to `tol` or after `max_iter` iterations.
    """
    p = personalization
    out_sum = np.bincount(src, weights=weights, minlength=n) if len(src) else np.zeros(n)
    dangling = out_sum == 0
    norm = np.where(dangling, 1.0, out_sum)

    x = p.copy()
    for _ in range(params.max_iter):
        if len(src):
            contrib = x[src] * weights / norm[src]
            flowed = np.bincount(dst, weights=contrib, minlength=n)
        else:
            flowed = np.zeros(n)
        stranded = float(x[dangling].sum())
        x_next = params.alpha * (flowed + stranded * p) + (1.0 - params.alpha) * p
        delta = float(np.abs(x_next - x).sum())
        x = x_next
        if delta <= params.tol:
            break
    return x


def personalization_vector(ecg: EventCausalityGraph, f_n: float) -> np.ndarray:
    """Teleport vector over `ecg.events`: 1 for dangling events, f_n otherwise."""
    if not ecg.events:
        raise EmptyGraph("cannot build a personalization vector over zero events")
    raw = np.array([1.0 if ecg.dangling(e) else f_n for e in ecg.events])
    return raw / raw.sum()


def groot_rank(ecg: EventCausalityGraph, params: RankParams = RankParams()) -> dict[Event, float]:
    """Score every event in the causality graph; scores sum to 1."""
    if not ecg.events:
        raise EmptyGraph("cannot rank an event graph with no events")
    index = {e: i for i, e in enumerate(ecg.events)}
    n = len(ecg.events)
    src = np.fromiter((index[l.source] for l in ecg.links), dtype=np.int64, count=len(ecg.links))
    dst = np.fromiter((index[l.target] for l in ecg.links), dtype=np.int64, count=len(ecg.links))
    weights = np.fromiter((l.weight for l in ecg.links), dtype=np.float64, count=len(ecg.links))
    p = personalization_vector(ecg, params.f_n)
    scores = power_iteration(n, src, dst, weights, p, params)
    return {e: float(scores[i]) for e, i in index.items()}


def access_distance_sum(
    sub: DependencySubgraph, initial_services: Sequence[str] | frozenset[str], service: str
) -> int:
    """Sum of directed hop distances from each initial service to `service`.

    An unreachable leg counts as d_m + 1 where d_m = |nodes| - 1 is the
    longest possible simple path in the subgraph.
    """
    if service not in sub.nodes:
        raise UnknownService(f"service '{service}' is not in the dependency subgraph")
    unreachable = len(sub.nodes)  # d_m + 1
    total = 0
    for v in sorted(set(initial_services)):
        dist = bfs_within(v, sub.successors, depth=len(sub.nodes))
        total += dist.get(service, unreachable)
    return total


def break_ties(
    scored: Mapping[Event, float],
    sub: DependencySubgraph,
    initial_services: frozenset[str],
    frequencies: FrequencyTable = FrequencyTable.empty(),
    domain_tag: str | None = None,
) -> RankedRootCauses:
    """Order scored events into the final ranking.

    Events whose scores agree within a 1e-9 relative tolerance form a tie
    group; inside a group, smaller access-distance sums win, then higher
    historical frequency, then canonical event identity.
    """
    if not scored:
        return RankedRootCauses.empty()

    # one BFS per initial service covers every candidate
    unreachable = len(sub.nodes)
    dist_maps = [
        bfs_within(v, sub.successors, depth=len(sub.nodes))
        for v in sorted(set(initial_services))
    ]

    def distance(service: str) -> int:
        if service not in sub.nodes:
            raise UnknownService(f"service '{service}' is not in the dependency subgraph")
        return sum(dist.get(service, unreachable) for dist in dist_maps)

    by_score = sorted(scored.items(), key=lambda kv: (-kv[1], kv[0].sort_key))
    groups: list[list[tuple[Event, float]]] = []
    for event, score in by_score:
        if groups and math.isclose(score, groups[-1][0][1], rel_tol=1e-9, abs_tol=1e-12):
            groups[-1].append((event, score))
        else:
            groups.append([(event, score)])

    entries: list[RankedEntry] = []
    for group in groups:
        decorated = [
            RankedEntry(
                event=event,
                score=score,
                access_distance_sum=distance(event.service),
                frequency=frequencies.lookup(domain_tag, event.type_name),
            )
            for event, score in group
        ]
        decorated.sort(
            key=lambda en: (en.access_distance_sum, -en.frequency, en.event.sort_key)
        )
        entries.extend(decorated)
    return RankedRootCauses(tuple(entries))


@dataclass(frozen=True)
class AnalysisResult:
    """A ranking together with the causality graph it was computed from."""

    ecg: EventCausalityGraph
    ranking: RankedRootCauses


def analyze_incident(
    incident: Incident,
    rules: Sequence["Rule"],
    catalog: EventTypeCatalog,
    params: RankParams = RankParams(),
    frequencies: FrequencyTable = FrequencyTable.empty(),
    radius: int = DEFAULT_RADIUS,
) -> AnalysisResult:
    """Full pipeline: subgraph extraction, causality construction, ranking."""
    sub = extract_subgraph(incident.snapshot, incident.initial_services, radius)
    ecg = build_causality_graph(sub, incident.events, rules, catalog)
    if not ecg.events:
        return AnalysisResult(ecg, RankedRootCauses.empty())
    scores = groot_rank(ecg, params)
    ranking = break_ties(
        scores, ecg.subgraph, incident.initial_services, frequencies, incident.domain_tag
    )
    return AnalysisResult(ecg, ranking)


def rank_root_causes(
    incident: Incident,
    rules: Sequence["Rule"],
    catalog: EventTypeCatalog,
    params: RankParams = RankParams(),
    frequencies: FrequencyTable = FrequencyTable.empty(),
    radius: int = DEFAULT_RADIUS,
) -> RankedRootCauses:
    """Rank probable root-cause events for one incident."""
    return analyze_incident(incident, rules, catalog, params, frequencies, radius).ranking
