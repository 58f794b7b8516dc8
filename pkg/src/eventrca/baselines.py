"""Comparison approaches: naive service-level PageRank and the non-adaptive engine."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .depgraph import extract_subgraph
from .model import EventTypeCatalog, Incident
from .ranking import (
    DEFAULT_RADIUS,
    FrequencyTable,
    RankedRootCauses,
    RankParams,
    power_iteration,
    rank_root_causes,
)
from .rules import Rule, RuleKind


@dataclass(frozen=True)
class SeverityConfig:
    """Per-event-type severity scores used by the naive baseline."""

    severities: Mapping[str, float] = field(default_factory=dict)
    default: float = 1.0

    def __post_init__(self):
        if self.default < 0 or any(s < 0 for s in self.severities.values()):
            raise ValueError("severities must be >= 0")

    def lookup(self, type_name: str) -> float:
        return self.severities.get(type_name, self.default)


def naive_rank(
    incident: Incident,
    severities: SeverityConfig = SeverityConfig(),
    params: RankParams = RankParams(),
    radius: int = DEFAULT_RADIUS,
) -> list[tuple[str, float]]:
    """Service-level PageRank over the dependency subgraph.

    Each service's teleport mass is its normalized severity sum; link
    weights are uniform. Returns services ordered by score (descending,
    name as the deterministic fallback).
    """
    sub = extract_subgraph(incident.snapshot, incident.initial_services, radius)
    nodes = sorted(sub.nodes)
    index = {s: i for i, s in enumerate(nodes)}
    raw = np.zeros(len(nodes))
    for event in incident.events:
        if event.service in index:
            raw[index[event.service]] += severities.lookup(event.type_name)
    total = raw.sum()
    if total == 0:
        return []
    p = raw / total
    edges = sorted(sub.edges)
    src = np.fromiter((index[a] for a, _ in edges), dtype=np.int64, count=len(edges))
    dst = np.fromiter((index[b] for _, b in edges), dtype=np.int64, count=len(edges))
    weights = np.ones(len(edges))
    scores = power_iteration(len(nodes), src, dst, weights, p, params)
    order = sorted(zip(nodes, scores), key=lambda kv: (-kv[1], kv[0]))
    return [(service, float(score)) for service, score in order]


def downgrade_rules(rules: Sequence[Rule]) -> list[Rule]:
    """Strip the context-aware parts of a rule set.

    Conditional rules lose their condition; dynamic rules are dropped
    entirely (their target service does not exist without creation). When
    stripping a condition leaves two basic rules on one pair, the one that
    was conditional wins, since it was the effective rule.
    """
    out: dict[tuple, Rule] = {}
    for rule in rules:
        if rule.kind == RuleKind.DYNAMIC:
            continue
        key = (rule.rule_scope, rule.source, rule.target)
        basified = replace(rule, condition=None, condition_text=None)
        if key in out and not rule.conditional:
            continue
        out[key] = basified
    return list(out.values())


def dropped_dynamic_rules(rules: Sequence[Rule]) -> list[str]:
    """Names of dynamic rules the non-adaptive approach cannot express."""
    return [r.name for r in rules if r.kind == RuleKind.DYNAMIC]


def non_adaptive_rank(
    incident: Incident,
    rules: Sequence[Rule],
    catalog: EventTypeCatalog,
    params: RankParams = RankParams(),
    frequencies: FrequencyTable = FrequencyTable.empty(),
    radius: int = DEFAULT_RADIUS,
) -> RankedRootCauses:
    """The full engine run with the downgraded (context-free) rule set."""
    return rank_root_causes(
        incident, downgrade_rules(rules), catalog, params, frequencies, radius
    )
