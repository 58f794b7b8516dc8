"""Causal-link construction rules and their management graphs.

Rules are managed through two graphs keyed by (source event type, target
event type): Same-Graph for links within one service, Diff-Graph for links
across services (including dynamically created ones). Each directed pair
holds at most one rule; a conditional rule overwrites a basic rule on the
same pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .conditions import (
    ConditionExpr,
    check_condition_refs,
    condition_to_text,
    parse_condition,
)
from .errors import (
    BadWeight,
    ConditionSyntaxError,
    ConflictingRules,
    EmptyCorpus,
    SelfLoopInSameGraph,
    UnknownEventTypeInRule,
)
from .model import EventTypeCatalog

if TYPE_CHECKING:
    from .model import Incident
    from .ranking import EngineConfig


class RuleKind(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class Direction(enum.Enum):
    """Orientation of the emitted causal link relative to the rule's events.

    CAUSED_BY links source -> target (the source event is possibly caused by
    the target event); CAUSES links target -> source.
    """

    CAUSED_BY = "caused_by"
    CAUSES = "causes"


class ServiceScope(enum.Enum):
    """Where a static rule looks for target events, relative to the source."""

    SELF = "self"
    OUTGOING = "outgoing"
    INCOMING = "incoming"


class RuleScope(enum.Enum):
    """Which management graph a rule belongs to."""

    SAME = "same"
    DIFF = "diff"


@dataclass(frozen=True)
class Rule:
    """One causal-link construction rule.

    Static rules locate target events on the source's own service (SELF) or
    its direct neighbours (OUTGOING/INCOMING). Dynamic rules instead carry a
    service-name template with `{prop}` placeholders interpolated from the
    source event, and materialize both the service and the target event.
    """

    kind: RuleKind
    source: str
    target: str
    direction: Direction = Direction.CAUSED_BY
    scope: ServiceScope | None = None
    template: str | None = None
    condition: ConditionExpr | None = None
    condition_text: str | None = None
    weight: float = 1.0

    def __post_init__(self):
        if not (0 < self.weight <= 1):
            raise BadWeight(f"rule weight {self.weight} must lie in (0, 1]")
        if self.kind == RuleKind.STATIC:
            if self.scope is None or self.template is not None:
                raise ValueError("static rules take a service scope, not a template")
            if self.scope == ServiceScope.SELF and self.source == self.target:
                raise SelfLoopInSameGraph(
                    f"self-service rule '{self.source}' -> '{self.target}' links a type to itself"
                )
        else:
            if not self.template or self.scope is not None:
                raise ValueError("dynamic rules take a non-empty service template")

    @property
    def conditional(self) -> bool:
        return self.condition is not None

    @property
    def rule_scope(self) -> RuleScope:
        if self.kind == RuleKind.STATIC and self.scope == ServiceScope.SELF:
            return RuleScope.SAME
        return RuleScope.DIFF

    @property
    def name(self) -> str:
        """Stable human-readable label used in exports and diagnostics."""
        if self.kind == RuleKind.DYNAMIC:
            where = self.template
        else:
            assert self.scope is not None
            where = self.scope.value
        suffix = "?" if self.conditional else ""
        return f"{self.kind.value}:{self.source}->{self.target}@{where}{suffix}"


def parse_rule(obj: Mapping, catalog: EventTypeCatalog, index: int = 0) -> Rule:
    """Build and validate one rule from its document form."""
    where = f"rule #{index}"
    try:
        kind = RuleKind(obj["kind"])
        source = obj["source"]
        target = obj["target"]
        direction = Direction(obj.get("direction", "caused_by"))
    except KeyError as exc:
        raise UnknownEventTypeInRule(f"{where}: missing field {exc}") from None
    except ValueError as exc:
        raise UnknownEventTypeInRule(f"{where}: {exc}") from None

    for type_name in (source, target):
        if type_name not in catalog:
            raise UnknownEventTypeInRule(f"{where}: event type '{type_name}' is not cataloged")

    if "service" not in obj:
        raise UnknownEventTypeInRule(f"{where}: missing field 'service'")
    service = obj["service"]
    scope: ServiceScope | None = None
    template: str | None = None
    if kind == RuleKind.STATIC:
        try:
            scope = ServiceScope(service)
        except ValueError:
            raise UnknownEventTypeInRule(
                f"{where}: static rule service must be self/outgoing/incoming, got '{service}'"
            ) from None
    else:
        template = service

    weight = obj.get("weight", 1.0)
    if not isinstance(weight, (int, float)) or isinstance(weight, bool):
        raise BadWeight(f"{where}: weight must be a number, got {weight!r}")

    condition = None
    condition_text = obj.get("condition")
    if condition_text is not None:
        try:
            condition = parse_condition(condition_text)
        except ConditionSyntaxError as exc:
            raise ConditionSyntaxError(f"{where}: {exc.message}", exc.position) from None
        target_type = catalog.get(target) if kind == RuleKind.STATIC else None
        check_condition_refs(condition, catalog.get(source), target_type)
        condition_text = condition_to_text(condition)

    return Rule(
        kind=kind,
        source=source,
        target=target,
        direction=direction,
        scope=scope,
        template=template,
        condition=condition,
        condition_text=condition_text,
        weight=float(weight),
    )


def parse_rules(objs: Sequence[Mapping], catalog: EventTypeCatalog) -> list[Rule]:
    """Parse a rule document (a list of rule objects) against the catalog."""
    return [parse_rule(obj, catalog, i) for i, obj in enumerate(objs)]


def rule_to_object(rule: Rule) -> dict:
    obj: dict = {
        "kind": rule.kind.value,
        "source": rule.source,
        "target": rule.target,
        "direction": rule.direction.value,
        "service": rule.template if rule.kind == RuleKind.DYNAMIC else rule.scope.value,
        "weight": rule.weight,
    }
    if rule.condition_text is not None:
        obj["condition"] = rule.condition_text
    return obj


# -- rule management graphs ---------------------------------------------------

class RuleStatus(enum.Enum):
    BASIC = "basic"
    CONDITIONAL = "conditional"


def status_of(rule: Rule) -> RuleStatus:
    return RuleStatus.CONDITIONAL if rule.conditional else RuleStatus.BASIC


PairKey = tuple[str, str]


@dataclass(frozen=True)
class RuleGraphs:
    """Copy-on-write rule-relationship graphs.

    `warnings` describes the operation that produced this instance (e.g.
    overwrites) and is excluded from equality, so extraction followed by a
    rebuild compares equal to the original.
    """

    same_graph: Mapping[PairKey, Rule] = field(default_factory=dict)
    diff_graph: Mapping[PairKey, Rule] = field(default_factory=dict)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def empty(cls) -> "RuleGraphs":
        return cls({}, {})

    def graph_for(self, scope: RuleScope) -> Mapping[PairKey, Rule]:
        return self.same_graph if scope == RuleScope.SAME else self.diff_graph

    def lookup(self, scope: RuleScope, source: str, target: str) -> Rule | None:
        return self.graph_for(scope).get((source, target))


def _check_same_scope(rule: Rule) -> None:
    if rule.rule_scope == RuleScope.SAME and rule.source == rule.target:
        raise SelfLoopInSameGraph(
            f"rule {rule.name} would create a self-loop in the same-service graph"
        )


def build_rule_graphs(rules: Iterable[Rule]) -> RuleGraphs:
    """Index validated rules into the two management graphs.

    A conditional rule replaces a basic rule on the same pair (recorded in
    `warnings`); two rules of the same status on one pair are a hard error.
    """
    same: dict[PairKey, Rule] = {}
    diff: dict[PairKey, Rule] = {}
    warnings: list[str] = []
    for rule in rules:
        _check_same_scope(rule)
        graph = same if rule.rule_scope == RuleScope.SAME else diff
        key = (rule.source, rule.target)
        existing = graph.get(key)
        if existing is None:
            graph[key] = rule
            continue
        if status_of(existing) == status_of(rule):
            raise ConflictingRules(
                f"two {status_of(rule).value} rules on pair {key} in the "
                f"{rule.rule_scope.value} graph: {existing.name} and {rule.name}"
            )
        winner = rule if rule.conditional else existing
        loser = existing if rule.conditional else rule
        graph[key] = winner
        warnings.append(f"conditional rule {winner.name} overwrites basic rule {loser.name}")
    return RuleGraphs(same_graph=same, diff_graph=diff, warnings=tuple(warnings))


def add_or_update_rule(graphs: RuleGraphs, rule: Rule) -> tuple[RuleGraphs, list[str]]:
    """Set or replace the entry for the rule's pair; warns on replacement."""
    _check_same_scope(rule)
    same = dict(graphs.same_graph)
    diff = dict(graphs.diff_graph)
    graph = same if rule.rule_scope == RuleScope.SAME else diff
    key = (rule.source, rule.target)
    warnings: list[str] = []
    existing = graph.get(key)
    if existing is not None:
        warnings.append(
            f"replacing existing {status_of(existing).value} rule {existing.name} "
            f"on pair {key} with {status_of(rule).value} rule {rule.name}"
        )
    graph[key] = rule
    return RuleGraphs(same_graph=same, diff_graph=diff, warnings=tuple(warnings)), warnings


def remove_rule(
    graphs: RuleGraphs, source: str, target: str, scope: RuleScope
) -> RuleGraphs:
    """Remove the entry for a pair; removing an absent entry warns and no-ops."""
    same = dict(graphs.same_graph)
    diff = dict(graphs.diff_graph)
    graph = same if scope == RuleScope.SAME else diff
    warnings: tuple[str, ...] = ()
    if (source, target) in graph:
        del graph[(source, target)]
    else:
        warnings = (f"no {scope.value}-graph rule on pair {(source, target)} to remove",)
    return RuleGraphs(same_graph=same, diff_graph=diff, warnings=warnings)


def extract_rules(graphs: RuleGraphs) -> list[Rule]:
    """Convert each graph entry back to its rule, deterministically ordered."""
    out: list[Rule] = []
    for graph in (graphs.same_graph, graphs.diff_graph):
        out.extend(graph[key] for key in sorted(graph))
    return out


# -- validation against a labeled corpus --------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    """Accuracy of the full engine under a rule set on a labeled corpus."""

    total: int
    top1: float
    top3: float
    ranks: tuple[int | None, ...]  # per incident, 1-based rank of the label

    def accuracy_at(self, k: int) -> float:
        hits = sum(1 for r in self.ranks if r is not None and r <= k)
        return hits / self.total


def validate_rules(
    rules: Sequence[Rule],
    corpus: Sequence["Incident"],
    config: "EngineConfig",
) -> ValidationReport:
    """Run the engine over every labeled incident and report label ranks."""
    from .ranking import rank_root_causes  # deferred: ranking depends on this module

    if not corpus:
        raise EmptyCorpus("validation needs at least one labeled incident")
    ranks: list[int | None] = []
    for incident in corpus:
        if incident.label is None:
            raise EmptyCorpus("validation corpus contains an unlabeled incident")
        ranked = rank_root_causes(
            incident,
            rules,
            config.catalog,
            params=config.params,
            frequencies=config.frequencies,
            radius=config.radius,
        )
        ranks.append(ranked.rank_of(incident.label))
    report = ValidationReport(total=len(corpus), top1=0.0, top3=0.0, ranks=tuple(ranks))
    return replace(report, top1=report.accuracy_at(1), top3=report.accuracy_at(3))
