"""Event-graph based root cause analysis for microservice incidents.

The pipeline: extract the dependency subgraph around the alerted services,
build an event causality graph with user-defined causal rules (dynamic
rules first, then recursive link expansion), and rank probable root-cause
events with a weighted personalized PageRank plus deterministic
tie-breaking. Baselines, a synthetic incident simulator, and a top-k
evaluation harness round out the toolkit.
"""

from .baselines import SeverityConfig, downgrade_rules, naive_rank, non_adaptive_rank
from .causality import (
    CausalLink,
    EventCausalityGraph,
    apply_dynamic_rules,
    build_causality_graph,
    candidate_targets,
)
from .conditions import ConditionExpr, condition_to_text, eval_condition, parse_condition
from .depgraph import (
    DependencySubgraph,
    GlobalDependencyGraph,
    add_dynamic_service,
    extract_subgraph,
)
from .evaluate import (
    Approach,
    EvaluationReport,
    evaluate,
    evaluate_standard,
    frequency_table_from_corpus,
    make_approaches,
)
from .model import (
    Event,
    EventType,
    EventTypeCatalog,
    Incident,
    PropertyKind,
    PropertySpec,
    validate_event,
    validate_incident,
)
from .ranking import (
    AnalysisResult,
    EngineConfig,
    FrequencyTable,
    RankedEntry,
    RankedRootCauses,
    RankParams,
    access_distance_sum,
    analyze_incident,
    break_ties,
    groot_rank,
    personalization_vector,
    rank_root_causes,
)
from .rules import (
    Direction,
    Rule,
    RuleGraphs,
    RuleKind,
    RuleScope,
    ServiceScope,
    ValidationReport,
    add_or_update_rule,
    build_rule_graphs,
    extract_rules,
    parse_rules,
    remove_rule,
    validate_rules,
)
from .simulate import (
    SimulationParams,
    generate_corpus,
    generate_topology,
    simulate_incident,
    standard_catalog,
    standard_rules,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "Approach",
    "CausalLink",
    "ConditionExpr",
    "DependencySubgraph",
    "Direction",
    "EngineConfig",
    "EvaluationReport",
    "Event",
    "EventCausalityGraph",
    "EventType",
    "EventTypeCatalog",
    "FrequencyTable",
    "GlobalDependencyGraph",
    "Incident",
    "PropertyKind",
    "PropertySpec",
    "RankParams",
    "RankedEntry",
    "RankedRootCauses",
    "Rule",
    "RuleGraphs",
    "RuleKind",
    "RuleScope",
    "ServiceScope",
    "SeverityConfig",
    "SimulationParams",
    "ValidationReport",
    "access_distance_sum",
    "add_dynamic_service",
    "add_or_update_rule",
    "analyze_incident",
    "apply_dynamic_rules",
    "break_ties",
    "build_causality_graph",
    "build_rule_graphs",
    "candidate_targets",
    "condition_to_text",
    "downgrade_rules",
    "eval_condition",
    "evaluate",
    "evaluate_standard",
    "extract_rules",
    "extract_subgraph",
    "frequency_table_from_corpus",
    "generate_corpus",
    "generate_topology",
    "groot_rank",
    "make_approaches",
    "naive_rank",
    "non_adaptive_rank",
    "parse_condition",
    "parse_rules",
    "personalization_vector",
    "rank_root_causes",
    "remove_rule",
    "simulate_incident",
    "standard_catalog",
    "standard_rules",
    "validate_event",
    "validate_incident",
    "validate_rules",
]
