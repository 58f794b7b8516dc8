"""Top-k accuracy and runtime evaluation of the engine and its baselines."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .baselines import (
    SeverityConfig,
    dropped_dynamic_rules,
    naive_rank,
    non_adaptive_rank,
)
from .errors import EmptyCorpus, UnlabeledIncident
from .model import Incident
from .ranking import EngineConfig, FrequencyTable, rank_root_causes
from .rules import Rule

COMBINED = "combined"

GROOT = "groot"
NON_ADAPTIVE = "non_adaptive"
NAIVE = "naive"


@dataclass(frozen=True)
class Approach:
    """A named ranking strategy evaluated by its label rank per incident."""

    name: str
    rank_label: Callable[[Incident], int | None]


def make_approaches(
    rules: Sequence[Rule],
    config: EngineConfig,
    severities: SeverityConfig = SeverityConfig(),
    names: Sequence[str] = (GROOT, NON_ADAPTIVE, NAIVE),
) -> list[Approach]:
    """The full engine, the non-adaptive variant, and the naive baseline.

    The naive baseline works at service granularity: an incident counts as
    a top-k hit when the labeled event's service is among the top k services.
    """

    def groot(incident: Incident) -> int | None:
        ranked = rank_root_causes(
            incident,
            rules,
            config.catalog,
            params=config.params,
            frequencies=config.frequencies,
            radius=config.radius,
        )
        return ranked.rank_of(incident.label) if incident.label else None

    def non_adaptive(incident: Incident) -> int | None:
        ranked = non_adaptive_rank(
            incident,
            rules,
            config.catalog,
            params=config.params,
            frequencies=config.frequencies,
            radius=config.radius,
        )
        return ranked.rank_of(incident.label) if incident.label else None

    def naive(incident: Incident) -> int | None:
        if incident.label is None:
            return None
        services = naive_rank(incident, severities, config.params, config.radius)
        for position, (service, _) in enumerate(services, start=1):
            if service == incident.label.service:
                return position
        return None

    available = {GROOT: groot, NON_ADAPTIVE: non_adaptive, NAIVE: naive}
    return [Approach(name, available[name]) for name in names]


@dataclass(frozen=True)
class EvaluationReport:
    """Accuracy and runtime of each approach, per incident kind and combined."""

    approaches: tuple[str, ...]
    kinds: tuple[str, ...]  # includes COMBINED
    incident_counts: Mapping[str, int]
    accuracy: Mapping[tuple[str, str, int], float]  # (approach, kind, k) -> fraction
    runtime_ms: Mapping[str, tuple[float, float]]  # approach -> (mean, max)
    per_incident: tuple[tuple[int, str, str, int | None], ...]  # (idx, kind, approach, rank)
    ks: tuple[int, ...]
    notes: tuple[str, ...] = field(default=())

    def to_document(self, include_runtime: bool = True) -> dict:
        doc: dict = {
            "approaches": list(self.approaches),
            "kinds": list(self.kinds),
            "ks": list(self.ks),
            "incident_counts": dict(sorted(self.incident_counts.items())),
            "accuracy": [
                {"approach": a, "kind": kind, "k": k, "fraction": self.accuracy[(a, kind, k)]}
                for a in self.approaches
                for kind in self.kinds
                for k in self.ks
            ],
            "per_incident": [
                {"incident": idx, "kind": kind, "approach": approach, "label_rank": rank}
                for idx, kind, approach, rank in self.per_incident
            ],
            "notes": list(self.notes),
        }
        if include_runtime:
            doc["runtime_ms"] = {
                a: {"mean": mean, "max": peak} for a, (mean, peak) in self.runtime_ms.items()
            }
        return doc

    def to_table(self, include_runtime: bool = True) -> str:
        """Plain-text comparison: one row per approach, top-k columns per kind."""
        header = ["approach"] + [
            f"{kind} top-{k}" for kind in self.kinds for k in self.ks
        ]
        if include_runtime:
            header.append("runtime ms (mean/max)")
        rows = [header]
        for approach in self.approaches:
            row = [approach]
            for kind in self.kinds:
                for k in self.ks:
                    row.append(f"{self.accuracy[(approach, kind, k)]:.1%}")
            if include_runtime:
                mean, peak = self.runtime_ms[approach]
                row.append(f"{mean:.1f}/{peak:.1f}")
            rows.append(row)
        counts = ", ".join(f"{kind}: {self.incident_counts[kind]}" for kind in self.kinds)
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.append(f"incidents: {counts}")
        return "\n".join(lines)


def evaluate(
    approaches: Sequence[Approach],
    corpus: Sequence[Incident],
    ks: Sequence[int] = (1, 3),
    workers: int = 1,
    notes: Sequence[str] = (),
) -> EvaluationReport:
    """Rank every incident under every approach and aggregate top-k accuracy.

    Incidents fan out over `workers` threads; results are keyed by incident
    index before aggregation, so the report does not depend on the worker
    count. Runtimes cover the analysis call only, not document I/O.
    """
    if not corpus:
        raise EmptyCorpus("evaluation needs at least one incident")
    for incident in corpus:
        if incident.label is None:
            raise UnlabeledIncident("every evaluated incident needs a ground-truth label")

    def run_one(task: tuple[int, int]) -> tuple[int | None, float]:
        incident_idx, approach_idx = task
        started = time.perf_counter()
        rank = approaches[approach_idx].rank_label(corpus[incident_idx])
        elapsed_ms = (time.perf_counter() - started) * 1000
        return rank, elapsed_ms

    tasks = [(i, a) for i in range(len(corpus)) for a in range(len(approaches))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, tasks))
    else:
        outcomes = [run_one(t) for t in tasks]

    ranks: dict[tuple[int, int], int | None] = {}
    runtimes: dict[int, list[float]] = {a: [] for a in range(len(approaches))}
    for (incident_idx, approach_idx), (rank, elapsed) in zip(tasks, outcomes):
        ranks[(incident_idx, approach_idx)] = rank
        runtimes[approach_idx].append(elapsed)

    kind_of = [incident.domain_tag or "untagged" for incident in corpus]
    kinds = sorted(set(kind_of)) + [COMBINED]
    counts = {kind: sum(1 for k in kind_of if k == kind) for kind in kinds}
    counts[COMBINED] = len(corpus)

    accuracy: dict[tuple[str, str, int], float] = {}
    for approach_idx, approach in enumerate(approaches):
        for kind in kinds:
            members = [
                i for i in range(len(corpus)) if kind == COMBINED or kind_of[i] == kind
            ]
            for k in ks:
                hits = sum(
                    1
                    for i in members
                    if (r := ranks[(i, approach_idx)]) is not None and r <= k
                )
                accuracy[(approach.name, kind, k)] = hits / len(members) if members else 0.0

    per_incident = tuple(
        (i, kind_of[i], approaches[a].name, ranks[(i, a)])
        for i in range(len(corpus))
        for a in range(len(approaches))
    )
    runtime_ms = {
        approaches[a].name: (
            sum(times) / len(times),
            max(times),
        )
        for a, times in runtimes.items()
    }
    return EvaluationReport(
        approaches=tuple(a.name for a in approaches),
        kinds=tuple(kinds),
        incident_counts=counts,
        accuracy=accuracy,
        runtime_ms=runtime_ms,
        per_incident=per_incident,
        ks=tuple(ks),
        notes=tuple(notes),
    )


def evaluate_standard(
    rules: Sequence[Rule],
    corpus: Sequence[Incident],
    config: EngineConfig,
    severities: SeverityConfig = SeverityConfig(),
    ks: Sequence[int] = (1, 3),
    workers: int = 1,
) -> EvaluationReport:
    """Evaluate the three standard approaches, noting dropped dynamic rules."""
    notes = []
    dropped = dropped_dynamic_rules(rules)
    if dropped:
        notes.append(
            "non_adaptive drops dynamic rules (no target service exists without "
            f"creation): {', '.join(dropped)}"
        )
    approaches = make_approaches(rules, config, severities)
    return evaluate(approaches, corpus, ks=ks, workers=workers, notes=tuple(notes))


def frequency_table_from_corpus(corpus: Sequence[Incident]) -> FrequencyTable:
    """Historical root-cause frequencies from a labeled corpus."""
    by_domain: dict[tuple[str, str], int] = {}
    fallback: dict[str, int] = {}
    for incident in corpus:
        if incident.label is None:
            continue
        type_name = incident.label.type_name
        fallback[type_name] = fallback.get(type_name, 0) + 1
        if incident.domain_tag:
            key = (incident.domain_tag, type_name)
            by_domain[key] = by_domain.get(key, 0) + 1
    return FrequencyTable(by_domain=by_domain, fallback=fallback)
