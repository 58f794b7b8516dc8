"""Loading and saving the structured text documents the engine exchanges.

Every document is a single JSON object (or list, for rules). Writers are
deterministic: sorted keys, two-space indent, trailing newline.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

from .depgraph import GlobalDependencyGraph
from .errors import DocumentError, RcaError
from .model import (
    Event,
    EventType,
    EventTypeCatalog,
    Incident,
    PropertyKind,
    PropertySpec,
    validate_incident,
)
from .ranking import FrequencyTable
from .rules import Rule, parse_rules, rule_to_object


def dump_document(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise DocumentError("file not found", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}", path=str(path)) from None


def _require(obj: Mapping, field: str, path: str):
    if field not in obj:
        raise DocumentError("required field is missing", path=path, field=field)
    return obj[field]


# -- event type catalog --------------------------------------------------------

def parse_catalog(obj: Mapping, path: str = "<catalog>") -> EventTypeCatalog:
    entries = _require(obj, "event_types", path)
    types = []
    for entry in entries:
        schema = tuple(
            PropertySpec(spec["property_name"], PropertyKind.from_name(spec["kind"]))
            for spec in entry.get("property_schema", [])
        )
        types.append(
            EventType(
                name=_require(entry, "name", path),
                lookback_seconds=_require(entry, "lookback_period", path),
                schema=schema,
            )
        )
    return EventTypeCatalog(types)


def catalog_to_object(catalog: EventTypeCatalog) -> dict:
    return {
        "event_types": [
            {
                "name": et.name,
                "lookback_period": et.lookback_seconds,
                "property_schema": [
                    {"property_name": spec.name, "kind": spec.kind.value} for spec in et.schema
                ],
            }
            for et in catalog
        ]
    }


def load_catalog(path: str | Path) -> EventTypeCatalog:
    return _wrap(lambda: parse_catalog(_read_json(path), str(path)), path)


# -- dependency graph ----------------------------------------------------------

def parse_global_graph(obj: Mapping, path: str = "<graph>") -> GlobalDependencyGraph:
    nodes = _require(obj, "nodes", path)
    edges = [tuple(e) for e in _require(obj, "edges", path)]
    for edge in edges:
        if len(edge) != 2:
            raise DocumentError(f"edge {list(edge)} must be a [from, to] pair", path=path, field="edges")
    return GlobalDependencyGraph.of(nodes, edges)


def graph_to_object(graph: GlobalDependencyGraph) -> dict:
    return {
        "nodes": sorted(graph.nodes),
        "edges": [list(e) for e in sorted(graph.edges)],
    }


def load_global_graph(path: str | Path) -> GlobalDependencyGraph:
    return _wrap(lambda: parse_global_graph(_read_json(path), str(path)), path)


# -- rules -----------------------------------------------------------------------

def load_rules(path: str | Path, catalog: EventTypeCatalog) -> list[Rule]:
    obj = _read_json(path)
    if not isinstance(obj, list):
        raise DocumentError("a rule document is a list of rule objects", path=str(path))
    return _wrap(lambda: parse_rules(obj, catalog), path)


def rules_to_object(rules: Sequence[Rule]) -> list[dict]:
    return [rule_to_object(rule) for rule in rules]


# -- events and incidents --------------------------------------------------------

def event_to_object(event: Event) -> dict:
    return {
        "service": event.service,
        "type_name": event.type_name,
        "start_time": event.start_time,
        "properties": dict(event.properties),
    }


def parse_event(obj: Mapping, path: str = "<event>") -> Event:
    return Event.of(
        service=_require(obj, "service", path),
        type_name=_require(obj, "type_name", path),
        start_time=_require(obj, "start_time", path),
        properties=obj.get("properties", {}),
    )


def incident_to_object(incident: Incident) -> dict:
    obj: dict = {
        "snapshot": graph_to_object(incident.snapshot),
        "initial_services": sorted(incident.initial_services),
        "trigger_time": incident.trigger_time,
        "events": [event_to_object(e) for e in incident.events],
    }
    if incident.label is not None:
        obj["label"] = event_to_object(incident.label)
    if incident.domain_tag is not None:
        obj["domain_tag"] = incident.domain_tag
    return obj


def parse_incident(
    obj: Mapping,
    catalog: EventTypeCatalog,
    path: str = "<incident>",
    snapshot: GlobalDependencyGraph | None = None,
) -> Incident:
    """Build a validated incident; `snapshot` overrides any embedded graph."""
    if snapshot is None:
        snapshot = parse_global_graph(_require(obj, "snapshot", path), path)
    label_obj = obj.get("label")
    incident = Incident(
        snapshot=snapshot,
        initial_services=frozenset(_require(obj, "initial_services", path)),
        events=tuple(parse_event(e, path) for e in _require(obj, "events", path)),
        trigger_time=_require(obj, "trigger_time", path),
        label=parse_event(label_obj, path) if label_obj is not None else None,
        domain_tag=obj.get("domain_tag"),
    )
    return validate_incident(incident, catalog)


def load_incident(
    path: str | Path,
    catalog: EventTypeCatalog,
    snapshot: GlobalDependencyGraph | None = None,
) -> Incident:
    return _wrap(lambda: parse_incident(_read_json(path), catalog, str(path), snapshot), path)


# -- frequency tables -------------------------------------------------------------

def parse_frequency_table(obj: Mapping, path: str = "<frequencies>") -> FrequencyTable:
    by_domain = {
        (domain, type_name): count
        for domain, counts in obj.get("domains", {}).items()
        for type_name, count in counts.items()
    }
    return FrequencyTable(by_domain=by_domain, fallback=dict(obj.get("default", {})))


def frequency_table_to_object(table: FrequencyTable) -> dict:
    domains: dict[str, dict[str, int]] = {}
    for (domain, type_name), count in sorted(table.by_domain.items()):
        domains.setdefault(domain, {})[type_name] = count
    return {"domains": domains, "default": dict(sorted(table.fallback.items()))}


def load_frequency_table(path: str | Path) -> FrequencyTable:
    return _wrap(lambda: parse_frequency_table(_read_json(path), str(path)), path)


# -- corpora ----------------------------------------------------------------------

MANIFEST_NAME = "manifest.json"


def write_corpus(
    directory: str | Path,
    incidents: Sequence[Incident],
    catalog: EventTypeCatalog,
    rules: Sequence[Rule] | None = None,
) -> Path:
    """One incident document per file plus a manifest (and shared catalog/rules)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, incident in enumerate(incidents):
        name = f"incident-{i:04d}.json"
        dump_document(incident_to_object(incident), directory / name)
        names.append(name)
    manifest: dict = {"incidents": names, "catalog": "catalog.json"}
    dump_document(catalog_to_object(catalog), directory / "catalog.json")
    if rules is not None:
        dump_document(rules_to_object(rules), directory / "rules.json")
        manifest["rules"] = "rules.json"
    return dump_document(manifest, directory / MANIFEST_NAME)


def load_corpus(
    directory: str | Path,
    catalog: EventTypeCatalog | None = None,
) -> tuple[EventTypeCatalog, list[Rule] | None, list[str], list[Incident]]:
    """Read a corpus directory back: (catalog, rules, file names, incidents)."""
    directory = Path(directory)
    manifest = _read_json(directory / MANIFEST_NAME)
    if catalog is None:
        catalog_name = manifest.get("catalog")
        if catalog_name is None:
            raise DocumentError(
                "manifest names no catalog and none was supplied",
                path=str(directory / MANIFEST_NAME),
                field="catalog",
            )
        catalog = load_catalog(directory / catalog_name)
    rules = None
    if manifest.get("rules"):
        rules = load_rules(directory / manifest["rules"], catalog)
    names = list(manifest.get("incidents", []))
    incidents = [load_incident(directory / name, catalog) for name in names]
    return catalog, rules, names, incidents


def _wrap(fn, path: str | Path):
    """Tag engine validation errors with the document they came from."""
    try:
        return fn()
    except DocumentError:
        raise
    except RcaError as exc:
        raise DocumentError(str(exc), path=str(path)) from exc
