"""Core domain types: event types, events, catalogs, and incidents.

Timestamps are epoch milliseconds (UTC); lookback periods are seconds.
All types are immutable after construction and safe to share between
concurrent analyses.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import (
    EventOutsideLookback,
    SchemaMismatch,
    UnknownEventType,
    UnknownInitialService,
)

if TYPE_CHECKING:
    from .depgraph import GlobalDependencyGraph

PropertyValue = str | int | float | bool


class PropertyKind(enum.Enum):
    """Primitive kinds an event property can hold."""

    TEXT = "text"
    INTEGER = "integer"
    REAL = "real"
    BOOLEAN = "boolean"

    @classmethod
    def from_name(cls, name: str) -> "PropertyKind":
        try:
            return cls(name)
        except ValueError:
            raise SchemaMismatch(f"unknown property kind '{name}'") from None


def kind_of_value(value: PropertyValue) -> PropertyKind:
    # bool must be tested before int: bool is an int subclass
    if isinstance(value, bool):
        return PropertyKind.BOOLEAN
    if isinstance(value, int):
        return PropertyKind.INTEGER
    if isinstance(value, float):
        return PropertyKind.REAL
    if isinstance(value, str):
        return PropertyKind.TEXT
    raise SchemaMismatch(f"unsupported property value {value!r}")


def default_for_kind(kind: PropertyKind) -> PropertyValue:
    return {
        PropertyKind.TEXT: "",
        PropertyKind.INTEGER: 0,
        PropertyKind.REAL: 0.0,
        PropertyKind.BOOLEAN: False,
    }[kind]


@dataclass(frozen=True)
class PropertySpec:
    """One (name, kind) entry of an event type's property schema."""

    name: str
    kind: PropertyKind


@dataclass(frozen=True)
class EventType:
    """A named kind of monitoring event with a lookback window and schema."""

    name: str
    lookback_seconds: float
    schema: tuple[PropertySpec, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise SchemaMismatch("event type name must be non-empty")
        if self.lookback_seconds < 0:
            raise SchemaMismatch(f"{self.name}: lookback must be >= 0")
        names = [spec.name for spec in self.schema]
        if len(set(names)) != len(names):
            raise SchemaMismatch(f"{self.name}: duplicate property names in schema")

    def kind_of(self, prop: str) -> PropertyKind | None:
        for spec in self.schema:
            if spec.name == prop:
                return spec.kind
        return None


class EventTypeCatalog:
    """Immutable name-indexed collection of event types."""

    def __init__(self, types: Iterable[EventType]):
        by_name: dict[str, EventType] = {}
        for et in types:
            if et.name in by_name:
                raise SchemaMismatch(f"duplicate event type '{et.name}' in catalog")
            by_name[et.name] = et
        self._by_name = by_name

    def __len__(self) -> int:
        return len(self._by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(sorted(self._by_name.values(), key=lambda et: et.name))

    def get(self, name: str) -> EventType:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownEventType(f"event type '{name}' is not in the catalog") from None


@dataclass(frozen=True)
class Event:
    """A monitoring event attached to one service.

    Identity is the full quadruple (service, type, start time, canonical
    properties); the stored property tuple is always sorted by name, so
    dataclass equality and hashing give event identity directly.
    """

    service: str
    type_name: str
    start_time: int
    properties: tuple[tuple[str, PropertyValue], ...] = ()

    @classmethod
    def of(
        cls,
        service: str,
        type_name: str,
        start_time: int,
        properties: Mapping[str, PropertyValue] | None = None,
    ) -> "Event":
        items = tuple(sorted((properties or {}).items()))
        return cls(service, type_name, int(start_time), items)

    @cached_property
    def props(self) -> dict[str, PropertyValue]:
        return dict(self.properties)

    @cached_property
    def sort_key(self) -> tuple[str, str, int, str]:
        # property values have mixed types; serialize for a total order
        return (self.service, self.type_name, self.start_time, json.dumps(self.properties))

    def describe(self) -> str:
        return f"{self.type_name}@{self.service}(t={self.start_time})"


def validate_event(event: Event, catalog: EventTypeCatalog) -> Event:
    """Check an event against the catalog and canonicalize it.

    Returns the event with properties sorted by name and integral values
    of real-kind properties coerced to float. Idempotent.
    """
    et = catalog.get(event.type_name)
    props = event.props
    expected = {spec.name: spec.kind for spec in et.schema}
    missing = sorted(set(expected) - set(props))
    extra = sorted(set(props) - set(expected))
    if missing or extra:
        raise SchemaMismatch(
            f"{event.describe()}: properties do not match schema of '{et.name}'"
            f" (missing={missing}, unexpected={extra})"
        )
    canonical: dict[str, PropertyValue] = {}
    for name, kind in expected.items():
        value = props[name]
        actual = kind_of_value(value)
        if kind == PropertyKind.REAL and actual == PropertyKind.INTEGER:
            value = float(value)
        elif actual != kind:
            raise SchemaMismatch(
                f"{event.describe()}: property '{name}' has kind {actual.value},"
                f" schema requires {kind.value}"
            )
        canonical[name] = value
    return Event.of(event.service, event.type_name, event.start_time, canonical)


@dataclass(frozen=True)
class Incident:
    """One analyzable case: a dependency snapshot plus observed events.

    The label, when present, is the ground-truth root cause. It usually
    identifies one of the listed events but may instead name an event a
    dynamic rule will create during analysis.
    """

    snapshot: "GlobalDependencyGraph"
    initial_services: frozenset[str]
    events: tuple[Event, ...]
    trigger_time: int
    label: Event | None = None
    domain_tag: str | None = None

    def labeled(self) -> bool:
        return self.label is not None


def validate_incident(incident: Incident, catalog: EventTypeCatalog) -> Incident:
    """Validate and canonicalize an incident at load time.

    Events are schema-checked, required to fall inside their type's
    lookback window relative to the trigger time, deduplicated by
    identity, and sorted for deterministic downstream processing.
    """
    if not incident.initial_services:
        raise UnknownInitialService("incident has no initial services")
    unknown = sorted(incident.initial_services - incident.snapshot.nodes)
    if unknown:
        raise UnknownInitialService(f"initial services not in snapshot: {unknown}")

    seen: dict[Event, None] = {}
    for raw in incident.events:
        event = validate_event(raw, catalog)
        lookback_ms = catalog.get(event.type_name).lookback_seconds * 1000
        if event.start_time > incident.trigger_time:
            raise EventOutsideLookback(
                f"{event.describe()} starts after the trigger time {incident.trigger_time}"
            )
        if event.start_time < incident.trigger_time - lookback_ms:
            raise EventOutsideLookback(
                f"{event.describe()} is older than the {lookback_ms:.0f}ms lookback window"
            )
        seen.setdefault(event, None)

    label = incident.label
    if label is not None:
        # the label may name a dynamically creatable event, so it is not
        # required to appear in the event list; it must still conform to
        # its (cataloged) type so identity comparisons hold after loading
        label = validate_event(label, catalog)

    return Incident(
        snapshot=incident.snapshot,
        initial_services=frozenset(incident.initial_services),
        events=tuple(sorted(seen, key=lambda e: e.sort_key)),
        trigger_time=incident.trigger_time,
        label=label,
        domain_tag=incident.domain_tag,
    )
