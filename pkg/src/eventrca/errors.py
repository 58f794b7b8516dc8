"""Exception types raised across the analysis pipeline."""


class RcaError(Exception):
    """Base class for every error raised by this package."""


class DocumentError(RcaError):
    """A structured input document is malformed.

    Carries the offending file and field so the CLI can print an
    actionable diagnostic.
    """

    def __init__(self, message: str, *, path: str | None = None, field: str | None = None):
        self.path = path
        self.field = field
        prefix = ""
        if path:
            prefix += f"{path}: "
        if field:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)


# -- model ------------------------------------------------------------------

class UnknownEventType(RcaError):
    """An event names a type absent from the catalog."""


class SchemaMismatch(RcaError):
    """Event properties do not conform to the schema of their type."""


class EventOutsideLookback(RcaError):
    """An event's start time falls outside its type's lookback window."""


# -- dependency graph -------------------------------------------------------

class DanglingEdgeEndpoint(RcaError):
    """A dependency edge references a service that is not a node."""


class SelfLoop(RcaError):
    """A dependency edge from a service to itself."""


class UnknownInitialService(RcaError):
    """An initial service is not present in the dependency graph."""


class UnknownAttachService(RcaError):
    """The attach point for a dynamic service does not exist."""


class DuplicateService(RcaError):
    """A dynamically added service already exists in the subgraph."""


class UnknownService(RcaError):
    """A service is not present in the dependency subgraph."""


# -- rules ------------------------------------------------------------------

class UnknownEventTypeInRule(RcaError):
    """A rule references an event type absent from the catalog."""


class BadConditionReference(RcaError):
    """A condition references a property that does not resolve."""


class BadWeight(RcaError):
    """A rule weight lies outside (0, 1]."""


class ConditionSyntaxError(RcaError):
    """Condition text failed to parse; carries the character position."""

    def __init__(self, message: str, position: int):
        self.message = message
        self.position = position
        super().__init__(f"{message} (at position {position})")


class MissingTargetEvent(RcaError):
    """A condition references target properties but no target was given."""


class ConflictingRules(RcaError):
    """Two rules of the same status claim one event-type pair."""


class SelfLoopInSameGraph(RcaError):
    """A same-service rule links an event type to itself."""


# -- causality --------------------------------------------------------------

class TemplateInterpolationError(RcaError):
    """A dynamic-rule template placeholder has no matching property."""


# -- ranking ----------------------------------------------------------------

class EmptyGraph(RcaError):
    """Ranking was asked to score an event graph with no events."""


# -- harness ----------------------------------------------------------------

class EmptyCorpus(RcaError):
    """An evaluation or validation was given no incidents."""


class UnlabeledIncident(RcaError):
    """Evaluation requires a label on every incident."""


class InfeasibleParams(RcaError):
    """Simulation parameters cannot produce a usable scenario."""
