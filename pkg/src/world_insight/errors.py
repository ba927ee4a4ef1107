"""
Error hierarchy for world_insight.

Every failure the library raises on purpose derives from WorldInsightError.
An incorrect move is not an error: the engine returns an IncorrectMove value.
"""

from typing import Optional


class WorldInsightError(Exception):
    """Base class for all library errors."""


class MalformedDistributionError(WorldInsightError):
    """An IntervalDistribution that cannot be built or sampled (e.g. no outcomes)."""


class MalformedActionError(WorldInsightError):
    """An action vector outside the world's signature. A caller bug, not a world fact."""


class SignatureMismatchError(WorldInsightError):
    """Two worlds (or a world and an event) disagree on their ScalarSignature."""


class LocalHistoryError(WorldInsightError):
    """A moment index outside the history, or a kind-B event on a window without origin."""


class ResourceCapError(WorldInsightError):
    """An exhaustive enumeration grew past its configured cap."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded the configured cap of {cap:,}")
        self.what = what
        self.cap = cap


class EventSyntaxError(WorldInsightError):
    """The event DSL text does not parse."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.text = text


class EventSemanticError(WorldInsightError):
    """The event DSL text parses but is not meaningful (unknown names, A-kind with origin operators)."""


class SpecParseError(WorldInsightError):
    """A world/test/grouping spec file is unreadable or structurally wrong."""

    def __init__(self, message: str, location: Optional[str] = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class SpecValidationError(WorldInsightError):
    """A spec parsed but breaks distribution or well-formedness constraints."""

    def __init__(self, problems: list[str]):
        super().__init__(f"{len(problems)} validation problem(s): " + "; ".join(problems[:5]))
        self.problems = problems
