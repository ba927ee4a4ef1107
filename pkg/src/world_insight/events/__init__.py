"""
Histories and experiments (events).

Usage:
    from src.world_insight.events import parse_event, localize, event_holds

    event = parse_event("A: ends(⟨*;reward=1⟩) / ε", world.signature)
    event_holds(event, localize(history, q=10, k=3, s=0))
"""

from .automaton import NFA, CountingDFA, ExplicitDFA, LazyDFA
from .dsl import (
    EventPattern,
    ResultPredicate,
    parse_event,
    parse_result,
    parse_template,
    pretty,
)
from .history import (
    History,
    LocalHistory,
    localize,
    read_history_log,
    write_history_log,
)
from .matcher import EventTracker, event_holds, experimental_property, matching_moments
from .templates import FlagConstraint, StepTemplate

__all__ = [
    "NFA",
    "CountingDFA",
    "EventPattern",
    "EventTracker",
    "ExplicitDFA",
    "FlagConstraint",
    "History",
    "LazyDFA",
    "LocalHistory",
    "ResultPredicate",
    "StepTemplate",
    "event_holds",
    "experimental_property",
    "localize",
    "matching_moments",
    "parse_event",
    "parse_result",
    "parse_template",
    "pretty",
    "read_history_log",
    "write_history_log",
]
