"""
Tests Module - Experiments With a Result

A test is an experiment (its condition) plus a result read from the present
step in the form ``x_i = constant``. Where the condition holds the test
function is defined and its value is the result; elsewhere it is undefined.

Key Concepts:
- Test: condition event + result predicate
- TestOutcome: defined? and, if so, the Boolean result
- Smallest property: the values a test took on each world state where it was defined
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Optional, Sequence

from src.world_insight.events.dsl import EventPattern, ResultPredicate, parse_event, parse_result
from src.world_insight.events.history import History, LocalHistory, localize
from src.world_insight.events.matcher import event_holds
from src.world_insight.world.signature import ScalarSignature

logger = logging.getLogger(__name__)

UNIVERSAL_CONDITION = "A: ⟨*;*⟩ / ε"


@dataclass(frozen=True, eq=False)
class Test:
    """
    A named test.

    Attributes:
        name: Identifier used in statistics and reports
        condition: The event that must hold for the test to be performed
        result: The x_i = constant predicate read from the present step
    """

    __test__ = False

    name: str
    condition: EventPattern
    result: ResultPredicate

    @property
    def lookahead(self) -> int:
        return self.condition.lookahead

    def describe(self) -> dict[str, str]:
        from src.world_insight.events.dsl import pretty

        return {
            "name": self.name,
            "condition": pretty(self.condition),
            "result": self.result.render(self.condition.signature),
        }


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    defined: bool
    value: Optional[bool] = None


UNDEFINED = TestOutcome(False)


def make_test(
    name: str, condition: str, result: str, signature: ScalarSignature
) -> Test:
    """
    Build a test from DSL text.

    Args:
        name: Test name
        condition: Event DSL string, e.g. "A: ⟨*;*⟩ / ε"
        result: "var=value", a bare value, or a flag such as "nobody(pickup)=false"
        signature: The world's signature

    Example:
        test = make_test("white", UNIVERSAL_CONDITION, "color=White", world.signature)
    """
    return Test(name, parse_event(condition, signature, name=f"{name}:condition"), parse_result(result, signature))


def load_tests(document: Mapping[str, Any] | Sequence[Mapping[str, Any]], signature: ScalarSignature) -> list[Test]:
    """Tests from a parsed spec document: ``{tests: [{name, condition, result}, ...]}``."""
    entries = document.get("tests", []) if isinstance(document, Mapping) else document
    return [
        make_test(str(e["name"]), str(e.get("condition", UNIVERSAL_CONDITION)), str(e["result"]), signature)
        for e in entries
    ]


def evaluate_test(test: Test, lh: LocalHistory) -> TestOutcome:
    """Defined iff the condition holds; the value then depends on the present step only."""
    if not event_holds(test.condition, lh):
        return UNDEFINED
    return TestOutcome(True, test.result.evaluate(lh.present))


def smallest_property(
    test: Test, history: History, states: Sequence[Hashable]
) -> dict[Hashable, frozenset[bool]]:
    """
    Values the test took on each state where it was defined.

    ``states[q-1]`` is the world state at moment q. A state maps to two values
    only when the world (noise, hidden change) made the test disagree with itself.

    Returns:
        Mapping state -> set of observed results
    """
    if len(states) != len(history):
        raise ValueError("one state per history step is required")
    seen: dict[Hashable, set[bool]] = defaultdict(set)
    t = len(history)
    for q in range(1, t + 1):
        outcome = evaluate_test(test, localize(history, q, q - 1, t - q))
        if outcome.defined:
            seen[states[q - 1]].add(bool(outcome.value))
    conflicted = sum(1 for v in seen.values() if len(v) > 1)
    if conflicted:
        logger.debug(f"Test {test.name}: {conflicted} state(s) saw both results")
    return {s: frozenset(v) for s, v in seen.items()}


def defined_moments(test: Test, history: History) -> Iterable[tuple[int, bool]]:
    """(q, value) for every moment of ``history`` where ``test`` is defined."""
    t = len(history)
    for q in range(1, t + 1):
        outcome = evaluate_test(test, localize(history, q, q - 1, t - q))
        if outcome.defined:
            yield q, bool(outcome.value)
