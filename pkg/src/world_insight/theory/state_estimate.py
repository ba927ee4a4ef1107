"""
State Estimate Module - Theory of the Test State

The test state is the vector of a test's property values, one per group of
relative stability. Its theory returns (prediction, confidence) for every
group at every moment, combining what experiments and stability say about
that group.

Key Concepts:
- TestStateEstimate: one TheoryOutput per group
- predict_test_state: the pure combination step
- TestStateTheory: high-level interface holding a test's automaton, counts and trackers
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from src.world_insight.theory.grouping import GroupingAutomaton
from src.world_insight.theory.predict import (
    DEFAULT_C0,
    DEFAULT_HALF_LIFE,
    NO_EVIDENCE,
    StabilityTracker,
    TheoryOutput,
    combine_predictions,
    predict_from_experiment,
)
from src.world_insight.theory.stats import StatStore
from src.world_insight.world.signature import StepLetter

logger = logging.getLogger(__name__)

# tests whose untestable groups have been logged
_impossible_announced: set[str] = set()


@dataclass(frozen=True)
class TestStateEstimate:
    """Per-group theory outputs for one test at one moment."""

    __test__ = False

    test: str
    moment: int
    current_group: str
    outputs: Mapping[str, TheoryOutput]

    def __getitem__(self, group: str) -> TheoryOutput:
        return self.outputs[group]

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(self.outputs)

    def to_dict(self, digits: int = 6) -> dict[str, Any]:
        return {
            "test": self.test,
            "moment": self.moment,
            "current_group": self.current_group,
            "groups": {g: out.to_dict(digits) for g, out in self.outputs.items()},
        }


def predict_test_state(
    test: str,
    groups: Sequence[str],
    store: StatStore,
    trackers: Mapping[str, StabilityTracker],
    now: int,
    current_group: str,
    *,
    experiments: Optional[Iterable[str]] = None,
    impossible: Optional[Iterable[str]] = None,
    c0: int | float = DEFAULT_C0,
    half_life: float = DEFAULT_HALF_LIFE,
) -> TestStateEstimate:
    """
    Combine experiment-derived and stability-derived outputs per group.

    Args:
        test: Test name as used in ``store``
        groups: Every state of the grouping automaton
        store: Counts per (experiment, test, group)
        trackers: Stability tracker per group (missing groups count as never tested)
        now: Current moment
        current_group: Group the current moment belongs to
        experiments: Experiment labels active now; all experiments recorded for the test if None
        impossible: Groups where the test cannot be performed (default: none)
        c0: Confidence constant for experiment predictions
        half_life: Stability half-life in steps

    Returns:
        TestStateEstimate with one entry per group
    """
    blocked = set(impossible or ())
    if blocked and test not in _impossible_announced:
        _impossible_announced.add(test)
        logger.info(
            f"Test {test}: groups {sorted(blocked)} cannot be tested; reporting them with confidence 0"
        )
    active = None if experiments is None else list(experiments)
    outputs: dict[str, TheoryOutput] = {}
    for group in groups:
        if group in blocked:
            outputs[group] = NO_EVIDENCE
            continue
        records = store.for_test(test, group)
        labels = sorted(records) if active is None else active
        partial = [predict_from_experiment(store.get(label, test, group), c0) for label in labels]
        tracker = trackers.get(group)
        if tracker is not None:
            partial.append(tracker.output(now, half_life))
        outputs[group] = combine_predictions(partial)
    return TestStateEstimate(test, now, current_group, outputs)


@dataclass
class TestStateTheory:
    """
    High-level interface for one test's state theory.

    Feed it one step letter per moment plus whether the test was performed;
    ask for the estimate at any moment.
    """

    __test__ = False

    test: str
    automaton: GroupingAutomaton
    store: StatStore = field(default_factory=StatStore)
    trackers: dict[str, StabilityTracker] = field(default_factory=dict)
    impossible: Optional[frozenset[str]] = None
    c0: int | float = DEFAULT_C0
    half_life: float = DEFAULT_HALF_LIFE
    adaptive_half_life: bool = False
    group: str = ""
    moment: int = 0

    def __post_init__(self) -> None:
        self.group = self.group or self.automaton.initial
        if self.impossible is None:
            self.impossible = self.automaton.impossible
        for g in self.automaton.states:
            self.trackers.setdefault(g, StabilityTracker())

    def advance(self, letter: StepLetter) -> str:
        """Consume the next step; returns the group of the new moment."""
        self.moment += 1
        self.group = self.automaton.step(self.group, letter)
        return self.group

    def performed(self, value: bool, moment: Optional[int] = None, group: Optional[str] = None) -> None:
        self.trackers[group or self.group].observe(self.moment if moment is None else moment, value)

    def half_life_for(self, group: str) -> float:
        if not self.adaptive_half_life:
            return self.half_life
        return self.trackers[group].estimate_half_life(self.half_life)

    def estimate(self, experiments: Optional[Iterable[str]] = None) -> TestStateEstimate:
        if not self.adaptive_half_life:
            return predict_test_state(
                self.test,
                self.automaton.states,
                self.store,
                self.trackers,
                self.moment,
                self.group,
                experiments=experiments,
                impossible=self.impossible,
                c0=self.c0,
                half_life=self.half_life,
            )
        outputs = {}
        for g in self.automaton.states:
            single = predict_test_state(
                self.test,
                (g,),
                self.store,
                self.trackers,
                self.moment,
                self.group,
                experiments=experiments,
                impossible=self.impossible,
                c0=self.c0,
                half_life=self.half_life_for(g),
            )
            outputs[g] = single[g]
        return TestStateEstimate(self.test, self.moment, self.group, outputs)
