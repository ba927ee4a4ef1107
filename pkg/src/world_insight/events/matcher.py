"""
Matching events on local histories, online over a growing history, and
exhaustively over a small world (experimental properties).
"""

import logging
from functools import lru_cache
from typing import Hashable, Iterable, Sequence

from src.world_insight.errors import LocalHistoryError, ResourceCapError
from src.world_insight.events.automaton import accepts_some_prefix, run
from src.world_insight.events.dsl import EventPattern
from src.world_insight.events.history import LocalHistory
from src.world_insight.world.engine import (
    initial_state,
    move_correctness,
    successors,
    transition_of,
    view_outputs,
)
from src.world_insight.world.signature import Action, StepLetter

logger = logging.getLogger(__name__)

DEFAULT_PROPERTY_CAP = 200_000


def event_holds(event: EventPattern, lh: LocalHistory) -> bool:
    """
    Kind A: some suffix of the past is in L1 and some prefix of the future in L2.
    Kind B: the whole past (which must start at step 1) is in L1, same future rule.
    """
    if event.kind == "B" and not lh.absolute_origin:
        raise LocalHistoryError("a kind B event needs a local history that starts at step 1")
    automaton = event.past_automaton
    if not automaton.accepting(run(automaton, lh.past)):
        return False
    return accepts_some_prefix(event.future_automaton, lh.future)


class EventTracker:
    """
    Runs an event's past automaton along a history as it grows, so the past part
    of every moment is known in O(1) per step. ``holds_at`` then only needs the
    future window.
    """

    def __init__(self, event: EventPattern):
        self.event = event
        self._state = event.past_automaton.start
        self._past: list[bool] = []

    def __len__(self) -> int:
        return len(self._past)

    def advance(self, letter: StepLetter) -> bool:
        """Consume step q = len+1; returns whether the past part holds at q."""
        automaton = self.event.past_automaton
        self._state = automaton.step(self._state, letter)
        holds = automaton.accepting(self._state)
        self._past.append(holds)
        return holds

    def past_holds(self, q: int) -> bool:
        if not 1 <= q <= len(self._past):
            raise LocalHistoryError(f"moment {q} not yet tracked")
        return self._past[q - 1]

    def holds_at(self, q: int, future: Sequence[StepLetter]) -> bool:
        """event_holds on the local history with the whole past up to q and ``future`` after it."""
        return self.past_holds(q) and accepts_some_prefix(self.event.future_automaton, future)


def experimental_property(
    world: object, event: EventPattern, horizon: int, cap: int = DEFAULT_PROPERTY_CAP
) -> set[Hashable]:
    """
    States s reachable within ``horizon`` steps for which some history through s
    satisfies ``event`` at s, looking at most ``horizon`` steps ahead.

    Histories start at the initial state with the all-Nothing action, then take
    correct moves only. Every outcome with a positive upper bound and every noisy
    reading with positive probability is explored.
    """
    signature = world.signature  # type: ignore[attr-defined]
    correct_actions: dict[Hashable, tuple[Action, ...]] = {}

    @lru_cache(maxsize=None)
    def letters(state: Hashable, action: Action) -> tuple[tuple[Hashable, StepLetter], ...]:
        targets = successors(world, state, action)
        if transition_of(world, state, action) is None:
            targets = (state,)
        out = []
        for target in targets:
            correctness = move_correctness(world, target)
            for reading in sorted(view_outputs(world, target)):
                out.append((target, StepLetter(action, reading, correctness)))
        return tuple(out)

    def moves(state: Hashable) -> tuple[Action, ...]:
        if state not in correct_actions:
            flags = move_correctness(world, state).flags
            correct_actions[state] = tuple(a for a, ok in zip(signature.action_space, flags) if ok)
        return correct_actions[state]

    past = event.past_automaton
    start = initial_state(world)
    frontier = {(t, past.step(past.start, letter)) for t, letter in letters(start, signature.nothing_action)}
    seen = set(frontier)
    for _ in range(horizon - 1):
        nxt = set()
        for state, q in frontier:
            for action in moves(state):
                for target, letter in letters(state, action):
                    pair = (target, past.step(q, letter))
                    if pair not in seen:
                        seen.add(pair)
                        nxt.add(pair)
        if len(seen) > cap:
            raise ResourceCapError("experimental-property search", cap)
        frontier = nxt
    candidates = {state for state, q in seen if past.accepting(q)}
    logger.debug(f"Past search: {len(seen):,} product states, {len(candidates)} candidates")

    future = event.future_automaton
    memo: dict[tuple[Hashable, Hashable, int], bool] = {}

    def future_ok(state: Hashable, fq: Hashable, remaining: int) -> bool:
        if future.accepting(fq):
            return True
        if remaining == 0:
            return False
        key = (state, fq, remaining)
        if key in memo:
            return memo[key]
        if len(memo) > cap:
            raise ResourceCapError("experimental-property search", cap)
        memo[key] = False
        result = any(
            future_ok(target, future.step(fq, letter), remaining - 1)
            for action in moves(state)
            for target, letter in letters(state, action)
        )
        memo[key] = result
        return result

    return {state for state in candidates if future_ok(state, future.start, horizon)}


def matching_moments(event: EventPattern, letters: Iterable[StepLetter]) -> list[int]:
    """Moments q (1-based) of a complete history at which ``event`` holds with the whole future."""
    steps = list(letters)
    tracker = EventTracker(event)
    for letter in steps:
        tracker.advance(letter)
    return [q for q in range(1, len(steps) + 1) if tracker.holds_at(q, steps[q:])]
