"""
Executing worlds.

Every engine operation is a ``functools.singledispatch`` function over the world
types, so transforms can register their own world kinds (see DeterminizedWorld).
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import singledispatch
from itertools import product
from typing import Any, Hashable, Optional, Sequence

from src.world_insight.world.distribution import IntervalDistribution, sample_outcome
from src.world_insight.world.model import (
    CumulativeState,
    IncorrectMove,
    WorldDef2,
    WorldDef3,
    WorldDef4,
)
from src.world_insight.world.signature import (
    Action,
    Correctness,
    Observation,
    ScalarSignature,
    StepLetter,
)
from src.world_insight.world.streams import Streams

logger = logging.getLogger(__name__)

World = Any


@singledispatch
def initial_state(world: World) -> Hashable:
    raise TypeError(f"not a world: {type(world).__name__}")


@initial_state.register
def _(world: WorldDef2) -> Hashable:
    return world.initial


@initial_state.register
def _(world: WorldDef3) -> Hashable:
    return world.initial


@initial_state.register
def _(world: WorldDef4) -> Hashable:
    return world.base.initial


@singledispatch
def transition_of(world: World, current: Hashable, action: Action) -> Optional[IntervalDistribution]:
    """The transition distribution, or None for an incorrect move."""
    raise TypeError(f"not a world: {type(world).__name__}")


@transition_of.register
def _(world: WorldDef2, current: Hashable, action: Action) -> Optional[IntervalDistribution]:
    return world.transition(current, action)


@transition_of.register
def _(world: WorldDef3, current: Hashable, action: Action) -> Optional[IntervalDistribution]:
    return world.transition(current, action)


@transition_of.register
def _(world: WorldDef4, current: Hashable, action: Action) -> Optional[IntervalDistribution]:
    return world.base.transition(current, action)


@singledispatch
def is_correct(world: World, current: Hashable, action: Action) -> bool:
    return transition_of(world, current, action) is not None


@is_correct.register
def _(world: WorldDef3, current: Hashable, action: Action) -> bool:
    return world.is_correct(current, action)


@is_correct.register
def _(world: WorldDef4, current: Hashable, action: Action) -> bool:
    return world.base.is_correct(current, action)


@singledispatch
def step_world(world: World, current: Hashable, action: Sequence[int], streams: Streams) -> Hashable | IncorrectMove:
    """
    Advance ``world`` from ``current`` by ``action``.

    Returns the sampled successor or IncorrectMove(current, action); the state is not
    touched on an incorrect move. Raises MalformedActionError for actions outside the
    signature.
    """
    action = world.signature.check_action(action)
    dist = transition_of(world, current, action)
    if dist is None:
        return IncorrectMove(current, action)
    return sample_outcome(dist, streams.predictable, streams.unpredictable)


def successors(world: World, current: Hashable, action: Action) -> tuple[Hashable, ...]:
    """Targets reachable in one step (upper bound > 0); empty for an incorrect move."""
    dist = transition_of(world, current, action)
    return () if dist is None else dist.possible_targets()


@singledispatch
def true_view(world: World, current: Hashable) -> Observation:
    """The noise-free observation of ``current``."""
    raise TypeError(f"not a world: {type(world).__name__}")


@true_view.register
def _(world: WorldDef2, current: Hashable) -> Observation:
    return tuple(world.view[current])


@true_view.register
def _(world: WorldDef3, current: Hashable) -> Observation:
    return world.visible(current)


@true_view.register
def _(world: WorldDef4, current: Hashable) -> Observation:
    return world.base.visible(current)


@dataclass(frozen=True)
class RenderDetail:
    """A rendered observation and, per variable, whether noise replaced the reading."""

    observation: Observation
    noised: tuple[bool, ...]


def _draw(spectrum: Sequence[Fraction], rng: random.Random) -> int:
    r = rng.random()
    running = 0.0
    for value, p in enumerate(spectrum):
        running += float(p)
        if r < running:
            return value
    return max(v for v, p in enumerate(spectrum) if p > 0)


def render_view_detail(world: World, current: Hashable, noise_stream: random.Random) -> RenderDetail:
    truth = true_view(world, current)
    if not isinstance(world, WorldDef4):
        return RenderDetail(truth, (False,) * len(truth))
    values, noised = [], []
    for j, descriptor in enumerate(world.descriptors(current)):
        if descriptor.volume > 0 and noise_stream.random() < descriptor.volume:
            values.append(_draw(descriptor.spectrum, noise_stream))
            noised.append(True)
        else:
            values.append(truth[j])
            noised.append(False)
    return RenderDetail(tuple(values), tuple(noised))


def render_view(world: World, current: Hashable, noise_stream: random.Random) -> Observation:
    """
    What the agent sees at ``current``.

    Def4 worlds read each visible variable independently: the true value with
    probability 1 - Volume, a spectrum draw otherwise. Silent variables consume
    no randomness.
    """
    return render_view_detail(world, current, noise_stream).observation


def view_outputs(world: World, current: Hashable) -> dict[Observation, Fraction]:
    """Exact distribution of render_view at ``current``; probabilities sum to 1."""
    truth = true_view(world, current)
    if not isinstance(world, WorldDef4):
        return {truth: Fraction(1)}
    per_variable = [
        sorted(d.output_distribution(truth[j]).items())
        for j, d in enumerate(world.descriptors(current))
    ]
    outputs: dict[Observation, Fraction] = {}
    for combo in product(*per_variable):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        outputs[tuple(v for v, _ in combo)] = p
    return outputs


def move_correctness(world: World, current: Hashable) -> Correctness:
    """A flag per action of the signature plus (all, nobody) per declared move group."""
    signature: ScalarSignature = world.signature
    return Correctness.from_flags(
        signature, (is_correct(world, current, a) for a in signature.action_space)
    )


def choose_correct_action(correctness: Correctness, signature: ScalarSignature, rng: random.Random) -> Action:
    """Uniform choice among the correct moves; the Nothing action when none is correct."""
    candidates = [a for a, ok in zip(signature.action_space, correctness.flags) if ok]
    if not candidates:
        return signature.nothing_action
    return candidates[rng.randrange(len(candidates))]


@dataclass(frozen=True)
class StepOutcome:
    letter: StepLetter
    state: Hashable
    incorrect: bool


@dataclass
class WorldInstance:
    """
    A running world: definition, current state and the streams it draws from.

    Single-owner; use ``clone`` to run copies side by side.
    """

    world: World
    streams: Streams
    state: Hashable = None
    steps: int = field(default=0)

    def __post_init__(self) -> None:
        if self.state is None:
            self.state = initial_state(self.world)

    @property
    def signature(self) -> ScalarSignature:
        return self.world.signature

    def reset(self) -> None:
        self.state = initial_state(self.world)
        self.steps = 0

    def correctness(self) -> Correctness:
        return move_correctness(self.world, self.state)

    def observe(self) -> Observation:
        return render_view(self.world, self.state, self.streams.noise)

    def step(self, action: Sequence[int]) -> StepOutcome:
        result = step_world(self.world, self.state, action, self.streams)
        incorrect = isinstance(result, IncorrectMove)
        if not incorrect:
            self.state = result
        self.steps += 1
        letter = StepLetter(tuple(action), self.observe(), self.correctness())
        return StepOutcome(letter, self.state, incorrect)

    def policy_step(self, correctness: Correctness) -> StepOutcome:
        return self.step(choose_correct_action(correctness, self.signature, self.streams.policy))

    def clone(self, streams: Optional[Streams] = None) -> "WorldInstance":
        return WorldInstance(self.world, streams or self.streams.derive("clone"), self.state, self.steps)

    def run(self, horizon: int) -> list[StepOutcome]:
        """
        One episode from the current state: the all-Nothing action first, then
        ``horizon`` moves drawn uniformly among the correct ones.
        """
        outcomes = [self.step(self.signature.nothing_action)]
        for _ in range(horizon):
            outcomes.append(self.policy_step(outcomes[-1].letter.correctness))
        return outcomes
