"""
Def2 -> Def1: hide the world's chance inside two integer counters.

The determinized state is (s, x, y). ``x`` feeds the predictable cells and is
advanced by two generator applications per step (it is read twice); ``y``
decides among surviving outcomes and is advanced once. A split outcome takes
its part from a third cell hashed from the second read of ``x``. Both
generators are seeded hash chains standing in for the non-computable ideal ones.
"""

import hashlib
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from src.world_insight.world.distribution import (
    Q_GRID,
    UNPREDICTABLE_BITS,
    IntervalDistribution,
    sampling_grid,
    select_outcome,
)
from src.world_insight.world.engine import (
    initial_state,
    is_correct,
    step_world,
    transition_of,
    true_view,
)
from src.world_insight.world.model import IncorrectMove, WorldDef2
from src.world_insight.world.signature import Action, Observation, ScalarSignature
from src.world_insight.world.streams import Seeds, Streams

DetState = tuple[Hashable, int, int]


def _hash_int(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest(), "big")


@dataclass(frozen=True, eq=False)
class DeterminizedWorld:
    base: WorldDef2
    good_seed: int = 0
    bad_seed: int = 0
    q_grid: int = field(init=False, default=Q_GRID)

    def __post_init__(self) -> None:
        grids = {sampling_grid(d) for d in self.base.transitions.values()}
        object.__setattr__(self, "q_grid", math.lcm(Q_GRID, *grids))

    @property
    def signature(self) -> ScalarSignature:
        return self.base.signature

    @property
    def name(self) -> str:
        return f"{self.base.name}/def1"

    def f_good(self, x: int) -> int:
        return _hash_int(f"good/{self.good_seed}/{x}") % self.q_grid

    def f_bad(self, y: int) -> int:
        return _hash_int(f"bad/{self.bad_seed}/{y}") % (1 << UNPREDICTABLE_BITS)

    @property
    def initial(self) -> DetState:
        # generators applied to 0 so that different seeds differ from the first step
        return (self.base.initial, self.f_good(0), self.f_bad(0))

    def big_world(self, state: DetState, action: Action) -> Optional[DetState]:
        """The single-valued successor, or None for an incorrect move of the base world."""
        s, x, y = state
        dist = self.base.transition(s, action)
        if dist is None:
            return None
        x2 = self.f_good(x)
        x3 = _hash_int(f"part/{self.good_seed}/{x2}") % self.q_grid
        return (select_outcome(dist, x, x2, y, x3), self.f_good(x2), self.f_bad(y))

    def trajectory(self, actions: Iterable[Sequence[int]], start: Optional[DetState] = None) -> list[DetState]:
        """States visited by a fixed action sequence; incorrect moves leave the state in place."""
        state = start or self.initial
        visited = [state]
        for action in actions:
            nxt = self.big_world(state, self.signature.check_action(action))
            state = state if nxt is None else nxt
            visited.append(state)
        return visited

    def reseeded(self, seeds: Seeds) -> "DeterminizedWorld":
        return DeterminizedWorld(self.base, seeds.predictable, seeds.unpredictable)


def def2_to_def1(world: WorldDef2, seeds: Seeds | tuple[int, int] = (0, 0)) -> DeterminizedWorld:
    """Deterministic image of ``world``; seeds are (good, bad) or a Seeds bundle."""
    if isinstance(seeds, Seeds):
        return DeterminizedWorld(world, seeds.predictable, seeds.unpredictable)
    good, bad = seeds
    return DeterminizedWorld(world, int(good), int(bad))


@initial_state.register
def _(world: DeterminizedWorld) -> DetState:
    return world.initial


@transition_of.register
def _(world: DeterminizedWorld, current: DetState, action: Action) -> Optional[IntervalDistribution]:
    nxt = world.big_world(current, action)
    return None if nxt is None else IntervalDistribution.certain(nxt)


@is_correct.register
def _(world: DeterminizedWorld, current: DetState, action: Action) -> bool:
    return world.base.transition(current[0], action) is not None


@step_world.register
def _(world: DeterminizedWorld, current: DetState, action: Sequence[int], streams: Streams) -> DetState | IncorrectMove:
    action = world.signature.check_action(action)
    nxt = world.big_world(current, action)
    return IncorrectMove(current, action) if nxt is None else nxt


@true_view.register
def _(world: DeterminizedWorld, current: DetState) -> Observation:
    return tuple(world.base.view[current[0]])
