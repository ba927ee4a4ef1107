"""
Def3 <-> Def2.

``def3_to_def2`` turns every reachable cumulative state into a standard state;
``def2_to_def3`` is the reverse embedding where all variables are constants.
"""

import logging
from collections import deque
from typing import Hashable, Optional

from src.world_insight.errors import ResourceCapError
from src.world_insight.world.distribution import IntervalDistribution
from src.world_insight.world.engine import initial_state, successors, transition_of, true_view
from src.world_insight.world.model import (
    CumulativeState,
    VariableLayout,
    WorldDef2,
    WorldDef3,
    assignment_from_blocks,
)
from src.world_insight.world.signature import Action

logger = logging.getLogger(__name__)

DEFAULT_REACH_CAP = 1_000_000


def reachable_states(
    world: object, reach_bound: Optional[int] = None, cap: int = DEFAULT_REACH_CAP
) -> list[Hashable]:
    """
    Breadth-first closure from the initial state over every action and every
    outcome with a positive upper bound, at most ``reach_bound`` steps deep.
    """
    start = initial_state(world)
    order = [start]
    depth = {start: 0}
    queue = deque([start])
    actions = world.signature.action_space  # type: ignore[attr-defined]
    while queue:
        state = queue.popleft()
        if reach_bound is not None and depth[state] >= reach_bound:
            continue
        for action in actions:
            for target in successors(world, state, action):
                if target in depth:
                    continue
                depth[target] = depth[state] + 1
                order.append(target)
                if len(order) > cap:
                    raise ResourceCapError("reachable cumulative states", cap)
                queue.append(target)
    logger.info(f"Explored {len(order):,} reachable states to depth {max(depth.values())}")
    return order


def def3_to_def2(
    world: WorldDef3,
    reach_bound: Optional[int] = None,
    cap: int = DEFAULT_REACH_CAP,
) -> WorldDef2:
    """
    Flatten the reachable part of a Def3 world.

    States are named c0, c1, ... in breadth-first order (c0 is the initial
    state). A transition at the depth limit that leads past it ends in an
    absorbing frontier state (f0, f1, ...) showing the true view of the state
    it stands for; there the moves correct in that state loop back.
    """
    order = reachable_states(world, reach_bound, cap)
    names = {cs: f"c{i}" for i, cs in enumerate(order)}
    frontier: dict[Hashable, str] = {}

    def rename(target: Hashable) -> str:
        if target in names:
            return names[target]
        return frontier.setdefault(target, f"f{len(frontier)}")

    transitions: dict[tuple[str, Action], IntervalDistribution] = {}
    for cs in order:
        for action in world.signature.action_space:
            dist = transition_of(world, cs, action)
            if dist is not None:
                transitions[(names[cs], action)] = dist.relabel(rename)
    view = {names[cs]: true_view(world, cs) for cs in order}
    for cs, name in frontier.items():
        view[name] = true_view(world, cs)
        for action in world.signature.action_space:
            if transition_of(world, cs, action) is not None:
                transitions[(name, action)] = IntervalDistribution.certain(name)
    if frontier:
        logger.info(f"Closed the depth limit with {len(frontier):,} absorbing frontier states")
    return WorldDef2(
        world.signature,
        tuple(names[cs] for cs in order) + tuple(frontier.values()),
        names[order[0]],
        transitions,
        view,
        name=f"{world.name}/flat",
    )


def def2_to_def3(world: WorldDef2) -> WorldDef3:
    """Constants-only embedding: each state's view becomes its visible variables."""
    layout = VariableLayout(world.states, world.signature.observations)
    assignment = assignment_from_blocks(layout, {s: world.view[s] for s in world.states})

    def rules(cs: CumulativeState, action: Action) -> Optional[IntervalDistribution]:
        dist = world.transition(cs.standard, action)
        if dist is None:
            return None
        return dist.relabel(cs.moved_to)

    return WorldDef3(
        world.signature,
        layout,
        CumulativeState(world.initial, assignment),
        rules,
        name=f"{world.name}/def3",
    )

