"""
A corridor of doors for test-state experiments.

Position p_i has door d_i. The agent moves left or right, waits (Nothing) or
tries the door it stands at; only a try reveals ``status`` (locked/unlocked),
every other step reads Nothing there. Each door follows a periodic lock
schedule driven by a shared clock that ticks once per step, so "today" is the
clock modulo the schedule length. Locks are evaluated at the clock value the
step arrives at.

Invisible variables per position: ``locked`` and ``clock`` (the clock lives in
the block of p0).
"""

import logging
import math
from typing import Optional, Sequence

from src.world_insight.world.distribution import IntervalDistribution
from src.world_insight.world.model import CumulativeState, Variable, VariableLayout, WorldDef3
from src.world_insight.world.signature import NOTHING, Action, Coordinate, ScalarSignature

logger = logging.getLogger(__name__)

MOVES = (NOTHING, "left", "right", "try")
LEFT, RIGHT, TRY = 1, 2, 3
STATUS = (NOTHING, "locked", "unlocked")
LOCKED, UNLOCKED = 1, 2

# block layout per position: door, status, locked, clock
STRIDE = 4
_DOOR, _STATUS, _LOCKED, _CLOCK = range(STRIDE)

Schedule = Sequence[bool]


def parse_schedule(text: str) -> tuple[bool, ...]:
    """``"LUUUUUU"``: one letter per clock phase, L locked, U unlocked."""
    cleaned = text.strip().upper()
    if not cleaned or set(cleaned) - {"L", "U"}:
        raise ValueError(f"a schedule is a string of L and U, got {text!r}")
    return tuple(ch == "L" for ch in cleaned)


def doors_signature(num_doors: int) -> ScalarSignature:
    return ScalarSignature(
        actions=(Coordinate("move", MOVES),),
        observations=(
            Coordinate("door", (NOTHING,) + tuple(f"d{i}" for i in range(num_doors))),
            Coordinate("status", STATUS),
        ),
    )


def build_doors_world(num_doors: int, schedules: Sequence[Schedule | str]) -> WorldDef3:
    """
    Args:
        num_doors: Number of positions (one door each)
        schedules: Per door, the locked flag of each clock phase (or an L/U string)

    Returns:
        A deterministic WorldDef3
    """
    if num_doors < 1:
        raise ValueError("at least one door is needed")
    if len(schedules) != num_doors:
        raise ValueError(f"expected {num_doors} schedules, got {len(schedules)}")
    plans = [parse_schedule(s) if isinstance(s, str) else tuple(bool(x) for x in s) for s in schedules]
    if any(not p for p in plans):
        raise ValueError("schedules must not be empty")
    period = math.lcm(*(len(p) for p in plans))
    signature = doors_signature(num_doors)
    positions = tuple(f"p{i}" for i in range(num_doors))
    layout = VariableLayout(
        positions,
        signature.observations,
        (Variable("locked", ("open", "shut")), Variable("clock", tuple(str(i) for i in range(period)))),
    )

    def assignment(position: int, clock: int, status: int) -> tuple[int, ...]:
        values: list[int] = []
        for i, plan in enumerate(plans):
            values.extend(
                (
                    i + 1,
                    status if i == position else 0,
                    int(plan[clock % len(plan)]),
                    clock if i == 0 else 0,
                )
            )
        return tuple(values)

    def rules(cs: CumulativeState, action: Action) -> Optional[IntervalDistribution]:
        position = int(cs.standard[1:])
        move = action[0]
        if (move == LEFT and position == 0) or (move == RIGHT and position == num_doors - 1):
            return None
        position += {LEFT: -1, RIGHT: 1}.get(move, 0)
        clock = (cs.assignment[_CLOCK] + 1) % period
        status = 0
        if move == TRY:
            status = LOCKED if plans[position][clock % len(plans[position])] else UNLOCKED
        return IntervalDistribution.certain(CumulativeState(positions[position], assignment(position, clock, status)))

    world = WorldDef3(
        signature,
        layout,
        CumulativeState(positions[0], assignment(0, 0, 0)),
        rules,
        name=f"doors-{num_doors}",
    )
    logger.info(f"Built doors world: {num_doors} door(s), clock period {period}")
    return world


def door_locked(world: WorldDef3, cs: CumulativeState, door: int) -> bool:
    """Ground truth for tests: is door ``door`` locked in ``cs``."""
    return bool(world.value(cs, f"p{door}", "locked"))
