"""
Def4 -> Def3: move the noise into the transition.

Each image state stores, in its visible variables, one possible noisy reading
of the source state, and keeps the true readings in shadow invisible variables
("true_<name>"). An inbound interval [a, b] for a source state becomes
[a*p, b*p] for the image state whose reading has probability p; sampling
picks the source outcome first and the reading second, so the image draws
exactly what the noisy source shows.
"""

import logging
from functools import lru_cache
from typing import Optional

from src.world_insight.world.distribution import IntervalDistribution, SplitDistribution
from src.world_insight.world.engine import view_outputs
from src.world_insight.world.model import (
    CumulativeState,
    Variable,
    VariableLayout,
    WorldDef3,
    WorldDef4,
)
from src.world_insight.world.signature import Action, Observation

logger = logging.getLogger(__name__)

SHADOW_PREFIX = "true_"


class _ImageCodec:
    """Translate between source cumulative states and image cumulative states."""

    def __init__(self, source: WorldDef4):
        base = source.base.layout
        self.m = len(base.visible)
        self.u = len(base.invisible)
        self.source_stride = base.stride
        self.position = base.state_position
        shadows = tuple(Variable(SHADOW_PREFIX + c.name, c.values) for c in base.visible)
        self.layout = VariableLayout(base.states, base.visible, base.invisible + shadows)
        self.decode = lru_cache(maxsize=65536)(self._decode)

    def encode(self, cs: CumulativeState, reading: Observation) -> CumulativeState:
        current = self.position[cs.standard]
        values: list[int] = []
        for i in range(len(self.position)):
            block = cs.assignment[i * self.source_stride : (i + 1) * self.source_stride]
            truth = block[: self.m]
            values.extend(reading if i == current else truth)
            values.extend(block[self.m :])
            values.extend(truth)
        return CumulativeState(cs.standard, tuple(values))

    def _decode(self, image: CumulativeState) -> CumulativeState:
        stride = self.layout.stride
        values: list[int] = []
        for i in range(len(self.position)):
            block = image.assignment[i * stride : (i + 1) * stride]
            values.extend(block[self.m + self.u :])
            values.extend(block[self.m : self.m + self.u])
        return CumulativeState(image.standard, tuple(values))


def split_outcomes(world: WorldDef4, dist: IntervalDistribution, codec: _ImageCodec) -> SplitDistribution:
    """Split every outcome by the readings its target can produce, bounds [a*p, b*p]."""
    return SplitDistribution.split(
        dist,
        [
            [(codec.encode(o.target, reading), p) for reading, p in sorted(view_outputs(world, o.target).items()) if p > 0]
            for o in dist.outcomes
        ],
    )


def def4_to_def3(world: WorldDef4) -> WorldDef3:
    """
    Noise-free Def3 image of a Def4 world.

    An action is incorrect in an image state exactly when it is incorrect in
    the source state the image state came from.
    """
    base = world.base
    codec = _ImageCodec(world)

    def rules(image: CumulativeState, action: Action) -> Optional[IntervalDistribution]:
        dist = base.transition(codec.decode(image), action)
        if dist is None:
            return None
        return split_outcomes(world, dist, codec)

    def correct(image: CumulativeState, action: Action) -> bool:
        return base.is_correct(codec.decode(image), action)

    # View(s0) is never observed, so the initial image state shows the truth
    initial = codec.encode(base.initial, base.visible(base.initial))
    logger.debug(f"Built noise-free image of {world.name} with stride {codec.layout.stride}")
    return WorldDef3(base.signature, codec.layout, initial, rules, correct, name=f"{world.name}/def3")
