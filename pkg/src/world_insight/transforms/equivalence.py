"""
Statistical trace-equivalence harness.

Both worlds run under the same policy (uniform over correct moves) with
independent, per-episode derived seeds; observation sequences are counted
and the total-variation distance between the empirical distributions is reported.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Optional

from src.world_insight.transforms.determinize import DeterminizedWorld
from src.world_insight.world.engine import WorldInstance
from src.world_insight.world.signature import Observation
from src.world_insight.world.streams import Seeds, Streams

logger = logging.getLogger(__name__)

Trace = tuple[Observation, ...]


@singledispatch
def episode_world(world: Any, seeds: Seeds) -> Any:
    """The world to run for one episode; worlds carrying their own chance are reseeded."""
    return world


@episode_world.register
def _(world: DeterminizedWorld, seeds: Seeds) -> DeterminizedWorld:
    return world.reseeded(seeds)


def total_variation(a: Counter, b: Counter) -> float:
    na, nb = sum(a.values()), sum(b.values())
    if na == 0 or nb == 0:
        return 0.0 if na == nb else 1.0
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a[k] / na - b[k] / nb) for k in keys)


@dataclass
class TraceCounts:
    """Observation-sequence counts of one world; merging is addition, so order does not matter."""

    traces: Counter = field(default_factory=Counter)
    marginals: list[Counter] = field(default_factory=list)

    def add(self, trace: Trace) -> None:
        self.traces[trace] += 1
        while len(self.marginals) < len(trace):
            self.marginals.append(Counter())
        for t, obs in enumerate(trace):
            self.marginals[t][obs] += 1

    def merge(self, other: "TraceCounts") -> "TraceCounts":
        merged = TraceCounts(self.traces + other.traces)
        for t in range(max(len(self.marginals), len(other.marginals))):
            left = self.marginals[t] if t < len(self.marginals) else Counter()
            right = other.marginals[t] if t < len(other.marginals) else Counter()
            merged.marginals.append(left + right)
        return merged


@dataclass(frozen=True)
class TraceDistanceReport:
    episodes: int
    horizon: int
    distance: float
    per_step: tuple[float, ...]
    distinct_traces: tuple[int, int]

    def __post_init__(self) -> None:
        if not 0.0 <= self.distance <= 1.0 + 1e-12:
            raise ValueError(f"distance {self.distance} outside [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "episodes": self.episodes,
            "horizon": self.horizon,
            "distance": round(self.distance, 6),
            "per_step": [round(d, 6) for d in self.per_step],
            "distinct_traces": list(self.distinct_traces),
        }


def collect_traces(
    world: Any, episodes: int, horizon: int, seeds: Seeds, label: str, mode: str = "uniform"
) -> TraceCounts:
    counts = TraceCounts()
    for e in range(episodes):
        episode_seeds = seeds.derive(f"{label}/{e}")
        instance = WorldInstance(episode_world(world, episode_seeds), Streams.from_seeds(episode_seeds, mode))
        counts.add(tuple(o.letter.observation for o in instance.run(horizon)))
    return counts


def trace_distance(
    world_a: Any,
    world_b: Any,
    *,
    episodes: int,
    horizon: int,
    seeds: Optional[Seeds] = None,
    mode: str = "uniform",
) -> TraceDistanceReport:
    """
    Estimate the total-variation distance between the observation traces of two
    worlds sharing a signature. Each trace has horizon + 1 observations (the first
    step takes the all-Nothing action).
    """
    world_a.signature.require_same(world_b.signature)
    seeds = seeds or Seeds()
    logger.info(f"Running {episodes:,} episodes of horizon {horizon} per world")
    a = collect_traces(world_a, episodes, horizon, seeds, "a", mode)
    b = collect_traces(world_b, episodes, horizon, seeds, "b", mode)
    per_step = tuple(total_variation(x, y) for x, y in zip(a.marginals, b.marginals))
    report = TraceDistanceReport(
        episodes=episodes,
        horizon=horizon,
        distance=total_variation(a.traces, b.traces),
        per_step=per_step,
        distinct_traces=(len(a.traces), len(b.traces)),
    )
    logger.info(f"Trace distance {report.distance:.4f} over {len(a.traces)}/{len(b.traces)} distinct traces")
    return report
