"""
Seeded random channels.

Four named channels keep chance sources apart: predictable (random points of the sampling grid),
unpredictable (choice among survivors), noise (View corruption) and policy
(the agent's action choice). Child seeds are derived by hashing, so any
episode can be reproduced on its own.
"""

import hashlib
import random
from dataclasses import dataclass

CHANNELS = ("predictable", "unpredictable", "noise", "policy")


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit child seed for ``label`` under ``seed``."""
    digest = hashlib.sha256(f"{seed}/{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class DriftingStream(random.Random):
    """
    An unpredictable channel whose residues are not equally likely.

    With probability ``strength`` a draw returns a favoured value; the favoured
    value and the strength are redrawn after a random number of draws. Sampling
    stays inside the declared intervals whatever this channel returns, only the
    position inside each interval moves.
    """

    def __init__(self, seed: int = 0, max_period: int = 500):
        self._max_period = max_period
        self._favoured = 0
        self._strength = 0.0
        self._remaining = 0
        super().__init__(seed)

    def seed(self, a=None, version: int = 2) -> None:  # type: ignore[override]
        super().seed(a, version)
        self._remaining = 0

    def _redraw(self) -> None:
        self._favoured = super().getrandbits(64)
        self._strength = super().random()
        # randrange would route back through the overridden getrandbits
        self._remaining = 1 + int(super().random() * self._max_period)

    def getrandbits(self, k: int) -> int:
        if self._remaining <= 0:
            self._redraw()
        self._remaining -= 1
        if super().random() < self._strength:
            return self._favoured & ((1 << k) - 1)
        return super().getrandbits(k)


@dataclass(frozen=True)
class Seeds:
    """Integer seeds of the four channels."""

    predictable: int = 0
    unpredictable: int = 0
    noise: int = 0
    policy: int = 0

    def derive(self, label: str) -> "Seeds":
        return Seeds(*(derive_seed(getattr(self, c), f"{c}/{label}") for c in CHANNELS))

    def to_dict(self) -> dict[str, int]:
        return {c: getattr(self, c) for c in CHANNELS}


@dataclass
class Streams:
    """The live random sources of one executing world. Single-owner."""

    predictable: random.Random
    unpredictable: random.Random
    noise: random.Random
    policy: random.Random
    seeds: Seeds
    mode: str = "uniform"

    @classmethod
    def from_seeds(cls, seeds: Seeds | None = None, mode: str = "uniform") -> "Streams":
        seeds = seeds or Seeds()
        if mode == "drifting":
            unpredictable: random.Random = DriftingStream(seeds.unpredictable)
        elif mode == "uniform":
            unpredictable = random.Random(seeds.unpredictable)
        else:
            raise ValueError(f"unknown unpredictable mode {mode!r}")
        return cls(
            predictable=random.Random(seeds.predictable),
            unpredictable=unpredictable,
            noise=random.Random(seeds.noise),
            policy=random.Random(seeds.policy),
            seeds=seeds,
            mode=mode,
        )

    def derive(self, label: str) -> "Streams":
        """Fresh streams for a child run (episode, worker) labelled ``label``."""
        return Streams.from_seeds(self.seeds.derive(label), self.mode)
