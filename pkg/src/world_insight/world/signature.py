"""
Scalar signatures, move groups and step letters.

Actions and observations are tuples of value indices, one per coordinate.
Index 0 of every coordinate is Nothing.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Optional, Sequence

from src.world_insight.errors import MalformedActionError, SignatureMismatchError

Action = tuple[int, ...]
Observation = tuple[int, ...]

NOTHING = "Nothing"


@dataclass(frozen=True)
class Coordinate:
    """One scalar coordinate: a name and its value names, value 0 being Nothing."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) < 2:
            raise ValueError(f"coordinate {self.name!r} needs at least 2 values")
        if self.values[0] != NOTHING:
            raise ValueError(f"coordinate {self.name!r}: value 0 must be {NOTHING!r}")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"coordinate {self.name!r} repeats a value name")

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def index(self, value: str | int) -> int:
        if isinstance(value, bool):
            raise ValueError(f"{self.name}: boolean {value!r} is not a value")
        if isinstance(value, int):
            if not 0 <= value < self.cardinality:
                raise ValueError(f"{self.name}: index {value} out of range")
            return value
        try:
            return self.values.index(value)
        except ValueError:
            raise ValueError(f"{self.name}: unknown value {value!r}") from None


@dataclass(frozen=True)
class MoveGroup:
    """
    A cumulative move: the actions matching a wildcard pattern.

    ``pattern[i]`` is a value index or None for "any value", so
    ``(None, None, 1)`` is the group ⟨*, *, pickup⟩.
    """

    name: str
    pattern: tuple[Optional[int], ...]

    def covers(self, action: Action) -> bool:
        return all(p is None or p == a for p, a in zip(self.pattern, action))


@dataclass(frozen=True)
class ScalarSignature:
    """Action and observation coordinates of a world, plus its declared move groups."""

    actions: tuple[Coordinate, ...]
    observations: tuple[Coordinate, ...]
    groups: tuple[MoveGroup, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "groups", tuple(self.groups))
        if not self.actions or not self.observations:
            raise ValueError("a signature needs at least one action and one observation coordinate")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ValueError("move group names must be unique")
        for group in self.groups:
            if len(group.pattern) != self.action_dims:
                raise ValueError(f"group {group.name!r} pattern has the wrong length")
            for coord, p in zip(self.actions, group.pattern):
                if p is not None and not 0 <= p < coord.cardinality:
                    raise ValueError(f"group {group.name!r} pattern out of range at {coord.name}")

    @property
    def action_dims(self) -> int:
        return len(self.actions)

    @property
    def obs_dims(self) -> int:
        return len(self.observations)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(c.cardinality for c in self.actions + self.observations)

    @cached_property
    def action_space(self) -> tuple[Action, ...]:
        """All actions in lexicographic index order; the correctness vector follows it."""
        return tuple(product(*(range(c.cardinality) for c in self.actions)))

    @cached_property
    def action_position(self) -> dict[Action, int]:
        return {a: i for i, a in enumerate(self.action_space)}

    @cached_property
    def group_members(self) -> tuple[tuple[int, ...], ...]:
        """Per group, the positions in action_space of its member actions."""
        return tuple(
            tuple(i for i, a in enumerate(self.action_space) if g.covers(a)) for g in self.groups
        )

    @property
    def nothing_action(self) -> Action:
        return (0,) * self.action_dims

    def group(self, name: str) -> MoveGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)

    def group_index(self, name: str) -> int:
        return [g.name for g in self.groups].index(name)

    def check_action(self, action: Sequence[int]) -> Action:
        action = tuple(action)
        if len(action) != self.action_dims or any(
            not isinstance(v, int) or not 0 <= v < c.cardinality
            for v, c in zip(action, self.actions)
        ):
            raise MalformedActionError(f"action {action} is outside the signature")
        return action

    def check_observation(self, observation: Sequence[int]) -> Observation:
        observation = tuple(observation)
        if len(observation) != self.obs_dims or any(
            not 0 <= v < c.cardinality for v, c in zip(observation, self.observations)
        ):
            raise ValueError(f"observation {observation} is outside the signature")
        return observation

    def action_label(self, action: Action) -> str:
        return ",".join(c.values[v] for c, v in zip(self.actions, action))

    def observation_label(self, observation: Observation) -> str:
        return ",".join(c.values[v] for c, v in zip(self.observations, observation))

    def parse_action_label(self, label: str) -> Action:
        parts = label.strip().strip("()").split(",")
        if len(parts) != self.action_dims:
            raise ValueError(f"action {label!r} has {len(parts)} coordinates")
        return tuple(c.index(p.strip()) for c, p in zip(self.actions, parts))

    def parse_observation_label(self, label: str) -> Observation:
        parts = label.strip().strip("()").split(",")
        if len(parts) != self.obs_dims:
            raise ValueError(f"observation {label!r} has {len(parts)} coordinates")
        return tuple(c.index(p.strip()) for c, p in zip(self.observations, parts))

    def require_same(self, other: "ScalarSignature", what: str = "worlds") -> None:
        if self != other:
            raise SignatureMismatchError(f"{what} do not share a ScalarSignature")


@dataclass(frozen=True)
class Correctness:
    """The correctness vector of one moment: a flag per action and (all, nobody) per group."""

    flags: tuple[bool, ...]
    groups: tuple[tuple[bool, bool], ...] = field(default=())

    @classmethod
    def from_flags(cls, signature: ScalarSignature, flags: Iterable[bool]) -> "Correctness":
        flags = tuple(bool(f) for f in flags)
        if len(flags) != len(signature.action_space):
            raise ValueError(
                f"expected {len(signature.action_space)} correctness flags, got {len(flags)}"
            )
        groups = tuple(
            (all(flags[i] for i in members), not any(flags[i] for i in members))
            for members in signature.group_members
        )
        return cls(flags, groups)

    def is_consistent(self, signature: ScalarSignature) -> bool:
        """True when the group summaries agree with the flags and all/nobody exclude each other."""
        if self != Correctness.from_flags(signature, self.flags):
            return False
        return all(
            not (every and nobody)
            for (every, nobody), members in zip(self.groups, signature.group_members)
            if members
        )

    def bits(self) -> str:
        return "".join("1" if f else "0" for f in self.flags)

    @classmethod
    def from_bits(cls, signature: ScalarSignature, bits: str) -> "Correctness":
        if set(bits) - {"0", "1"}:
            raise ValueError(f"correctness bits must be 0/1, got {bits!r}")
        return cls.from_flags(signature, (b == "1" for b in bits))


@dataclass(frozen=True)
class StepLetter:
    """One history step: the action taken, what was seen after it, and the correctness after it."""

    action: Action
    observation: Observation
    correctness: Correctness

    def correct(self, position: int) -> bool:
        return self.correctness.flags[position]

    def group_all(self, index: int) -> bool:
        return self.correctness.groups[index][0]

    def group_nobody(self, index: int) -> bool:
        return self.correctness.groups[index][1]
