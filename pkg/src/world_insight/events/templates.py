"""Step templates: predicates over a single StepLetter."""

from dataclasses import dataclass
from typing import Optional

from src.world_insight.world.signature import ScalarSignature, StepLetter

FLAG_KINDS = ("all", "nobody", "correct")


@dataclass(frozen=True)
class FlagConstraint:
    """``all(group)=value``, ``nobody(group)=value`` or ``correct(position)=value``."""

    kind: str
    key: int
    value: bool

    def holds(self, letter: StepLetter) -> bool:
        if self.kind == "all":
            return letter.group_all(self.key) == self.value
        if self.kind == "nobody":
            return letter.group_nobody(self.key) == self.value
        return letter.correct(self.key) == self.value

    def render(self, signature: ScalarSignature) -> str:
        key = signature.groups[self.key].name if self.kind != "correct" else str(self.key)
        return f"{self.kind}({key})={'true' if self.value else 'false'}"


@dataclass(frozen=True)
class StepTemplate:
    """Per-coordinate value or wildcard (None) for action and observation, plus flag constraints."""

    action: tuple[Optional[int], ...]
    observation: tuple[Optional[int], ...]
    flags: tuple[FlagConstraint, ...] = ()

    @classmethod
    def anything(cls, signature: ScalarSignature) -> "StepTemplate":
        return cls((None,) * signature.action_dims, (None,) * signature.obs_dims)

    @property
    def is_wildcard(self) -> bool:
        return (
            all(v is None for v in self.action)
            and all(v is None for v in self.observation)
            and not self.flags
        )

    def matches(self, letter: StepLetter) -> bool:
        for want, got in zip(self.action, letter.action):
            if want is not None and want != got:
                return False
        for want, got in zip(self.observation, letter.observation):
            if want is not None and want != got:
                return False
        return all(f.holds(letter) for f in self.flags)

    def render(self, signature: ScalarSignature) -> str:
        def part(values: tuple[Optional[int], ...], coords) -> list[str]:
            return [f"{c.name}={c.values[v]}" for c, v in zip(coords, values) if v is not None]

        action = part(self.action, signature.actions)
        observation = part(self.observation, signature.observations) + [
            f.render(signature) for f in self.flags
        ]
        return f"⟨{','.join(action) or '*'};{','.join(observation) or '*'}⟩"
