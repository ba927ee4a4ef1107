"""
World models.

- WorldDef2: finite states, a partial map (state, action) -> IntervalDistribution, a view per state.
- WorldDef3: standard states carrying visible and invisible variables; the world state is a
  CumulativeState (current standard state plus every variable of every state).
- WorldDef4: a WorldDef3 whose visible variables are read through noise.

A missing transition is an incorrect move. World definitions are immutable and shareable.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence

from src.world_insight.world.distribution import IntervalDistribution, as_fraction
from src.world_insight.world.signature import Action, Coordinate, Observation, ScalarSignature

StateId = Hashable


@dataclass(frozen=True)
class IncorrectMove:
    """Returned, never raised: ``action`` is undefined at ``state``, which stays as it was."""

    state: Hashable
    action: Action


@dataclass(frozen=True, eq=False)
class WorldDef2:
    signature: ScalarSignature
    states: tuple[StateId, ...]
    initial: StateId
    transitions: Mapping[tuple[StateId, Action], IntervalDistribution]
    view: Mapping[StateId, Observation]
    name: str = "def2"

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial!r} is not a state")
        missing = [s for s in self.states if s not in self.view]
        if missing:
            raise ValueError(f"states without a view: {missing[:5]}")

    def transition(self, state: StateId, action: Action) -> Optional[IntervalDistribution]:
        return self.transitions.get((state, action))


@dataclass(frozen=True)
class Variable:
    """An invisible per-state variable and its value names."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError(f"variable {self.name!r} needs at least one value")

    def index(self, value: str | int) -> int:
        if isinstance(value, bool):
            raise ValueError(f"{self.name}: boolean {value!r} is not a value")
        if isinstance(value, int):
            if not 0 <= value < len(self.values):
                raise ValueError(f"{self.name}: index {value} out of range")
            return value
        try:
            return self.values.index(value)
        except ValueError:
            raise ValueError(f"{self.name}: unknown value {value!r}") from None


@dataclass(frozen=True)
class VariableLayout:
    """
    Where each variable lives in a cumulative assignment.

    The assignment is |S| blocks of (m visible + u invisible) values, in state order.
    """

    states: tuple[StateId, ...]
    visible: tuple[Coordinate, ...]
    invisible: tuple[Variable, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "visible", tuple(self.visible))
        object.__setattr__(self, "invisible", tuple(self.invisible))
        names = [c.name for c in self.visible] + [v.name for v in self.invisible]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique within a state")
        if len(set(self.states)) != len(self.states):
            raise ValueError("standard states must be unique")

    @property
    def stride(self) -> int:
        return len(self.visible) + len(self.invisible)

    @property
    def size(self) -> int:
        return len(self.states) * self.stride

    @cached_property
    def state_position(self) -> dict[StateId, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def variable_position(self) -> dict[str, int]:
        names = [c.name for c in self.visible] + [v.name for v in self.invisible]
        return {n: i for i, n in enumerate(names)}

    def offset(self, state: StateId, name: str) -> int:
        return self.state_position[state] * self.stride + self.variable_position[name]

    def domain(self, name: str) -> tuple[str, ...]:
        pos = self.variable_position[name]
        if pos < len(self.visible):
            return self.visible[pos].values
        return self.invisible[pos - len(self.visible)].values

    def value_index(self, name: str, value: str | int) -> int:
        pos = self.variable_position[name]
        if pos < len(self.visible):
            return self.visible[pos].index(value)
        return self.invisible[pos - len(self.visible)].index(value)


@dataclass(frozen=True)
class CumulativeState:
    """The current standard state plus the value of every variable of every state."""

    standard: StateId
    assignment: tuple[int, ...]

    def with_values(self, layout: VariableLayout, updates: Mapping[tuple[StateId, str], int]) -> "CumulativeState":
        values = list(self.assignment)
        for (state, name), value in updates.items():
            values[layout.offset(state, name)] = value
        return CumulativeState(self.standard, tuple(values))

    def moved_to(self, standard: StateId) -> "CumulativeState":
        return CumulativeState(standard, self.assignment)


TransitionRule = Callable[[CumulativeState, Action], Optional[IntervalDistribution]]
CorrectnessRule = Callable[[CumulativeState, Action], bool]


@dataclass(frozen=True, eq=False)
class WorldDef3:
    signature: ScalarSignature
    layout: VariableLayout
    initial: CumulativeState
    rules: TransitionRule
    correct: Optional[CorrectnessRule] = None
    name: str = "def3"

    def __post_init__(self) -> None:
        if self.layout.visible != self.signature.observations:
            raise ValueError("visible variables must be the observation coordinates")
        if len(self.initial.assignment) != self.layout.size:
            raise ValueError(
                f"initial assignment has {len(self.initial.assignment)} values, "
                f"expected |S|*(m+u) = {self.layout.size}"
            )
        if self.initial.standard not in self.layout.state_position:
            raise ValueError(f"initial standard state {self.initial.standard!r} is unknown")

    @property
    def states(self) -> tuple[StateId, ...]:
        return self.layout.states

    def transition(self, cs: CumulativeState, action: Action) -> Optional[IntervalDistribution]:
        """The rule's distribution, or None when the move is incorrect by either source."""
        if self.correct is not None and not self.correct(cs, action):
            return None
        return self.rules(cs, action)

    def is_correct(self, cs: CumulativeState, action: Action) -> bool:
        if self.correct is not None:
            return self.correct(cs, action)
        return self.rules(cs, action) is not None

    def value(self, cs: CumulativeState, state: StateId, name: str) -> int:
        return cs.assignment[self.layout.offset(state, name)]

    def visible(self, cs: CumulativeState) -> Observation:
        """The m visible variables of the current standard state."""
        start = self.layout.state_position[cs.standard] * self.layout.stride
        return cs.assignment[start : start + len(self.layout.visible)]


@dataclass(frozen=True)
class NoiseDescriptor:
    """
    Noise on one visible variable: with probability ``volume`` the reading is
    replaced by a draw from ``spectrum`` (one probability per value).
    """

    volume: Fraction
    spectrum: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        volume = as_fraction(self.volume)
        spectrum = tuple(as_fraction(p) for p in self.spectrum)
        object.__setattr__(self, "volume", volume)
        object.__setattr__(self, "spectrum", spectrum)
        if not 0 <= volume <= 1:
            raise ValueError(f"noise volume {volume} outside [0, 1]")
        if any(p < 0 for p in spectrum):
            raise ValueError("noise spectrum has a negative probability")
        if abs(float(sum(spectrum, Fraction(0)) - 1)) > 1e-12:
            raise ValueError("noise spectrum must sum to 1")

    @classmethod
    def silent(cls, cardinality: int) -> "NoiseDescriptor":
        return cls(Fraction(0), (Fraction(1),) + (Fraction(0),) * (cardinality - 1))

    @classmethod
    def over(cls, volume: object, cardinality: int, weights: Mapping[int, object]) -> "NoiseDescriptor":
        """Spectrum from a sparse {value index: probability} map."""
        spectrum = [Fraction(0)] * cardinality
        for value, p in weights.items():
            spectrum[value] = as_fraction(p)
        return cls(as_fraction(volume), tuple(spectrum))

    @property
    def is_silent(self) -> bool:
        return self.volume == 0

    def output_distribution(self, true_value: int) -> dict[int, Fraction]:
        """p(v) = (1 - Volume)[v == true] + Volume * p_v, restricted to p(v) > 0."""
        out: dict[int, Fraction] = {}
        for v, p in enumerate(self.spectrum):
            prob = self.volume * p + (1 - self.volume if v == true_value else 0)
            if prob > 0:
                out[v] = prob
        return out

    def as_variables(self) -> tuple[Fraction, ...]:
        """The k+1 invisible values this descriptor occupies: volume then spectrum."""
        return (self.volume,) + self.spectrum


NoiseRule = Callable[[CumulativeState, StateId, int], NoiseDescriptor]


def silent_noise(signature: ScalarSignature) -> NoiseRule:
    descriptors = [NoiseDescriptor.silent(c.cardinality) for c in signature.observations]
    return lambda cs, state, j: descriptors[j]


@dataclass(frozen=True, eq=False)
class WorldDef4:
    """A WorldDef3 plus a noise descriptor for each (state, visible variable)."""

    base: WorldDef3
    noise: NoiseRule
    name: str = "def4"

    @property
    def signature(self) -> ScalarSignature:
        return self.base.signature

    @property
    def initial(self) -> CumulativeState:
        return self.base.initial

    @property
    def states(self) -> tuple[StateId, ...]:
        return self.base.states

    def descriptors(self, cs: CumulativeState) -> tuple[NoiseDescriptor, ...]:
        """Noise of the current standard state's visible variables."""
        return tuple(self.noise(cs, cs.standard, j) for j in range(self.signature.obs_dims))

    def noise_assignment(self, cs: CumulativeState) -> tuple[Fraction, ...]:
        """All |S|*m*(k+1) noise variables of ``cs``, state by state."""
        values: list[Fraction] = []
        for state in self.states:
            for j in range(self.signature.obs_dims):
                values.extend(self.noise(cs, state, j).as_variables())
        return tuple(values)


def embed_def3(world: WorldDef3) -> WorldDef4:
    """The same world read without noise."""
    return WorldDef4(world, silent_noise(world.signature), name=world.name)


def assignment_from_blocks(
    layout: VariableLayout, blocks: Mapping[StateId, Sequence[int]] | Iterable[Sequence[int]]
) -> tuple[int, ...]:
    """Concatenate per-state value blocks in layout order."""
    if isinstance(blocks, Mapping):
        ordered = [blocks[s] for s in layout.states]
    else:
        ordered = list(blocks)
    values: list[int] = []
    for block in ordered:
        if len(block) != layout.stride:
            raise ValueError(f"state block has {len(block)} values, expected {layout.stride}")
        values.extend(block)
    return tuple(values)


__all__ = [
    "CumulativeState",
    "IncorrectMove",
    "NoiseDescriptor",
    "StateId",
    "Variable",
    "VariableLayout",
    "WorldDef2",
    "WorldDef3",
    "WorldDef4",
    "assignment_from_blocks",
    "embed_def3",
    "silent_noise",
]
