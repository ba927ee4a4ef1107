"""
Interval distributions and their exact sampling.

An outcome carries a probability interval [lo, hi]. A distribution is valid when

    lo_i <= hi_i,   sum(lo) <= 1 <= sum(hi),   hi_i <= 1 - Sum + lo_i   (Sum = sum(lo))

with equality in the last inequality for at least one i. Sampling hides the
predictable part in a grid of Q equal cells, Q = lcm(1..100), so hundredths
are hit exactly; the unpredictable part only decides among surviving outcomes.
"""

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

from src.world_insight.errors import MalformedDistributionError

HUNDRED = 100
Q_GRID = math.lcm(*range(1, HUNDRED + 1))
UNPREDICTABLE_BITS = 32


def as_fraction(value: Any) -> Fraction:
    """Exact rational from int, Fraction, "a/b" text or a decimal float (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


def is_hundredths(value: Fraction) -> bool:
    return (value * HUNDRED).denominator == 1


@dataclass(frozen=True)
class IntervalOutcome:
    """A possible successor with its probability bounds."""

    target: Hashable
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))

    @classmethod
    def hundredths(cls, target: Hashable, lo: int, hi: int) -> "IntervalOutcome":
        return cls(target, Fraction(lo, HUNDRED), Fraction(hi, HUNDRED))


@dataclass(frozen=True)
class IntervalDistribution:
    """Ordered, non-empty list of interval outcomes."""

    outcomes: tuple[IntervalOutcome, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if not self.outcomes:
            raise MalformedDistributionError("an interval distribution needs at least one outcome")

    @classmethod
    def certain(cls, target: Hashable) -> "IntervalDistribution":
        return cls((IntervalOutcome(target, Fraction(1), Fraction(1)),))

    @classmethod
    def from_hundredths(cls, triples: Iterable[tuple[Hashable, int, int]]) -> "IntervalDistribution":
        return cls(tuple(IntervalOutcome.hundredths(t, lo, hi) for t, lo, hi in triples))

    @property
    def lo_sum(self) -> Fraction:
        return sum((o.lo for o in self.outcomes), Fraction(0))

    @property
    def hi_sum(self) -> Fraction:
        return sum((o.hi for o in self.outcomes), Fraction(0))

    @property
    def targets(self) -> tuple[Hashable, ...]:
        return tuple(o.target for o in self.outcomes)

    @property
    def is_predictable(self) -> bool:
        """True when every interval is a point: no unpredictable chance left."""
        return all(o.lo == o.hi for o in self.outcomes)

    def possible_targets(self) -> tuple[Hashable, ...]:
        """Targets that can actually be drawn (hi > 0)."""
        return tuple(o.target for o in self.outcomes if o.hi > 0)

    def relabel(self, rename: Callable[[Hashable], Hashable]) -> "IntervalDistribution":
        """The same distribution over renamed targets."""
        return IntervalDistribution(tuple(IntervalOutcome(rename(o.target), o.lo, o.hi) for o in self.outcomes))


Part = tuple[Hashable, Fraction]


@dataclass(frozen=True)
class SplitDistribution(IntervalDistribution):
    """
    Each outcome of ``source`` split into weighted parts.

    ``outcomes`` lists every part with bounds [lo*p, hi*p]. Sampling keeps the
    two stages apart: the source outcome is selected as usual, then one of its
    parts with probability p, so the split world draws exactly what the
    source world draws.
    """

    source: Optional[IntervalDistribution] = None
    parts: tuple[tuple[Part, ...], ...] = ()

    @classmethod
    def split(cls, source: IntervalDistribution, parts: Sequence[Sequence[Part]]) -> "SplitDistribution":
        if len(parts) != len(source.outcomes):
            raise MalformedDistributionError("one part list is needed per source outcome")
        frozen = tuple(tuple((t, as_fraction(p)) for t, p in group) for group in parts)
        outcomes = tuple(
            IntervalOutcome(t, o.lo * p, o.hi * p) for o, group in zip(source.outcomes, frozen) for t, p in group
        )
        indexed = IntervalDistribution(tuple(IntervalOutcome(i, o.lo, o.hi) for i, o in enumerate(source.outcomes)))
        return cls(outcomes, indexed, frozen)

    @property
    def part_grid(self) -> int:
        return math.lcm(*(p.denominator for group in self.parts for _, p in group))

    def pick_part(self, index: int, x: int) -> Hashable:
        """Part of source outcome ``index`` whose cumulative share holds cell (x mod grid)+1."""
        grid = self.part_grid
        cell, running = (x % grid) + 1, Fraction(0)
        group = self.parts[index]
        for target, p in group:
            running += p
            if cell <= running * grid:
                return target
        return next(t for t, p in reversed(group) if p > 0)

    def relabel(self, rename: Callable[[Hashable], Hashable]) -> "SplitDistribution":
        assert self.source is not None
        return SplitDistribution(
            tuple(IntervalOutcome(rename(o.target), o.lo, o.hi) for o in self.outcomes),
            self.source,
            tuple(tuple((rename(t), p) for t, p in group) for group in self.parts),
        )


@dataclass(frozen=True)
class Violation:
    """One broken constraint: which family, at which (1-based) index, and the numbers."""

    constraint: str
    index: Optional[int]
    detail: str

    def __str__(self) -> str:
        where = f" at i={self.index}" if self.index is not None else ""
        return f"{self.constraint}{where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self, location: str = "") -> list[str]:
        prefix = f"{location}: " if location else ""
        return [prefix + str(v) for v in self.violations]


def _fmt(value: Fraction) -> str:
    return f"{float(value):.4g}" if value.denominator != 1 else str(value.numerator)


def validate_distribution(
    dist: IntervalDistribution, *, require_hundredths: bool = False
) -> ValidationReport:
    """
    Check every constraint family and report each violation by name and index.

    Constraint names: "range", "hundredths", "lo<=hi", "distinct-targets",
    "sum(lo)<=1", "sum(hi)>=1", "(1)" and "(1)-equality". A split distribution
    is judged by its source plus "parts": each outcome's shares lie in (0, 1]
    and add up to 1.
    """
    if isinstance(dist, SplitDistribution):
        return _validate_split(dist, require_hundredths)
    violations: list[Violation] = []
    outcomes = dist.outcomes
    seen: set = set()
    for i, o in enumerate(outcomes, start=1):
        if not (0 <= o.lo <= 1 and 0 <= o.hi <= 1):
            violations.append(Violation("range", i, f"bounds [{_fmt(o.lo)}, {_fmt(o.hi)}] leave [0, 1]"))
        if require_hundredths and not (is_hundredths(o.lo) and is_hundredths(o.hi)):
            violations.append(Violation("hundredths", i, "bounds must be whole hundredths"))
        if o.lo > o.hi:
            violations.append(Violation("lo<=hi", i, f"lo {_fmt(o.lo)} > hi {_fmt(o.hi)}"))
        if o.target in seen:
            violations.append(Violation("distinct-targets", i, f"target {o.target!r} repeats"))
        seen.add(o.target)

    total_lo, total_hi = dist.lo_sum, dist.hi_sum
    if total_lo > 1:
        violations.append(Violation("sum(lo)<=1", None, f"sum of lower bounds is {_fmt(total_lo)}"))
    if total_hi < 1:
        violations.append(Violation("sum(hi)>=1", None, f"sum of upper bounds is {_fmt(total_hi)}"))

    slack = 1 - total_lo
    tight = False
    for i, o in enumerate(outcomes, start=1):
        limit = slack + o.lo
        if o.hi > limit:
            violations.append(
                Violation("(1)", i, f"hi {_fmt(o.hi)} exceeds 1 - Sum + lo = {_fmt(limit)}")
            )
        elif o.hi == limit:
            tight = True
    if not tight:
        violations.append(
            Violation("(1)-equality", None, "hi_i = 1 - Sum + lo_i must hold for at least one i")
        )
    return ValidationReport(tuple(violations))


def _validate_split(dist: SplitDistribution, require_hundredths: bool) -> ValidationReport:
    assert dist.source is not None
    violations = list(validate_distribution(dist.source, require_hundredths=require_hundredths).violations)
    for i, group in enumerate(dist.parts, start=1):
        shares = [p for _, p in group]
        if not group or any(not 0 < p <= 1 for p in shares):
            violations.append(Violation("parts", i, "every share must lie in (0, 1]"))
        elif sum(shares) != 1:
            violations.append(Violation("parts", i, f"shares add up to {_fmt(sum(shares))}, not 1"))
    seen: set = set()
    for i, o in enumerate(dist.outcomes, start=1):
        if o.target in seen:
            violations.append(Violation("distinct-targets", i, f"target {o.target!r} repeats"))
        seen.add(o.target)
    return ValidationReport(tuple(violations))


def merge_duplicate_targets(outcomes: Sequence[IntervalOutcome]) -> tuple[IntervalOutcome, ...]:
    """Fold outcomes sharing a target into one, adding their bounds (hi capped at 1)."""
    merged: dict[Hashable, IntervalOutcome] = {}
    for o in outcomes:
        if o.target in merged:
            prev = merged[o.target]
            merged[o.target] = IntervalOutcome(o.target, prev.lo + o.lo, min(Fraction(1), prev.hi + o.hi))
        else:
            merged[o.target] = o
    return tuple(merged.values())


@dataclass(frozen=True)
class _Layout:
    grid: int
    lo_bounds: tuple[int, ...]
    survival: tuple[int, ...]


@lru_cache(maxsize=4096)
def _layout(dist: IntervalDistribution) -> _Layout:
    slack = 1 - dist.lo_sum
    shares = [(o.hi - o.lo) / slack if slack > 0 else Fraction(0) for o in dist.outcomes]
    denominators = [o.lo.denominator for o in dist.outcomes] + [c.denominator for c in shares]
    grid = math.lcm(Q_GRID, *denominators)
    bounds, running = [], Fraction(0)
    for o in dist.outcomes:
        running += o.lo
        bounds.append(int(running * grid))
    return _Layout(grid, tuple(bounds), tuple(int(c * grid) for c in shares))


def sampling_grid(dist: IntervalDistribution) -> int:
    """Number of equal cells the distribution is laid out on: lcm(Q, every denominator)."""
    if isinstance(dist, SplitDistribution):
        assert dist.source is not None
        return math.lcm(_layout(dist.source).grid, dist.part_grid)
    return _layout(dist).grid


def select_outcome(dist: IntervalDistribution, x1: int, x2: int, y: int, x3: int = 0) -> Hashable:
    """
    Pick a target from two predictable draws and one unpredictable draw.

    Phase 1: cell (x1 mod grid)+1 falls in one of the lo-intervals or in the remainder.
    Phase 2 (remainder only): cell (x2 mod grid)+1 keeps every outcome whose share
    c_i = (hi_i - lo_i) / (1 - Sum) reaches it, in original order; y mod R picks one.

    A split distribution runs both phases on its source, then x3 picks a part.
    """
    if len(dist.outcomes) == 1:
        return dist.outcomes[0].target
    if isinstance(dist, SplitDistribution):
        assert dist.source is not None
        return dist.pick_part(select_outcome(dist.source, x1, x2, y), x3)
    layout = _layout(dist)
    cell = (x1 % layout.grid) + 1
    for outcome, bound in zip(dist.outcomes, layout.lo_bounds):
        if cell <= bound:
            return outcome.target
    cell = (x2 % layout.grid) + 1
    survivors = [o.target for o, c in zip(dist.outcomes, layout.survival) if cell <= c]
    if not survivors:
        raise MalformedDistributionError("no outcome survives; the distribution was not validated")
    return survivors[y % len(survivors)]


def sample_outcome(
    dist: IntervalDistribution, predictable: random.Random, unpredictable: random.Random
) -> Hashable:
    """Sample a target. Single-outcome distributions consume no randomness."""
    if len(dist.outcomes) == 1:
        return dist.outcomes[0].target
    grid = sampling_grid(dist)
    x1 = predictable.randrange(grid)
    x2 = predictable.randrange(grid)
    y = unpredictable.getrandbits(UNPREDICTABLE_BITS)
    if isinstance(dist, SplitDistribution):
        return select_outcome(dist, x1, x2, y, predictable.randrange(grid))
    return select_outcome(dist, x1, x2, y)
