"""
Predict Module - Theories as (prediction, confidence)

A theory answers, at every moment, with two numbers: how likely the test
result is YES, and how much to trust that. Two sources feed it:

- Experiments: n YES and m NO results counted while the experiment held
  give prediction n/(n+m), with confidence growing in n+m.
- Stability: the last time the test was performed its value was v; the
  property is assumed unchanged, with confidence halving every half_life steps.

combine_predictions folds any number of these into one answer.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Iterable, Optional

from src.world_insight.theory.stats import StatRecord

logger = logging.getLogger(__name__)

DEFAULT_C0 = 10
DEFAULT_HALF_LIFE = 3.0

_announced: set[str] = set()


def _announce_once(key: str, message: str) -> None:
    if key not in _announced:
        _announced.add(key)
        logger.info(message)


@dataclass(frozen=True)
class TheoryOutput:
    """prediction and confidence, both in [0, 1]. Exact Fractions are kept when the inputs allow it."""

    prediction: Real = Fraction(1, 2)
    confidence: Real = Fraction(0)

    def __post_init__(self) -> None:
        for name in ("prediction", "confidence"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    @property
    def is_certain(self) -> bool:
        return self.confidence == 1

    def to_dict(self, digits: int = 6) -> dict[str, float]:
        return {
            "prediction": round(float(self.prediction), digits),
            "confidence": round(float(self.confidence), digits),
        }


NO_EVIDENCE = TheoryOutput()


def predict_from_experiment(rec: StatRecord, c0: int | float = DEFAULT_C0) -> TheoryOutput:
    """
    Prediction n/(n+m) and confidence (n+m)/(n+m+c0).

    Args:
        rec: Counts gathered for one experiment and test
        c0: Evidence needed for confidence 1/2

    Returns:
        TheoryOutput; (1/2, 0) when nothing was counted
    """
    if c0 <= 0:
        raise ValueError(f"c0 must be positive, got {c0}")
    _announce_once("c0", f"Experiment confidence law: (n+m)/(n+m+c0) with c0={c0}")
    total = rec.total
    if total == 0:
        return NO_EVIDENCE
    c0_exact = Fraction(c0) if isinstance(c0, int) else Fraction(c0).limit_denominator(10**9)
    return TheoryOutput(Fraction(rec.n, total), Fraction(total) / (total + c0_exact))


def predict_from_stability(
    last_value: Optional[bool], steps_since: int, half_life: float = DEFAULT_HALF_LIFE
) -> TheoryOutput:
    """
    Assume the property kept the value it had when last tested.

    Args:
        last_value: Result of the last performed test, None if never performed
        steps_since: Steps elapsed since then (0 means it was performed now)
        half_life: Steps after which confidence has dropped to 1/2

    Returns:
        (last_value as 0/1, 2^(-steps_since/half_life)); (1/2, 0) without a prior test
    """
    if half_life <= 0:
        raise ValueError(f"half_life must be positive, got {half_life}")
    if last_value is None:
        return NO_EVIDENCE
    if steps_since < 0:
        raise ValueError(f"steps_since must be non-negative, got {steps_since}")
    prediction = Fraction(1) if last_value else Fraction(0)
    if steps_since == 0:
        return TheoryOutput(prediction, Fraction(1))
    return TheoryOutput(prediction, 2.0 ** (-steps_since / half_life))


def combine_predictions(outputs: Iterable[TheoryOutput]) -> TheoryOutput:
    """
    Overall theory from several partial ones.

    A certain output (confidence 1, i.e. the test is being performed right now)
    wins outright. Otherwise the prediction is the confidence-weighted mean and
    the confidence is 1 - prod(1 - c_i).
    """
    collected = list(outputs)
    for out in collected:
        if out.is_certain:
            return TheoryOutput(out.prediction, Fraction(1))
    weight = sum((out.confidence for out in collected), Fraction(0))
    if weight == 0:
        return NO_EVIDENCE
    prediction = sum((out.prediction * out.confidence for out in collected), Fraction(0)) / weight
    doubt = math.prod((1 - out.confidence for out in collected), start=Fraction(1))
    return TheoryOutput(min(max(prediction, 0), 1), 1 - doubt)


@dataclass
class StabilityTracker:
    """
    Remembers the last performed result of one test in one group and how the
    value behaved between consecutive performances.

    ``changes`` over ``exposure`` (the summed gaps between consecutive
    performances) estimates the per-step hazard of the property changing.
    """

    last_value: Optional[bool] = None
    last_moment: Optional[int] = None
    performed: int = 0
    changes: int = 0
    exposure: int = 0
    gaps: list[int] = field(default_factory=list)

    def observe(self, moment: int, value: bool) -> None:
        if self.last_moment is not None:
            if moment < self.last_moment:
                raise ValueError(f"moment {moment} precedes last observation {self.last_moment}")
            gap = moment - self.last_moment
            if gap > 0:
                self.gaps.append(gap)
                self.exposure += gap
                self.changes += value != self.last_value
        self.last_value = value
        self.last_moment = moment
        self.performed += 1

    def steps_since(self, now: int) -> Optional[int]:
        return None if self.last_moment is None else now - self.last_moment

    def output(self, now: int, half_life: float = DEFAULT_HALF_LIFE) -> TheoryOutput:
        since = self.steps_since(now)
        if since is None:
            return NO_EVIDENCE
        return predict_from_stability(self.last_value, since, half_life)

    def estimate_half_life(self, fallback: float = DEFAULT_HALF_LIFE) -> float:
        """
        Half-life matching the observed change rate: with per-step hazard h the
        value survives g steps with probability (1-h)^g, so H = ln 2 / -ln(1-h).

        Returns ``fallback`` until at least one change has been seen.
        """
        if self.changes == 0 or self.exposure == 0:
            return fallback
        hazard = min(self.changes / self.exposure, 0.999)
        return math.log(2) / -math.log1p(-hazard)

    def to_dict(self) -> dict[str, Any]:
        return {
            "last_value": self.last_value,
            "last_moment": self.last_moment,
            "performed": self.performed,
            "changes": self.changes,
            "exposure": self.exposure,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StabilityTracker":
        return cls(
            last_value=data.get("last_value"),
            last_moment=data.get("last_moment"),
            performed=int(data.get("performed", 0)),
            changes=int(data.get("changes", 0)),
            exposure=int(data.get("exposure", 0)),
        )
