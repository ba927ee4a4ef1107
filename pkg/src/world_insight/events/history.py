"""
Histories, local histories and the history log format.

A history is a_1 v_1 ... a_{t-1} v_{t-1}, stored as StepLetters indexed from 1.
The log holds one step per line::

    t <TAB> action labels <TAB> observation labels <TAB> correctness bits

Lines starting with ``#`` are comments; ``# episode N`` starts a new history.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO

from src.world_insight.errors import LocalHistoryError, SpecParseError
from src.world_insight.world.signature import Correctness, ScalarSignature, StepLetter

logger = logging.getLogger(__name__)

EPISODE_MARKER = "# episode"


@dataclass
class History:
    """Append-only sequence of step letters; step(1) is the first."""

    signature: ScalarSignature
    steps: list[StepLetter] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[StepLetter]:
        return iter(self.steps)

    def append(self, letter: StepLetter) -> None:
        if not self.steps and letter.action != self.signature.nothing_action:
            raise ValueError("the first action of a history must be the all-Nothing action")
        self.steps.append(letter)

    def step(self, q: int) -> StepLetter:
        if not 1 <= q <= len(self.steps):
            raise LocalHistoryError(f"moment {q} outside the history 1..{len(self.steps)}")
        return self.steps[q - 1]


@dataclass(frozen=True)
class LocalHistory:
    """
    A window around moment q: ``past`` ends with the present step (index 0),
    ``future`` holds the steps after it (indices 1, 2, ...).
    """

    past: tuple[StepLetter, ...]
    future: tuple[StepLetter, ...] = ()
    absolute_origin: bool = False

    def __post_init__(self) -> None:
        if not self.past:
            raise LocalHistoryError("a local history needs a non-empty past")

    @property
    def present(self) -> StepLetter:
        return self.past[-1]

    def prepend(self, letter: StepLetter) -> "LocalHistory":
        return LocalHistory((letter,) + self.past, self.future, False)

    def extend(self, letter: StepLetter) -> "LocalHistory":
        return LocalHistory(self.past, self.future + (letter,), self.absolute_origin)


def localize(history: History, q: int, k: int, s: int) -> LocalHistory:
    """
    Steps q-k..q become the past (clipped at step 1) and q+1..q+s the future
    (clipped at the end). ``absolute_origin`` is set when the past reaches step 1.
    """
    if not 1 <= q <= len(history):
        raise LocalHistoryError(f"moment {q} outside the history 1..{len(history)}")
    if k < 0 or s < 0:
        raise LocalHistoryError("window lengths must be non-negative")
    first = max(1, q - k)
    last = min(q + s, len(history))
    return LocalHistory(
        past=tuple(history.steps[first - 1 : q]),
        future=tuple(history.steps[q:last]),
        absolute_origin=first == 1,
    )


def format_letter(signature: ScalarSignature, t: int, letter: StepLetter) -> str:
    return "\t".join(
        (
            str(t),
            signature.action_label(letter.action),
            signature.observation_label(letter.observation),
            letter.correctness.bits(),
        )
    )


def write_history_log(
    out: TextIO, histories: Iterable[History], header: Optional[dict[str, object]] = None
) -> None:
    for key, value in (header or {}).items():
        out.write(f"# {key}: {value}\n")
    for e, history in enumerate(histories):
        out.write(f"{EPISODE_MARKER} {e}\n")
        for t, letter in enumerate(history, start=1):
            out.write(format_letter(history.signature, t, letter) + "\n")


def parse_letter(signature: ScalarSignature, line: str, where: str) -> tuple[int, StepLetter]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        raise SpecParseError("expected 4 tab-separated fields", where)
    try:
        t = int(parts[0])
        letter = StepLetter(
            signature.parse_action_label(parts[1]),
            signature.parse_observation_label(parts[2]),
            Correctness.from_bits(signature, parts[3].strip()),
        )
    except ValueError as e:
        raise SpecParseError(str(e), where) from e
    return t, letter


def read_history_log(source: str | Path | TextIO, signature: ScalarSignature) -> list[History]:
    """Histories of a log, one per episode; a log without episode markers is one history."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return read_history_log(f, signature)
    name = getattr(source, "name", "<log>")
    histories: list[History] = []
    current: Optional[History] = None
    for n, line in enumerate(source, start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if line.startswith(EPISODE_MARKER):
                current = History(signature)
                histories.append(current)
            continue
        if current is None:
            current = History(signature)
            histories.append(current)
        t, letter = parse_letter(signature, line, f"{name}:{n}")
        if t != len(current) + 1:
            raise SpecParseError(f"step {t} out of sequence", f"{name}:{n}")
        try:
            current.append(letter)
        except ValueError as e:
            raise SpecParseError(str(e), f"{name}:{n}") from e
    logger.debug(f"Read {len(histories)} histories from {name}")
    return histories
