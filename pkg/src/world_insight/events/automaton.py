"""
Finite automata over step letters.

Edges are labelled by StepTemplates (None = any letter). Patterns compile to an
NFA, and the DFA is built lazily by subset construction: a subset is created
the first time a letter leads to it, so the automaton is deterministic and
total over whatever alphabet the world produces, finite or not.
"""

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Protocol, Sequence

from src.world_insight.events.templates import StepTemplate
from src.world_insight.world.signature import StepLetter

Label = Optional[StepTemplate]


@dataclass(frozen=True)
class NFA:
    starts: frozenset[int]
    accepts: frozenset[int]
    edges: tuple[tuple[tuple[Label, int], ...], ...]

    @property
    def size(self) -> int:
        return len(self.edges)

    @classmethod
    def literal(cls, templates: Sequence[StepTemplate]) -> "NFA":
        """Exactly the words t_1 ... t_n (one letter per template)."""
        n = len(templates)
        edges = tuple(((templates[i], i + 1),) for i in range(n)) + ((),)
        return cls(frozenset({0}), frozenset({n}), edges)

    @classmethod
    def empty_word(cls) -> "NFA":
        return cls(frozenset({0}), frozenset({0}), ((),))

    @classmethod
    def everything(cls) -> "NFA":
        return cls(frozenset({0}), frozenset({0}), (((None, 0),),))

    def _with_edges(self, extra: dict[int, list[tuple[Label, int]]]) -> tuple[tuple[tuple[Label, int], ...], ...]:
        return tuple(tuple(self.edges[i]) + tuple(extra.get(i, ())) for i in range(self.size))

    def with_any_prefix(self) -> "NFA":
        """Σ* · L"""
        return NFA(self.starts, self.accepts, self._with_edges({s: [(None, s)] for s in self.starts}))

    def with_any_suffix(self) -> "NFA":
        """L · Σ*"""
        return NFA(self.starts, self.accepts, self._with_edges({a: [(None, a)] for a in self.accepts}))

    def with_bounded_suffix(self, d: int) -> "NFA":
        """L · Σ^{<=d}: a fresh tail of d any-letter states after every accept state."""
        base = self.size
        tail = tuple(((None, base + i + 1),) for i in range(d - 1)) + ((),) if d > 0 else ()
        extra = {a: [(None, base)] for a in self.accepts} if d > 0 else {}
        edges = self._with_edges(extra) + tail
        return NFA(self.starts, self.accepts | frozenset(range(base, base + d)), edges)

    def with_bounded_prefix(self, d: int) -> "NFA":
        """Σ^{<=d} · L: d any-letter states in front of the start states."""
        shifted = tuple(tuple((label, t + d) for label, t in out) for out in self.edges)
        head = tuple(((None, i + 1),) for i in range(d - 1))
        if d > 0:
            head = head + (tuple((None, s + d) for s in self.starts),)
        starts = frozenset(range(d)) | frozenset(s + d for s in self.starts)
        return NFA(starts, frozenset(a + d for a in self.accepts), head + shifted)


class Automaton(Protocol):
    """What the matcher needs from a deterministic automaton."""

    start: Hashable

    def step(self, state: Hashable, letter: StepLetter) -> Hashable: ...

    def accepting(self, state: Hashable) -> bool: ...


@dataclass(frozen=True)
class ExplicitDFA:
    """A DFA materialized over a finite alphabet, states numbered from 0 (the start)."""

    states: int
    accepts: frozenset[int]
    table: dict[tuple[int, StepLetter], int] = field(hash=False)

    start = 0

    def step(self, state: int, letter: StepLetter) -> int:
        return self.table[(state, letter)]

    def accepting(self, state: int) -> bool:
        return state in self.accepts


class LazyDFA:
    """Subset construction on demand, memoized per (subset id, letter)."""

    start = 0

    def __init__(self, nfa: NFA):
        self.nfa = nfa
        self._subsets: list[frozenset[int]] = [nfa.starts]
        self._ids: dict[frozenset[int], int] = {nfa.starts: 0}
        self._accepting: list[bool] = [bool(nfa.starts & nfa.accepts)]
        self._memo: dict[tuple[int, StepLetter], int] = {}

    def _intern(self, subset: frozenset[int]) -> int:
        found = self._ids.get(subset)
        if found is None:
            found = len(self._subsets)
            self._ids[subset] = found
            self._subsets.append(subset)
            self._accepting.append(bool(subset & self.nfa.accepts))
        return found

    def step(self, state: int, letter: StepLetter) -> int:
        key = (state, letter)
        found = self._memo.get(key)
        if found is None:
            targets = {
                target
                for s in self._subsets[state]
                for label, target in self.nfa.edges[s]
                if label is None or label.matches(letter)
            }
            found = self._intern(frozenset(targets))
            self._memo[key] = found
        return found

    def accepting(self, state: int) -> bool:
        return self._accepting[state]

    def run(self, letters: Iterable[StepLetter], state: Optional[int] = None) -> int:
        current = self.start if state is None else state
        for letter in letters:
            current = self.step(current, letter)
        return current

    def accepts(self, letters: Iterable[StepLetter]) -> bool:
        return self.accepting(self.run(letters))

    def materialize(self, alphabet: Sequence[StepLetter]) -> ExplicitDFA:
        """Explicit transition table over ``alphabet``, renumbered in discovery order."""
        order = {self.start: 0}
        queue = [self.start]
        table: dict[tuple[int, StepLetter], int] = {}
        while queue:
            state = queue.pop(0)
            for letter in alphabet:
                target = self.step(state, letter)
                if target not in order:
                    order[target] = len(order)
                    queue.append(target)
                table[(order[state], letter)] = order[target]
        accepts = frozenset(i for s, i in order.items() if self.accepting(s))
        return ExplicitDFA(len(order), accepts, table)


class CountingDFA:
    """
    Counts occurrences of a pattern modulo ``modulus`` and accepts when the count
    equals ``residue``. ``inner`` must recognise Σ*·p so that it accepts exactly
    at the end of each occurrence.
    """

    def __init__(self, inner: LazyDFA, residue: int, modulus: int):
        if modulus < 1 or not 0 <= residue < modulus:
            raise ValueError(f"need 0 <= residue < modulus, got {residue}, {modulus}")
        self.inner = inner
        self.residue = residue
        self.modulus = modulus
        self.start = (inner.start, 0)

    def step(self, state: tuple[int, int], letter: StepLetter) -> tuple[int, int]:
        inner, count = state
        nxt = self.inner.step(inner, letter)
        return nxt, (count + self.inner.accepting(nxt)) % self.modulus

    def accepting(self, state: tuple[int, int]) -> bool:
        return state[1] == self.residue


def run(automaton: Automaton, letters: Iterable[StepLetter], state: Hashable = None) -> Hashable:
    current = automaton.start if state is None else state
    for letter in letters:
        current = automaton.step(current, letter)
    return current


def accepts_some_prefix(automaton: Automaton, letters: Iterable[StepLetter]) -> bool:
    """True when the empty word or some prefix of ``letters`` is accepted."""
    state = automaton.start
    if automaton.accepting(state):
        return True
    for letter in letters:
        state = automaton.step(state, letter)
        if automaton.accepting(state):
            return True
    return False
