"""
Grouping automata: deterministic automata over step letters whose states are
the groups of relative stability of a test. Reading a history tells exactly
which group the current moment belongs to.

Rules are tried in order; the first whose source state and step template both
match decides the successor. A letter no rule matches leaves the group as it
is, so the automaton is total.
"""

import logging
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from src.world_insight.errors import SpecValidationError
from src.world_insight.events.dsl import parse_template
from src.world_insight.events.templates import StepTemplate
from src.world_insight.world.signature import ScalarSignature, StepLetter

logger = logging.getLogger(__name__)

ANY_STATE = "*"


@dataclass(frozen=True)
class GroupRule:
    source: str
    template: StepTemplate
    target: str

    def applies(self, group: str, letter: StepLetter) -> bool:
        return self.source in (ANY_STATE, group) and self.template.matches(letter)


@dataclass(frozen=True, eq=False)
class GroupingAutomaton:
    states: tuple[str, ...]
    initial: str
    rules: tuple[GroupRule, ...] = ()
    name: str = ""
    impossible: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        problems = []
        if len(set(self.states)) != len(self.states):
            problems.append("duplicate group names")
        if self.initial not in self.states:
            problems.append(f"initial group {self.initial!r} is not a declared state")
        for i, rule in enumerate(self.rules, start=1):
            if rule.source != ANY_STATE and rule.source not in self.states:
                problems.append(f"rule {i}: unknown source group {rule.source!r}")
            if rule.target not in self.states:
                problems.append(f"rule {i}: unknown target group {rule.target!r}")
        for group in sorted(self.impossible - set(self.states)):
            problems.append(f"impossible group {group!r} is not a declared state")
        if problems:
            raise SpecValidationError(problems)

    @property
    def start(self) -> str:
        return self.initial

    def step(self, group: str, letter: StepLetter) -> str:
        for rule in self.rules:
            if rule.applies(group, letter):
                return rule.target
        return group

    def accepting(self, group: str) -> bool:
        return True

    def walk(self, letters: Iterable[StepLetter]) -> list[str]:
        """The group after each letter, in order."""
        group, out = self.initial, []
        for letter in letters:
            group = self.step(group, letter)
            out.append(group)
        return out

    def transition_table(self, alphabet: Sequence[StepLetter]) -> dict[tuple[str, StepLetter], str]:
        return {(g, letter): self.step(g, letter) for g in self.states for letter in alphabet}


def single_group(name: str = "all") -> GroupingAutomaton:
    """One group: the test state is the test property."""
    return GroupingAutomaton((name,), name, (), name=name)


def classify_group(automaton: GroupingAutomaton, history: Iterable[StepLetter]) -> str:
    """Group after consuming every step of ``history``; the initial group for an empty one."""
    group = automaton.initial
    for letter in history:
        group = automaton.step(group, letter)
    return group


def load_grouping(document: Mapping[str, Any], signature: ScalarSignature, name: str = "") -> GroupingAutomaton:
    """
    Build an automaton from a parsed YAML document::

        states: [free, holding, over]
        initial: free
        rules:
          - {from: free, on: "⟨pickup;nobody(pickup)=true⟩", to: holding}
        impossible: []      # groups where the test cannot be performed
    """
    try:
        states = tuple(str(s) for s in document["states"])
        initial = str(document.get("initial", states[0]))
        rules = tuple(
            GroupRule(str(r.get("from", ANY_STATE)), parse_template(str(r.get("on", "⟨*;*⟩")), signature), str(r["to"]))
            for r in document.get("rules") or []
        )
    except (KeyError, IndexError, TypeError) as e:
        raise SpecValidationError([f"grouping automaton: missing or malformed field ({e})"]) from e
    automaton = GroupingAutomaton(
        states,
        initial,
        rules,
        name=name or str(document.get("name", "")),
        impossible=frozenset(str(g) for g in document.get("impossible") or ()),
    )
    logger.debug(f"Loaded grouping automaton {automaton.name!r}: {len(states)} groups, {len(rules)} rules")
    return automaton
