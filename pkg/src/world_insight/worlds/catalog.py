"""
Catalog Module - Ready-Made Experiments, Tests and Grouping Automata

This module defines the standard theory setups for the bundled worlds.
Think of it as the starting kit an agent gets before it collects anything.

Structure:
- Experiments: events whose statistics are collected
- Tests: condition + result
- Groupings: per test, the automaton splitting moments into groups of relative stability

Everything is kept as plain documents (the same shape as the YAML files the
CLI reads), so a catalog entry can be dumped, edited and loaded back.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

from src.world_insight.events.dsl import EventPattern, parse_event
from src.world_insight.theory.grouping import GroupingAutomaton, load_grouping, single_group
from src.world_insight.theory.tests import UNIVERSAL_CONDITION, Test, load_tests
from src.world_insight.world.signature import ScalarSignature

WEEKDAY_EXPERIMENT = "B: mod(⟨*;*⟩, 0, 7) / ε"


@dataclass
class CatalogEntry:
    """
    One catalog document.

    Attributes:
        name: Unique identifier
        document: The YAML-shaped content
        description: What the entry is for
    """

    name: str
    document: Dict[str, Any]
    description: str = ""


@dataclass
class TheorySetup:
    """Parsed experiments, tests and grouping automata for one world."""

    experiments: List[EventPattern]
    tests: List[Test]
    groupings: Dict[str, GroupingAutomaton] = field(default_factory=dict)

    def grouping_for(self, test: str) -> GroupingAutomaton:
        return self.groupings.get(test) or single_group()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiments": [e.label for e in self.experiments],
            "tests": [t.describe() for t in self.tests],
            "groupings": {t: list(a.states) for t, a in self.groupings.items()},
        }


def load_setup(document: Dict[str, Any], signature: ScalarSignature) -> TheorySetup:
    """
    Parse a theory document::

        experiments: [{name: weekday, event: "B: mod(⟨*;*⟩, 0, 7) / ε"}]
        tests: [{name: unlocked, condition: "A: ⟨try;*⟩ / ε", result: status=unlocked}]
        groupings: {unlocked: {states: [...], initial: ..., rules: [...]}}
    """
    experiments = [
        parse_event(str(e["event"]), signature, name=str(e.get("name", "")))
        for e in document.get("experiments") or [{"name": "always", "event": UNIVERSAL_CONDITION}]
    ]
    tests = load_tests(document.get("tests") or [], signature)
    groupings = {
        str(test): load_grouping(doc, signature, name=str(test))
        for test, doc in (document.get("groupings") or {}).items()
    }
    return TheorySetup(experiments, tests, groupings)


class StandardCatalog:
    """
    Standard setups for the chess and doors worlds.

    Each getter returns fresh documents; ``get_setup`` parses one world's
    documents against that world's signature.
    """

    @staticmethod
    def get_chess_experiments() -> List[CatalogEntry]:
        """
        Experiments for the chess world.

        Returns:
            The universally valid experiment and "a white piece is in sight"
        """
        return [
            CatalogEntry("always", {"name": "always", "event": UNIVERSAL_CONDITION}, "Holds at every moment"),
            CatalogEntry(
                "white-in-sight",
                {"name": "white-in-sight", "event": "A: ⟨*;color=White⟩ / ε"},
                "The eye rests on something read as white",
            ),
        ]

    @staticmethod
    def get_chess_tests() -> List[CatalogEntry]:
        """
        The two chess tests.

        - see-white: "I see a white piece", universally valid condition
        - can-pick-up: "If I see a white piece, I can pick it up"
        """
        return [
            CatalogEntry(
                "see-white",
                {"name": "see-white", "condition": UNIVERSAL_CONDITION, "result": "color=White"},
                "I see a white piece",
            ),
            CatalogEntry(
                "can-pick-up",
                {
                    "name": "can-pick-up",
                    "condition": "A: ⟨*;color=White⟩ / ε",
                    "result": "nobody(pickup)=false",
                },
                "If I see a white piece, I can pick it up",
            ),
        ]

    @staticmethod
    def get_chess_groupings() -> List[CatalogEntry]:
        """
        Grouping automaton of can-pick-up: free, holding a piece, game over.

        The agent only plays correct moves, so a pick-up letter after which no
        pick-up is possible means the hand is now full; a put-down after which
        no put-down is possible means it is empty again. Any reward ends the game.
        """
        rules = [
            {"from": "*", "on": "⟨*;reward=1⟩", "to": "over"},
            {"from": "*", "on": "⟨*;reward=0⟩", "to": "over"},
            {"from": "*", "on": "⟨*;reward=-1⟩", "to": "over"},
            {"from": "free", "on": "⟨pickup;nobody(pickup)=true⟩", "to": "holding"},
            {"from": "holding", "on": "⟨putdown;nobody(putdown)=true⟩", "to": "free"},
            {"from": "over", "on": "⟨newgame;*⟩", "to": "free"},
        ]
        return [
            CatalogEntry(
                "can-pick-up",
                {"name": "can-pick-up", "states": ["free", "holding", "over"], "initial": "free", "rules": rules},
                "Picked up a piece / game over",
            )
        ]

    @staticmethod
    def get_doors_experiments() -> List[CatalogEntry]:
        return [
            CatalogEntry("always", {"name": "always", "event": UNIVERSAL_CONDITION}, "Holds at every moment"),
            CatalogEntry("weekday", {"name": "weekday", "event": WEEKDAY_EXPERIMENT}, "Today is Monday"),
        ]

    @staticmethod
    def get_doors_tests() -> List[CatalogEntry]:
        return [
            CatalogEntry(
                "door-unlocked",
                {"name": "door-unlocked", "condition": "A: ⟨try;*⟩ / ε", "result": "status=unlocked"},
                "The door I tried is unlocked",
            )
        ]

    @staticmethod
    def get_doors_groupings(num_doors: int) -> List[CatalogEntry]:
        """One group per door: the group is the door the agent stands at."""
        doors = [f"d{i}" for i in range(num_doors)]
        rules = [{"from": "*", "on": f"⟨*;door={d}⟩", "to": d} for d in doors]
        return [
            CatalogEntry(
                "door-unlocked",
                {"name": "door-unlocked", "states": doors, "initial": doors[0], "rules": rules},
                "Which door am I at",
            )
        ]

    @staticmethod
    def get_all_documents(world: str, num_doors: int = 3) -> Dict[str, Any]:
        """
        One world's catalog as a single theory document.

        Args:
            world: "chess" or "doors"
            num_doors: Door count for the doors grouping

        Returns:
            Document in the shape load_setup reads
        """
        if world == "chess":
            experiments = StandardCatalog.get_chess_experiments()
            tests = StandardCatalog.get_chess_tests()
            groupings = StandardCatalog.get_chess_groupings()
        elif world == "doors":
            experiments = StandardCatalog.get_doors_experiments()
            tests = StandardCatalog.get_doors_tests()
            groupings = StandardCatalog.get_doors_groupings(num_doors)
        else:
            raise KeyError(f"no catalog for world {world!r}")
        return {
            "experiments": [e.document for e in experiments],
            "tests": [t.document for t in tests],
            "groupings": {g.name: g.document for g in groupings},
        }

    @staticmethod
    def get_setup(world: str, signature: ScalarSignature, num_doors: int = 3) -> TheorySetup:
        return load_setup(StandardCatalog.get_all_documents(world, num_doors), signature)
