"""
Stats Module - Counting Test Results Per Experiment

When both an experiment and a test are performed at the same moment we count
the result: n for YES, m for NO. Counts are kept per (experiment, test, group),
where the group is the group of relative stability the moment fell into.

Key Concepts:
- StatRecord: the (n, m) pair, addable
- StatStore: all records of one run, mergeable and saved as YAML
- record_observation: the single counting rule everything else goes through
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Mapping, Optional

import yaml

from src.world_insight.config import parse_yaml
from src.world_insight.events.dsl import EventPattern
from src.world_insight.events.history import LocalHistory
from src.world_insight.events.matcher import event_holds
from src.world_insight.theory.tests import Test, evaluate_test

logger = logging.getLogger(__name__)

SINGLE_GROUP = "all"

StatKey = tuple[str, str, str]


@dataclass(frozen=True)
class StatRecord:
    """n YES results and m NO results."""

    n: int = 0
    m: int = 0

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise ValueError(f"counts must be non-negative, got n={self.n}, m={self.m}")

    @property
    def total(self) -> int:
        return self.n + self.m

    def __add__(self, other: "StatRecord") -> "StatRecord":
        return StatRecord(self.n + other.n, self.m + other.m)

    def counted(self, yes: bool) -> "StatRecord":
        return StatRecord(self.n + 1, self.m) if yes else StatRecord(self.n, self.m + 1)


EMPTY_RECORD = StatRecord()


class StatStore:
    """
    Statistics for one run (or a merge of many).

    Records are keyed by experiment name, test name and group. Keys are
    declared up front with ``declare`` so that a report can list pairs that
    never fired with (0, 0).
    """

    def __init__(self, meta: Optional[Mapping[str, Any]] = None):
        """
        Args:
            meta: Free-form run description (seeds, world, c0 ...) saved alongside the counts
        """
        self._records: dict[StatKey, StatRecord] = defaultdict(StatRecord)
        self.meta: dict[str, Any] = dict(meta or {})

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[tuple[StatKey, StatRecord]]:
        return iter(sorted(self._records.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StatStore):
            return NotImplemented
        return dict(self) == dict(other)

    def declare(self, experiment: str, test: str, group: str = SINGLE_GROUP) -> None:
        self._records.setdefault((experiment, test, group), EMPTY_RECORD)

    def get(self, experiment: str, test: str, group: str = SINGLE_GROUP) -> StatRecord:
        return self._records.get((experiment, test, group), EMPTY_RECORD)

    def add(self, experiment: str, test: str, yes: bool, group: str = SINGLE_GROUP) -> StatRecord:
        key = (experiment, test, group)
        self._records[key] = self._records[key].counted(yes)
        return self._records[key]

    def record(self, key: StatKey, record: StatRecord) -> None:
        self._records[key] = self._records[key] + record

    def for_test(self, test: str, group: Optional[str] = None) -> dict[str, StatRecord]:
        """experiment -> record for one test (and, optionally, one group)."""
        return {
            e: rec
            for (e, t, g), rec in self
            if t == test and (group is None or g == group)
        }

    def merge(self, other: "StatStore") -> "StatStore":
        """A new store with the counts of both; order of merging never matters."""
        merged = StatStore({**other.meta, **self.meta})
        for key, rec in self:
            merged.record(key, rec)
        for key, rec in other:
            merged.record(key, rec)
        return merged

    def stats(self) -> dict[str, Any]:
        """
        Summary numbers for logging and reports.

        Returns:
            Dictionary with record count, total counted moments and the tests seen
        """
        return {
            "records": len(self._records),
            "counted": sum(r.total for r in self._records.values()),
            "tests": sorted({t for _, t, _ in self._records}),
            "experiments": sorted({e for e, _, _ in self._records}),
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "meta": self.meta,
            "records": [
                {"experiment": e, "test": t, "group": g, "n": r.n, "m": r.m}
                for (e, t, g), r in self
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StatStore":
        store = cls(data.get("meta") or {})
        for row in data.get("records") or []:
            key = (str(row["experiment"]), str(row["test"]), str(row.get("group", SINGLE_GROUP)))
            store.record(key, StatRecord(int(row["n"]), int(row["m"])))
        return store

    def save(self, path: str | Path) -> Path:
        """
        Write the store as YAML.

        Args:
            path: Target file; parent directories are created

        Returns:
            The path written
        """
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8") as handle:
                yaml.safe_dump(self.to_dict(), handle, sort_keys=False, allow_unicode=True)
            logger.info(f"Saved {len(self)} statistics records to {target}")
            return target
        except OSError as e:
            logger.error(f"Error saving statistics to {target}: {e}")
            raise

    @classmethod
    def load(cls, path: str | Path) -> "StatStore":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = parse_yaml(handle) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Error loading statistics from {path}: {e}")
            raise
        store = cls.from_dict(data)
        logger.info(f"Loaded {len(store)} statistics records from {path}")
        return store


def record_observation(
    store: StatStore,
    experiment: EventPattern,
    test: Test,
    lh: LocalHistory,
    group: str = SINGLE_GROUP,
) -> StatStore:
    """
    Count one moment.

    Increments n or m for (experiment, test, group) exactly when the experiment
    and the test's condition both hold on ``lh``; otherwise the store is unchanged.

    Args:
        store: Store to update in place
        experiment: The experiment
        test: The test
        lh: Local history around the moment
        group: Group of relative stability the moment belongs to

    Returns:
        The same store, for chaining
    """
    if not event_holds(experiment, lh):
        return store
    outcome = evaluate_test(test, lh)
    if outcome.defined:
        store.add(experiment.label, test.name, bool(outcome.value), group)
    return store
