"""
Agent loop: act, observe, match experiments, count test results, track
stability and groups, then report theories.

The loop runs live (a seeded world, uniform choice among correct moves) or
replays recorded histories; both feed the same per-history processing, so a
replayed log gives exactly the statistics of the live run that wrote it.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import yaml

from src.world_insight.config import Settings
from src.world_insight.events.history import History
from src.world_insight.events.matcher import EventTracker
from src.world_insight.theory.predict import StabilityTracker, predict_from_experiment
from src.world_insight.theory.state_estimate import TestStateTheory, predict_test_state
from src.world_insight.theory.stats import StatStore
from src.world_insight.world.engine import WorldInstance
from src.world_insight.world.signature import StepLetter
from src.world_insight.world.streams import Seeds, Streams
from src.world_insight.worlds.catalog import TheorySetup

logger = logging.getLogger(__name__)

# the opening all-Nothing step is observed but not counted: statistics start
# with the first action the agent chose
FIRST_COUNTED_MOMENT = 2


def episode_streams(base: Streams, episode: int, episodes: int) -> Streams:
    return base if episodes == 1 else base.derive(f"episode-{episode}")


def simulate(world: Any, seeds: Seeds, episodes: int, horizon: int, mode: str = "uniform") -> list[History]:
    """
    Run ``episodes`` seeded episodes of ``horizon`` policy steps each.

    Every history starts with the all-Nothing step, so it holds horizon + 1 letters.
    """
    base = Streams.from_seeds(seeds, mode)
    histories = []
    for e in range(episodes):
        instance = WorldInstance(world, episode_streams(base, e, episodes))
        history = History(world.signature)
        for outcome in instance.run(horizon):
            history.append(outcome.letter)
        histories.append(history)
    return histories


@dataclass
class TheoryReport:
    """Per experiment, test and group counts and theories, plus the config that produced them."""

    meta: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    test_states: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"meta": self.meta, "records": self.records, "test_states": self.test_states}

    def row(self, experiment: str, test: str, group: str) -> dict[str, Any]:
        for r in self.records:
            if (r["experiment"], r["test"], r["group"]) == (experiment, test, group):
                return r
        raise KeyError((experiment, test, group))

    def state(self, test: str, group: str) -> dict[str, Any]:
        for r in self.test_states:
            if (r["test"], r["group"]) == (test, group):
                return r
        raise KeyError((test, group))

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True)

    def write(self, path: str | Path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.dump(), encoding="utf-8")
        logger.info(f"Theory report written to {target}")
        return target


def build_report(
    store: StatStore,
    c0: float,
    half_life: float,
    adaptive_half_life: bool = False,
    digits: int = 6,
) -> TheoryReport:
    """
    Render a report from a statistics store.

    The store's meta must carry ``groups`` (test -> group names), and may carry
    ``trackers`` (test -> group -> tracker dict), ``moment``, ``impossible`` and
    ``active`` (experiments holding at ``moment``). Without ``active`` the test
    states draw on every recorded experiment.
    """
    meta = dict(store.meta)
    groups: dict[str, list[str]] = meta.get("groups", {})
    moment = int(meta.get("moment", 0))
    active = meta.get("active")
    report = TheoryReport(
        {
            **{k: v for k, v in meta.items() if k not in ("groups", "trackers", "impossible")},
            "c0": c0,
            "half_life": half_life,
            "adaptive_half_life": adaptive_half_life,
        }
    )
    for (experiment, test, group), rec in store:
        out = predict_from_experiment(rec, c0)
        report.records.append(
            {"experiment": experiment, "test": test, "group": group, "n": rec.n, "m": rec.m, **out.to_dict(digits)}
        )
    for test, names in groups.items():
        trackers = {
            g: StabilityTracker.from_dict(d) for g, d in (meta.get("trackers", {}).get(test) or {}).items()
        }
        impossible = (meta.get("impossible") or {}).get(test) or []
        for g in names:
            tracker = trackers.get(g, StabilityTracker())
            hl = tracker.estimate_half_life(half_life) if adaptive_half_life else half_life
            estimate = predict_test_state(
                test, (g,), store, trackers, moment, g,
                experiments=active, impossible=impossible, c0=c0, half_life=hl,
            )
            report.test_states.append(
                {"test": test, "group": g, **estimate[g].to_dict(digits), "stability": tracker.to_dict()}
            )
    return report


class AgentLoop:
    """
    Statistics-collecting agent.

    One TestStateTheory per test keeps the group, the counts and the stability
    trackers; experiments and test conditions run as online EventTrackers, and
    a moment is counted once every future step its events can look at is known.
    """

    def __init__(self, world: Any, setup: TheorySetup, settings: Settings = Settings()):
        """
        Args:
            world: Any executable world
            setup: Experiments, tests and grouping automata
            settings: c0, half-life and stream mode
        """
        logger.info("=" * 80)
        logger.info(f"Initializing AgentLoop on {getattr(world, 'name', type(world).__name__)}")
        logger.info("=" * 80)
        self.world = world
        self.setup = setup
        self.settings = settings
        for e in setup.experiments:
            e.signature.require_same(world.signature, "experiment and world")
        for t in setup.tests:
            t.condition.signature.require_same(world.signature, "test and world")
        self.lookahead = max(
            [e.lookahead for e in setup.experiments] + [t.lookahead for t in setup.tests] + [0]
        )
        logger.info(
            f"{len(setup.experiments)} experiment(s), {len(setup.tests)} test(s), lookahead {self.lookahead}"
        )

    def _new_store(self) -> StatStore:
        store = StatStore()
        for test in self.setup.tests:
            for group in self.setup.grouping_for(test.name).states:
                for experiment in self.setup.experiments:
                    store.declare(experiment.label, test.name, group)
        return store

    def _theories(self, store: StatStore) -> dict[str, TestStateTheory]:
        return {
            t.name: TestStateTheory(
                t.name,
                self.setup.grouping_for(t.name),
                store=store,
                c0=self.settings.c0,
                half_life=self.settings.half_life,
                adaptive_half_life=self.settings.adaptive_half_life,
            )
            for t in self.setup.tests
        }

    def process_history(self, letters: Sequence[StepLetter], store: Optional[StatStore] = None) -> tuple[StatStore, dict[str, TestStateTheory]]:
        """
        Count one history; returns its store and the theories as they stand after the last step.

        The store's meta records under ``active`` the experiments holding at the last moment.
        """
        store = store if store is not None else self._new_store()
        theories = self._theories(store)
        experiments = [EventTracker(e) for e in self.setup.experiments]
        conditions = {t.name: EventTracker(t.condition) for t in self.setup.tests}
        groups: dict[str, list[str]] = {t.name: [] for t in self.setup.tests}
        last_active: list[str] = []
        done = 0

        def finalize(q: int) -> None:
            if q < FIRST_COUNTED_MOMENT:
                return
            future = letters[q : q + self.lookahead]
            active = [tr.event.label for tr in experiments if tr.holds_at(q, future)]
            last_active[:] = active
            for test in self.setup.tests:
                if not conditions[test.name].holds_at(q, future):
                    continue
                value = test.result.evaluate(letters[q - 1])
                group = groups[test.name][q - 1]
                theories[test.name].performed(value, moment=q, group=group)
                for label in active:
                    store.add(label, test.name, value, group)

        for t, letter in enumerate(letters, start=1):
            for tracker in experiments:
                tracker.advance(letter)
            for tracker in conditions.values():
                tracker.advance(letter)
            for name, theory in theories.items():
                groups[name].append(theory.advance(letter))
            while done + 1 + self.lookahead <= t:
                done += 1
                finalize(done)
        while done < len(letters):
            done += 1
            finalize(done)
        store.meta["active"] = last_active
        return store, theories

    def run(self, histories: Iterable[History], meta: Optional[dict[str, Any]] = None) -> tuple[StatStore, TheoryReport]:
        """
        Process histories in order and merge their counts.

        Returns:
            Merged store (meta carries groups, last trackers and moment) and its report
        """
        start = time.time()
        merged = self._new_store()
        theories: dict[str, TestStateTheory] = {}
        active: list[str] = []
        count = steps = 0
        for history in histories:
            store, theories = self.process_history(list(history))
            active = store.meta.get("active", [])
            merged = merged.merge(store)
            count += 1
            steps += len(history)
        merged.meta = {
            **(meta or {}),
            "world": getattr(self.world, "name", type(self.world).__name__),
            "episodes": count,
            "steps": steps,
            "moment": max((th.moment for th in theories.values()), default=0),
            "active": active,
            "groups": {t.name: list(self.setup.grouping_for(t.name).states) for t in self.setup.tests},
            "trackers": {
                name: {g: tr.to_dict() for g, tr in th.trackers.items()} for name, th in theories.items()
            },
            "impossible": {
                t.name: sorted(self.setup.grouping_for(t.name).impossible) for t in self.setup.tests
            },
        }
        report = build_report(merged, self.settings.c0, self.settings.half_life, self.settings.adaptive_half_life)
        duration = time.time() - start
        logger.info(f"✅ Agent processed {count} episode(s), {steps} step(s) in {duration:.2f}s")
        logger.info(f"Statistics: {merged.stats()['counted']} counted results in {len(merged)} records")
        return merged, report

    def run_live(self, seeds: Seeds, episodes: int, horizon: int, meta: Optional[dict[str, Any]] = None) -> tuple[StatStore, TheoryReport, list[History]]:
        histories = simulate(self.world, seeds, episodes, horizon, self.settings.unpredictable_mode)
        store, report = self.run(histories, {"mode": "live", "seeds": seeds.to_dict(), "horizon": horizon, **(meta or {})})
        return store, report, histories

    def run_replay(self, histories: Sequence[History], meta: Optional[dict[str, Any]] = None) -> tuple[StatStore, TheoryReport]:
        logger.info(f"Replaying {len(histories)} recorded episode(s)")
        return self.run(histories, {"mode": "replay", **(meta or {})})
