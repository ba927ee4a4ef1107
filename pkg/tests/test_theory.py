"""Counting, predictions, stability, grouping automata and test-state theories."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.world_insight.errors import SpecValidationError
from src.world_insight.events.dsl import parse_event
from src.world_insight.events.history import History, localize
from src.world_insight.theory.grouping import classify_group, load_grouping, single_group
from src.world_insight.theory.predict import (
    NO_EVIDENCE,
    StabilityTracker,
    TheoryOutput,
    combine_predictions,
    predict_from_experiment,
    predict_from_stability,
)
from src.world_insight.theory.state_estimate import TestStateTheory, predict_test_state
from src.world_insight.theory.stats import StatRecord, StatStore, record_observation
from src.world_insight.theory.tests import (
    UNIVERSAL_CONDITION,
    defined_moments,
    evaluate_test,
    load_tests,
    make_test,
    smallest_property,
)
from src.world_insight.world.signature import Correctness, StepLetter


def coin_history(signature, faces):
    """Nothing first, then one flip per further face."""
    correctness = Correctness.from_flags(signature, (True, True))
    history = History(signature)
    for i, face in enumerate(faces):
        history.append(StepLetter((0 if i == 0 else 1,), (1 if face == "heads" else 2,), correctness))
    return history


# -- counts -----------------------------------------------------------------


def test_records_count_yes_and_no():
    store = StatStore()
    store.add("always", "heads", True)
    store.add("always", "heads", True)
    store.add("always", "heads", False)
    assert store.get("always", "heads") == StatRecord(2, 1)
    assert store.get("never", "heads") == StatRecord(0, 0)
    with pytest.raises(ValueError):
        StatRecord(-1, 0)


def test_declared_keys_are_listed_with_zero_counts():
    store = StatStore()
    store.declare("always", "heads", "g1")
    assert dict(store) == {("always", "heads", "g1"): StatRecord()}
    assert store.stats()["counted"] == 0


def test_for_test_filters_by_group():
    store = StatStore()
    store.add("always", "heads", True, "g1")
    store.add("after-flip", "heads", False, "g2")
    store.add("always", "tails", True, "g1")
    assert store.for_test("heads") == {"always": StatRecord(1, 0), "after-flip": StatRecord(0, 1)}
    assert store.for_test("heads", "g2") == {"after-flip": StatRecord(0, 1)}


stores = st.lists(
    st.tuples(st.sampled_from(["e1", "e2"]), st.sampled_from(["t1", "t2"]), st.booleans()), max_size=20
).map(lambda rows: _store(rows))


def _store(rows):
    store = StatStore()
    for e, t, yes in rows:
        store.add(e, t, yes)
    return store


@given(stores, stores, stores)
def test_merge_is_associative_and_commutative(a, b, c):
    assert a.merge(b).merge(c) == a.merge(b.merge(c))
    assert a.merge(b) == b.merge(a)
    assert a.merge(StatStore()) == a


def test_store_saves_and_loads_yaml(tmp_path):
    store = StatStore({"world": "coin", "seeds": [1, 2, 3, 4]})
    store.add("always", "heads", True, "g1")
    store.add("always", "heads", False, "g1")
    store.declare("always", "heads", "g2")
    path = store.save(tmp_path / "out" / "stats.yaml")
    loaded = StatStore.load(path)
    assert loaded == store
    assert loaded.meta == store.meta


def test_record_observation_needs_experiment_and_condition(coin_signature):
    history = coin_history(coin_signature, ["heads", "heads", "tails"])
    experiment = parse_event("A: ⟨flip;*⟩ / ε", coin_signature, name="after-flip")
    test = make_test("heads", UNIVERSAL_CONDITION, "face=heads", coin_signature)
    store = StatStore()
    for q in (1, 2, 3):
        record_observation(store, experiment, test, localize(history, q, q - 1, 0))
    assert store.get("after-flip", "heads") == StatRecord(1, 1)


# -- predictions ------------------------------------------------------------


def test_experiment_prediction():
    out = predict_from_experiment(StatRecord(3, 1), c0=10)
    assert out == TheoryOutput(Fraction(3, 4), Fraction(2, 7))
    assert predict_from_experiment(StatRecord(), c0=10) == NO_EVIDENCE
    with pytest.raises(ValueError):
        predict_from_experiment(StatRecord(1, 1), c0=0)


def test_experiment_prediction_over_a_count_grid():
    counts = [0, 1, 2, 3, 7, 50, 99, 250, 499, 500]
    for n in counts:
        for m in counts:
            if not 0 < n + m <= 1000:
                continue
            out = predict_from_experiment(StatRecord(n, m))
            assert out.prediction == Fraction(n, n + m)
            scaled = predict_from_experiment(StatRecord(10 * n, 10 * m))
            assert scaled.prediction == out.prediction
            assert scaled.confidence > out.confidence


def test_stability_prediction_halves_per_half_life():
    assert predict_from_stability(True, 0, 3) == TheoryOutput(1, 1)
    out = predict_from_stability(False, 6, 3)
    assert out.prediction == 0
    assert out.confidence == pytest.approx(0.25)
    assert predict_from_stability(None, 4) == NO_EVIDENCE
    with pytest.raises(ValueError):
        predict_from_stability(True, 1, half_life=0)


def test_theory_output_stays_in_the_unit_interval():
    with pytest.raises(ValueError):
        TheoryOutput(Fraction(3, 2), 0)
    with pytest.raises(ValueError):
        TheoryOutput(0, -0.1)


def test_combine_weights_by_confidence():
    out = combine_predictions([TheoryOutput(1, Fraction(1, 2)), TheoryOutput(0, Fraction(1, 4))])
    assert out == TheoryOutput(Fraction(2, 3), Fraction(5, 8))
    assert combine_predictions([]) == NO_EVIDENCE
    assert combine_predictions([NO_EVIDENCE, NO_EVIDENCE]) == NO_EVIDENCE


def test_certain_output_wins():
    out = combine_predictions([TheoryOutput(1, Fraction(9, 10)), TheoryOutput(0, 1)])
    assert out == TheoryOutput(0, 1)


unit = st.fractions(min_value=0, max_value=1, max_denominator=50)


@given(st.lists(st.builds(TheoryOutput, unit, unit), max_size=6))
def test_combined_confidence_dominates_each_part(outputs):
    out = combine_predictions(outputs)
    assert 0 <= out.prediction <= 1
    assert all(out.confidence >= o.confidence for o in outputs)


# -- stability trackers -----------------------------------------------------


def test_tracker_counts_changes_between_performances():
    tracker = StabilityTracker()
    assert tracker.estimate_half_life(5.0) == 5.0
    for moment, value in [(2, True), (5, True), (9, False)]:
        tracker.observe(moment, value)
    assert (tracker.performed, tracker.changes, tracker.exposure, tracker.gaps) == (3, 1, 7, [3, 4])
    assert tracker.estimate_half_life() == pytest.approx(math.log(2) / -math.log(1 - 1 / 7))
    assert tracker.output(12, half_life=3).confidence == pytest.approx(0.5)
    assert StabilityTracker.from_dict(tracker.to_dict()).to_dict() == tracker.to_dict()
    with pytest.raises(ValueError):
        tracker.observe(8, True)


def test_fast_changing_property_gets_a_short_half_life():
    stable, flipping = StabilityTracker(), StabilityTracker()
    for q in range(2, 40):
        stable.observe(q, q % 19 == 0)
        flipping.observe(q, q % 2 == 0)
    assert flipping.estimate_half_life() < stable.estimate_half_life()


# -- grouping automata ------------------------------------------------------


def coin_grouping(coin_signature, **extra):
    document = {
        "states": ["up", "down"],
        "initial": "up",
        "rules": [
            {"from": "*", "on": "⟨flip;tails⟩", "to": "down"},
            {"from": "down", "on": "⟨flip;*⟩", "to": "up"},
        ],
        **extra,
    }
    return load_grouping(document, coin_signature, name="coin")


def test_first_matching_rule_decides(coin_signature):
    automaton = coin_grouping(coin_signature)
    history = coin_history(coin_signature, ["heads", "tails", "tails", "heads", "heads"])
    assert automaton.walk(history) == ["up", "down", "down", "up", "up"]
    assert classify_group(automaton, list(history)[:2]) == "down"
    assert classify_group(automaton, []) == "up"


def test_single_group_never_moves(coin_signature):
    automaton = single_group()
    assert automaton.walk(coin_history(coin_signature, ["heads", "tails"])) == ["all", "all"]


@pytest.mark.parametrize(
    "document",
    [
        {"states": ["up"], "initial": "down"},
        {"states": ["up", "up"]},
        {"states": ["up"], "rules": [{"on": "⟨flip;*⟩", "to": "sideways"}]},
        {"states": ["up"], "rules": [{"from": "down", "to": "up"}]},
        {"states": ["up"], "impossible": ["down"]},
        {"initial": "up"},
        {"states": ["up"], "rules": [{"from": "up"}]},
    ],
)
def test_invalid_groupings(coin_signature, document):
    with pytest.raises(SpecValidationError):
        load_grouping(document, coin_signature)


# -- test-state theories ----------------------------------------------------


def test_predict_test_state_combines_experiments_and_stability():
    store = StatStore()
    for yes in (True, True, True, False):
        store.add("always", "heads", yes, "up")
    tracker = StabilityTracker()
    tracker.observe(4, True)
    estimate = predict_test_state(
        "heads", ("up", "down"), store, {"up": tracker}, 7, "up", impossible={"down"}, c0=10, half_life=3
    )
    assert float(estimate["up"].prediction) == pytest.approx(10 / 11)
    assert float(estimate["up"].confidence) == pytest.approx(9 / 14)
    assert estimate["down"] == NO_EVIDENCE
    assert estimate.groups == ("up", "down")
    now = predict_test_state("heads", ("up",), store, {"up": tracker}, 4, "up")
    assert now["up"] == TheoryOutput(1, 1)


def test_untestable_groups_are_announced_once_per_test(caplog):
    store = StatStore()
    with caplog.at_level("INFO", logger="src.world_insight.theory.state_estimate"):
        for test in ("lid-open", "lid-open", "lid-shut"):
            predict_test_state(test, ("up", "down"), store, {}, 3, "up", impossible={"down"})
    announced = [r.getMessage() for r in caplog.records if "cannot be tested" in r.getMessage()]
    assert [m.split(":")[0] for m in announced] == ["Test lid-open", "Test lid-shut"]


def test_state_theory_follows_the_groups(coin_signature):
    automaton = coin_grouping(coin_signature, impossible=["down"])
    theory = TestStateTheory("heads", automaton, c0=10, half_life=3)
    assert theory.impossible == frozenset({"down"})
    for letter in coin_history(coin_signature, ["heads", "heads"]):
        theory.advance(letter)
        theory.performed(letter.observation == (1,))
    estimate = theory.estimate()
    assert (estimate.moment, estimate.current_group) == (2, "up")
    assert estimate["up"] == TheoryOutput(1, 1)
    assert estimate["down"] == NO_EVIDENCE
    theory.advance(coin_history(coin_signature, ["heads", "tails"]).step(2))
    assert theory.estimate().current_group == "down"


def test_adaptive_half_life_uses_the_tracker(coin_signature):
    theory = TestStateTheory("heads", single_group(), half_life=3, adaptive_half_life=True)
    for q, value in [(1, True), (2, False), (3, True)]:
        theory.moment = q
        theory.performed(value)
    assert theory.half_life_for("all") == pytest.approx(math.log(2) / -math.log(0.001))
    assert TestStateTheory("heads", single_group(), half_life=3).half_life_for("all") == 3


# -- tests and their properties ---------------------------------------------


def test_load_tests_defaults_to_the_universal_condition(coin_signature):
    (test,) = load_tests({"tests": [{"name": "heads", "result": "heads"}]}, coin_signature)
    assert test.describe() == {"name": "heads", "condition": "A: ⟨*;*⟩ / ε", "result": "face=heads"}


def test_defined_moments(coin_signature):
    history = coin_history(coin_signature, ["heads", "tails", "heads"])
    test = make_test("heads", "A: ⟨flip;*⟩ / ε", "face=heads", coin_signature)
    assert list(defined_moments(test, history)) == [(2, False), (3, True)]


def test_evaluate_test_reads_only_the_present_step(coin_signature):
    test = make_test("heads", "A: ⟨flip;*⟩ / ε", "face=heads", coin_signature)
    history = coin_history(coin_signature, ["heads", "tails", "heads"])
    assert not evaluate_test(test, localize(history, 1, 0, 2)).defined
    assert evaluate_test(test, localize(history, 2, 1, 1)).value is False
    assert evaluate_test(test, localize(history, 3, 2, 0)).value is True

    other = coin_history(coin_signature, ["tails", "tails", "heads"])
    assert evaluate_test(test, localize(other, 3, 2, 0)) == evaluate_test(test, localize(history, 3, 2, 0))


def test_smallest_property(coin_signature):
    history = coin_history(coin_signature, ["heads", "tails", "heads"])
    test = make_test("heads", UNIVERSAL_CONDITION, "face=heads", coin_signature)
    assert smallest_property(test, history, ["h", "t", "h"]) == {
        "h": frozenset({True}),
        "t": frozenset({False}),
    }
    assert smallest_property(test, history, ["h", "h", "h"]) == {"h": frozenset({True, False})}
    with pytest.raises(ValueError):
        smallest_property(test, history, ["h"])
