"""
Tests, statistics and theories.

Usage:
    from src.world_insight.theory import make_test, StatStore, record_observation, predict_from_experiment

    test = make_test("white", "A: ⟨*;*⟩ / ε", "color=White", world.signature)
    store = StatStore()
    record_observation(store, experiment, test, local_history)
    theory = predict_from_experiment(store.get(experiment.label, test.name))
"""

from .grouping import GroupingAutomaton, GroupRule, classify_group, load_grouping, single_group
from .predict import (
    NO_EVIDENCE,
    StabilityTracker,
    TheoryOutput,
    combine_predictions,
    predict_from_experiment,
    predict_from_stability,
)
from .state_estimate import TestStateEstimate, TestStateTheory, predict_test_state
from .stats import SINGLE_GROUP, StatRecord, StatStore, record_observation
from .tests import (
    UNIVERSAL_CONDITION,
    Test,
    TestOutcome,
    evaluate_test,
    load_tests,
    make_test,
    smallest_property,
)

__all__ = [
    'NO_EVIDENCE',
    'SINGLE_GROUP',
    'UNIVERSAL_CONDITION',
    'GroupRule',
    'GroupingAutomaton',
    'StabilityTracker',
    'StatRecord',
    'StatStore',
    'Test',
    'TestOutcome',
    'TestStateEstimate',
    'TestStateTheory',
    'TheoryOutput',
    'classify_group',
    'combine_predictions',
    'evaluate_test',
    'load_grouping',
    'load_tests',
    'make_test',
    'predict_from_experiment',
    'predict_from_stability',
    'predict_test_state',
    'record_observation',
    'single_group',
    'smallest_property',
]
