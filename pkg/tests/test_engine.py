"""Executing worlds: stepping, correctness, noisy views and determinism."""

import random
from fractions import Fraction

import pytest

from src.world_insight.errors import MalformedActionError
from src.world_insight.world.engine import (
    WorldInstance,
    choose_correct_action,
    is_correct,
    move_correctness,
    render_view,
    step_world,
    true_view,
    view_outputs,
)
from src.world_insight.world.model import IncorrectMove
from src.world_insight.world.signature import Correctness
from src.world_insight.world.streams import Seeds, Streams


def test_run_starts_with_the_nothing_action(coin_world):
    outcomes = WorldInstance(coin_world, Streams.from_seeds(Seeds(1, 2, 3, 4))).run(0)
    assert len(outcomes) == 1
    assert outcomes[0].letter.action == coin_world.signature.nothing_action
    assert outcomes[0].letter.observation == (1,)


def test_equal_seeds_give_equal_runs(three_state):
    seeds = Seeds(7, 8, 9, 10)
    a = WorldInstance(three_state, Streams.from_seeds(seeds)).run(50)
    b = WorldInstance(three_state, Streams.from_seeds(seeds)).run(50)
    assert [o.letter for o in a] == [o.letter for o in b]


def test_policy_only_plays_correct_moves(three_state):
    outcomes = WorldInstance(three_state, Streams.from_seeds(Seeds(1, 1, 1, 1))).run(200)
    for before, after in zip(outcomes, outcomes[1:]):
        assert not after.incorrect
        position = three_state.signature.action_position[after.letter.action]
        assert before.letter.correctness.flags[position]


def test_incorrect_move_leaves_the_state(three_state):
    streams = Streams.from_seeds(Seeds())
    # s2 has no "stay" transition
    assert step_world(three_state, "s2", (2,), streams) == IncorrectMove("s2", (2,))
    assert not is_correct(three_state, "s2", (2,))


def test_action_outside_the_signature_raises(three_state):
    with pytest.raises(MalformedActionError):
        step_world(three_state, "s0", (5,), Streams.from_seeds(Seeds()))


def test_correctness_vector_carries_group_summaries(three_state):
    correctness = move_correctness(three_state, "s2")
    assert correctness.flags == (False, True, False)
    assert correctness.groups == ((True, False),)
    assert correctness.is_consistent(three_state.signature)


def test_no_correct_move_falls_back_to_nothing(three_state):
    sig = three_state.signature
    none = Correctness.from_flags(sig, (False,) * len(sig.action_space))
    assert choose_correct_action(none, sig, random.Random(0)) == sig.nothing_action


def test_noise_free_worlds_show_the_truth(lamp):
    assert view_outputs(lamp, lamp.initial) == {true_view(lamp, lamp.initial): Fraction(1)}
    assert render_view(lamp, lamp.initial, random.Random(0)) == true_view(lamp, lamp.initial)


def test_noisy_view_distribution(noisy_lamp):
    outputs = view_outputs(noisy_lamp, noisy_lamp.initial)
    on, off = (1,), (2,)
    assert sum(outputs.values()) == 1
    # light is off in the room; 20% noise split evenly between on and off
    assert outputs == {on: Fraction(1, 10), off: Fraction(9, 10)}


def test_noisy_rendering_frequency(noisy_lamp):
    rng = random.Random(3)
    draws = 10_000
    on = sum(render_view(noisy_lamp, noisy_lamp.initial, rng) == (1,) for _ in range(draws))
    assert abs(on / draws - 0.1) < 0.02


def test_clone_runs_independently(three_state):
    instance = WorldInstance(three_state, Streams.from_seeds(Seeds(1, 2, 3, 4)))
    instance.run(5)
    copy = instance.clone()
    assert copy.state == instance.state
    copy.step((1,))
    assert instance.steps == 6
    assert copy.steps == 7


def test_drifting_mode_stays_reproducible(coin_world):
    seeds = Seeds(1, 2, 3, 4)
    a = WorldInstance(coin_world, Streams.from_seeds(seeds, "drifting")).run(100)
    b = WorldInstance(coin_world, Streams.from_seeds(seeds, "drifting")).run(100)
    assert [o.state for o in a] == [o.state for o in b]
