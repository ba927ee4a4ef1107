"""Histories, local-history windows and the history log."""

import io

import pytest

from src.world_insight.errors import LocalHistoryError, SpecParseError
from src.world_insight.events.history import History, localize, read_history_log, write_history_log
from src.world_insight.world.signature import Correctness, StepLetter


def make_history(signature, actions, faces="heads"):
    history = History(signature)
    correctness = Correctness.from_flags(signature, (True,) * len(signature.action_space))
    for i, action in enumerate(actions):
        face = faces if isinstance(faces, str) else faces[i]
        history.append(
            StepLetter(signature.parse_action_label(action), signature.parse_observation_label(face), correctness)
        )
    return history


def test_first_action_must_be_nothing(coin_signature):
    with pytest.raises(ValueError):
        make_history(coin_signature, ["flip"])


def test_step_is_one_based(coin_signature):
    history = make_history(coin_signature, ["Nothing", "flip"])
    assert history.step(2).action == (1,)
    with pytest.raises(LocalHistoryError):
        history.step(0)
    with pytest.raises(LocalHistoryError):
        history.step(3)


def test_window_clips_at_the_origin(coin_signature):
    history = make_history(coin_signature, ["Nothing", "flip", "flip", "flip"])
    lh = localize(history, 1, 5, 1)
    assert lh.past == (history.step(1),)
    assert lh.absolute_origin
    assert lh.future == (history.step(2),)


def test_window_clips_at_the_end(coin_signature):
    history = make_history(coin_signature, ["Nothing", "flip", "flip", "flip"])
    lh = localize(history, 4, 1, 10)
    assert lh.future == ()
    assert lh.past == (history.step(3), history.step(4))
    assert not lh.absolute_origin
    assert lh.present == history.step(4)


def test_window_outside_the_history(coin_signature):
    history = make_history(coin_signature, ["Nothing"])
    with pytest.raises(LocalHistoryError):
        localize(history, 2, 0, 0)
    with pytest.raises(LocalHistoryError):
        localize(history, 1, -1, 0)


def test_log_lines_are_tab_separated(coin_signature):
    history = make_history(coin_signature, ["Nothing", "flip"], ["heads", "tails"])
    out = io.StringIO()
    write_history_log(out, [history], {"world": "coin"})
    assert out.getvalue().splitlines() == [
        "# world: coin",
        "# episode 0",
        "1\tNothing\theads\t11",
        "2\tflip\ttails\t11",
    ]


def test_log_reads_back_every_episode(coin_signature):
    first = make_history(coin_signature, ["Nothing", "flip", "flip"], ["heads", "tails", "heads"])
    second = make_history(coin_signature, ["Nothing"], ["tails"])
    out = io.StringIO()
    write_history_log(out, [first, second])
    histories = read_history_log(io.StringIO(out.getvalue()), coin_signature)
    assert [h.steps for h in histories] == [first.steps, second.steps]


def test_log_without_markers_is_one_history(coin_signature):
    text = "1\tNothing\theads\t11\n2\tflip\ttails\t11\n"
    histories = read_history_log(io.StringIO(text), coin_signature)
    assert len(histories) == 1
    assert len(histories[0]) == 2


def test_out_of_sequence_step_is_a_parse_error(coin_signature):
    with pytest.raises(SpecParseError) as info:
        read_history_log(io.StringIO("1\tNothing\theads\t11\n3\tflip\ttails\t11\n"), coin_signature)
    assert info.value.location.endswith(":2")


@pytest.mark.parametrize(
    "line",
    ["1\tNothing\theads\n", "1\tjump\theads\t11\n", "1\tNothing\theads\t1x\n", "x\tNothing\theads\t11\n"],
)
def test_malformed_lines_are_parse_errors(coin_signature, line):
    with pytest.raises(SpecParseError):
        read_history_log(io.StringIO(line), coin_signature)
