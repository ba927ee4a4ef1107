"""Partially observable chess: eye movement, pick-up/put-down, the opponent and noise."""

import random
from collections import Counter
from fractions import Fraction

import chess
import pytest

from src.world_insight.world.engine import (
    initial_state,
    move_correctness,
    render_view_detail,
    true_view,
    view_outputs,
)
from src.world_insight.world.model import IncorrectMove
from src.world_insight.worlds import (
    CHESS_SIGNATURE,
    ChessConfig,
    ChessCumulativeState,
    chess_action,
    chess_opponent_move,
    chess_step,
    choose_opponent_move,
)
from src.world_insight.worlds.chess_world import (
    _HAND,
    NEWGAME,
    PICKUP,
    PUTDOWN,
    REWARDS,
    STRIDE,
    _choose,
    white_targets,
)

START = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.E2)


def board(fen: str) -> chess.Board:
    b = chess.Board(None)
    b.set_board_fen(fen)
    return b


def test_thirty_six_actions():
    assert len(CHESS_SIGNATURE.action_space) == 36
    assert chess_action(command="pickup") == (0, 0, 1)
    assert chess_action("Left", "Down", "newgame") == (1, 2, 3)


def test_world_starts_with_the_eye_on_e2(quiet_chess_world):
    cs = initial_state(quiet_chess_world)
    assert cs.standard == "e2"
    assert ChessCumulativeState.decode(cs) == START
    assert true_view(quiet_chess_world, cs) == (chess.PAWN, 2, 0)


def test_correct_moves_at_the_start(quiet_chess_world):
    correctness = move_correctness(quiet_chess_world, initial_state(quiet_chess_world))
    # nine eye moves, plus picking up the queen, king and bishop on d1, e1, f1
    # and the pawns on d2, e2 and f2
    assert sum(correctness.flags) == 15
    assert correctness.groups == ((False, False), (False, True), (False, True))


def test_pick_up_and_put_down_plays_a_move():
    held = chess_step(START, chess_action(command="pickup"))
    assert held.hand == (chess.PAWN, chess.E2)
    assert held.board().piece_at(chess.E2) is None
    assert held.restored_fen == chess.STARTING_BOARD_FEN

    assert isinstance(chess_step(held, chess_action(command="putdown")), IncorrectMove)
    assert isinstance(chess_step(held, chess_action(command="pickup")), IncorrectMove)

    after = chess_step(held, chess_action(vertical="Up", command="putdown"))
    b = after.board()
    assert after.hand is None
    assert after.eye == chess.E3
    assert b.piece_at(chess.E3) == chess.Piece(chess.PAWN, chess.WHITE)
    # Black's smallest reply by (file, rank) of origin, then target
    assert b.piece_at(chess.A5) == chess.Piece(chess.PAWN, chess.BLACK)
    assert b.piece_at(chess.A7) is None
    assert (after.ply, after.phase, after.reward) == (2, "play", 0)


def test_empty_and_black_squares_cannot_be_picked_up():
    assert isinstance(chess_step(START, chess_action(vertical="Up", command="pickup")), IncorrectMove)
    facing_black = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.E6)
    assert isinstance(chess_step(facing_black, chess_action(vertical="Up", command="pickup")), IncorrectMove)
    assert not isinstance(chess_step(START, chess_action("Left", command="pickup")), IncorrectMove)


def test_pieces_without_moves_can_be_picked_up():
    king = chess_step(START, chess_action(vertical="Down", command="pickup"))
    assert king.hand == (chess.KING, chess.E1)
    assert white_targets(chess.STARTING_BOARD_FEN, chess.E1) == frozenset()
    # with no legal target every put-down is incorrect, the origin square included
    assert isinstance(chess_step(king, chess_action(command="putdown")), IncorrectMove)
    assert isinstance(chess_step(king, chess_action(vertical="Up", command="putdown")), IncorrectMove)


def test_eye_cannot_leave_the_board():
    corner = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.A1)
    assert isinstance(chess_step(corner, chess_action("Left")), IncorrectMove)
    assert isinstance(chess_step(corner, chess_action(vertical="Down")), IncorrectMove)
    assert chess_step(corner, chess_action("Right", "Up")).eye == chess.B2


def test_greedy_opponent_takes_the_most_valuable_piece():
    position = board("k7/8/8/R2q4/8/3P3K/8/8")
    assert choose_opponent_move(position) == chess.Move(chess.D5, chess.A5)
    assert choose_opponent_move(position, "first-move") == chess.Move(chess.A8, chess.A7)
    after = chess_opponent_move(position)
    assert after.piece_at(chess.A5) == chess.Piece(chess.QUEEN, chess.BLACK)


def test_opponent_without_moves():
    assert choose_opponent_move(board("8/8/8/8/8/8/8/K7")) is None
    assert chess_opponent_move(board("8/8/8/8/8/8/8/K7")) is None


def test_pawn_on_the_last_rank_has_no_target():
    assert white_targets("P7/8/8/8/8/8/8/8", chess.A8) == frozenset()
    stuck = ChessCumulativeState("P7/8/8/8/8/8/8/8", chess.A8)
    assert chess_step(stuck, chess_action(command="pickup")).hand == (chess.PAWN, chess.A8)


def test_capturing_the_king_wins_and_allows_a_new_game():
    state = ChessCumulativeState("k7/8/8/8/8/8/8/7K", chess.A7, hand=(chess.ROOK, chess.A1))
    assert isinstance(chess_step(state, chess_action(command="newgame")), IncorrectMove)
    won = chess_step(state, chess_action(vertical="Up", command="putdown"))
    assert (won.phase, won.ply, REWARDS[won.reward]) == ("won", 1, "1")
    assert isinstance(chess_step(won, chess_action(command="pickup")), IncorrectMove)
    fresh = chess_step(won, chess_action(command="newgame"))
    assert fresh == ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.A8)


def test_move_cap_ends_in_a_draw():
    held = chess_step(START, chess_action(command="pickup"))
    drawn = chess_step(held, chess_action(vertical="Up", command="putdown"), ChessConfig(move_cap=1))
    assert (drawn.phase, drawn.ply, REWARDS[drawn.reward]) == ("drawn", 1, "0")


def test_snapshot_lines():
    assert START.to_line() == f"{chess.STARTING_BOARD_FEN} e2 - play 0 Nothing"
    held = chess_step(START, chess_action(command="pickup"))
    assert held.to_line().split()[1:3] == ["e2", "P@e2"]
    assert ChessCumulativeState.from_line(held.to_line()) == held
    with pytest.raises(ValueError):
        ChessCumulativeState.from_line("8/8/8 e2 - play")


def test_encoding_keeps_the_hand():
    held = chess_step(START, chess_action("Right", command="pickup"))
    assert held.hand == (chess.PAWN, chess.F2)
    assert ChessCumulativeState.decode(held.encode()) == held


def test_noise_on_a_white_pawn(chess_world):
    outputs = view_outputs(chess_world, initial_state(chess_world))
    assert sum(outputs.values()) == 1
    assert outputs[(chess.PAWN, 2, 0)] == Fraction(19, 20) ** 2
    assert outputs[(chess.BISHOP, 1, 0)] == Fraction(1, 20) ** 2
    assert len(outputs) == 4


def test_empty_squares_are_never_noisy(chess_world):
    cs = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.E4).encode()
    assert view_outputs(chess_world, cs) == {(0, 0, 0): 1}


def test_king_is_sometimes_read_as_a_queen(chess_world):
    cs = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.E1).encode()
    outputs = view_outputs(chess_world, cs)
    assert outputs[(chess.QUEEN, 2, 0)] == Fraction(5, 100) * Fraction(19, 20)


def test_quiet_world_sees_the_truth(quiet_chess_world):
    assert view_outputs(quiet_chess_world, initial_state(quiet_chess_world)) == {(chess.PAWN, 2, 0): 1}


@pytest.mark.parametrize(
    "kwargs",
    [{"noise_color_volume": 1.5}, {"opponent_policy": "random"}, {"move_cap": 0}, {"start_eye": "z9"}],
)
def test_invalid_chess_config(kwargs):
    with pytest.raises(ValueError):
        ChessConfig(**kwargs)


def _expected_incorrect(state: ChessCumulativeState, action) -> bool:
    """The incorrect-move rules, restated square by square."""
    file = chess.square_file(state.eye) + (0, -1, 1)[action[0]]
    rank = chess.square_rank(state.eye) + (0, 1, -1)[action[1]]
    if not (0 <= file < 8 and 0 <= rank < 8):
        return True
    eye = chess.square(file, rank)
    piece = state.board().piece_at(eye)
    if action[2] == PICKUP:
        return state.hand is not None or not state.in_play or piece is None or piece.color == chess.BLACK
    if action[2] == PUTDOWN:
        if state.hand is None or not state.in_play:
            return True
        return eye == state.hand[1] or eye not in white_targets(state.restored_fen, state.hand[1])
    if action[2] == NEWGAME:
        return state.in_play
    return False


@pytest.mark.slow
def test_random_play_follows_the_move_rules(quiet_chess_world):
    rng = random.Random(31)
    actions = CHESS_SIGNATURE.action_space
    positions = set()
    picked = 0
    for _ in range(100):
        state = START
        for _ in range(100):
            action = rng.choice(actions)
            result = chess_step(state, action)
            assert isinstance(result, IncorrectMove) == _expected_incorrect(state, action), (state.to_line(), action)
            if isinstance(result, IncorrectMove):
                continue
            if action[2] == PICKUP:
                picked += 1
                eye = result.eye
                seen = true_view(quiet_chess_world, result.encode())
                assert seen[0] == 0 and result.hand[1] == eye
                assert result.encode().assignment[eye * STRIDE + _HAND] == result.hand[0]
                assert result.restored_fen == state.board_fen
            positions.add(result.restored_fen)
            state = result
    assert picked > 0
    for fen in positions:
        first = choose_opponent_move(board(fen))
        _choose.cache_clear()
        assert choose_opponent_move(board(fen)) == first


@pytest.mark.slow
def test_color_noise_calibration(chess_world):
    rng = random.Random(17)
    pawn = initial_state(chess_world)
    draws = 100_000
    details = [render_view_detail(chess_world, pawn, rng) for _ in range(draws)]
    noised = [d.observation[1] for d in details if d.noised[1]]
    assert len(noised) / draws == pytest.approx(0.10, abs=0.01)
    assert Counter(noised)[1] / len(noised) == pytest.approx(0.5, abs=0.02)

    king = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.E1).encode()
    queen = ChessCumulativeState(chess.STARTING_BOARD_FEN, chess.D1).encode()
    kings = Counter(render_view_detail(chess_world, king, rng).observation[0] for _ in range(20_000))
    queens = Counter(render_view_detail(chess_world, queen, rng).observation[0] for _ in range(20_000))
    assert kings[chess.QUEEN] > 0
    assert queens[chess.KING] == 0
