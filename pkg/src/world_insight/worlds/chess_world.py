"""
Chess World - Partially Observable Chess Against a Determined Opponent

The agent does not see the board. It has an eye on one square and sees only
what stands there: ⟨chessman, color, immediate_reward⟩. Actions are
⟨horizontal, vertical, command⟩ (3 x 3 x 4 = 36): the eye moves first,
including diagonally, then the command applies to the square it lands on.

- pick up: a white piece with at least one move leaves the board and goes to
  the hand (the invisible ``hand`` variable of its origin square)
- put down: completes a chess move from the origin to the eye square; the
  opponent answers within the same step
- New Game: only once the game is over; the eye stays where it is

As a Def3 world there are 64 standard states (the eye square). Each square
carries the three visible variables and the invisible ``hand``, ``phase`` and
``ply``; the game's phase and ply count live in the block of a1.

Rules are simplified: pieces move as in chess, but there is no check,
castling, en passant or promotion (a pawn on the last rank stays a pawn).
The game ends when a king is captured, when Black has no move, or at
``move_cap`` plies (a draw).
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import Optional

import chess

from src.world_insight.world.distribution import IntervalDistribution
from src.world_insight.world.model import (
    CumulativeState,
    IncorrectMove,
    NoiseDescriptor,
    NoiseRule,
    Variable,
    VariableLayout,
    WorldDef3,
    WorldDef4,
)
from src.world_insight.world.signature import (
    NOTHING,
    Action,
    Coordinate,
    MoveGroup,
    ScalarSignature,
)

logger = logging.getLogger(__name__)

# value index = python-chess piece type (PAWN=1 ... KING=6)
CHESSMEN = (NOTHING, "Pawn", "Knight", "Bishop", "Rook", "Queen", "King")
COLORS = (NOTHING, "Black", "White")
REWARDS = (NOTHING, "-1", "0", "1")
HORIZONTAL = (NOTHING, "Left", "Right")
VERTICAL = (NOTHING, "Up", "Down")
COMMANDS = (NOTHING, "pickup", "putdown", "newgame")
PHASES = ("play", "won", "lost", "drawn")

BLACK_INDEX, WHITE_INDEX = 1, 2
PICKUP, PUTDOWN, NEWGAME = 1, 2, 3
REWARD_BY_PHASE = {"won": REWARDS.index("1"), "lost": REWARDS.index("-1"), "drawn": REWARDS.index("0")}

PIECE_VALUES = {
    chess.PAWN: 1,
    chess.KNIGHT: 3,
    chess.BISHOP: 3,
    chess.ROOK: 5,
    chess.QUEEN: 9,
    chess.KING: 100,
}
OPPONENT_POLICIES = ("greedy-capture", "first-move")

CHESS_SIGNATURE = ScalarSignature(
    actions=(
        Coordinate("horizontal", HORIZONTAL),
        Coordinate("vertical", VERTICAL),
        Coordinate("command", COMMANDS),
    ),
    observations=(
        Coordinate("chessman", CHESSMEN),
        Coordinate("color", COLORS),
        Coordinate("reward", REWARDS),
    ),
    groups=(
        MoveGroup("pickup", (None, None, PICKUP)),
        MoveGroup("putdown", (None, None, PUTDOWN)),
        MoveGroup("newgame", (None, None, NEWGAME)),
    ),
)

# block layout per square: chessman, color, reward, hand, phase, ply
STRIDE = 6
_CHESSMAN, _COLOR, _REWARD, _HAND, _PHASE, _PLY = range(STRIDE)


@dataclass(frozen=True)
class ChessConfig:
    opponent_policy: str = "greedy-capture"
    noise_color_volume: float = 0.10
    noise_chessman_volume: float = 0.10
    noise_king_volume: float = 0.05
    move_cap: int = 200
    start_board: str = chess.STARTING_BOARD_FEN
    start_eye: str = "e2"

    def __post_init__(self) -> None:
        for name in ("noise_color_volume", "noise_chessman_volume", "noise_king_volume"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.opponent_policy not in OPPONENT_POLICIES:
            raise ValueError(f"opponent_policy must be one of {OPPONENT_POLICIES}, got {self.opponent_policy!r}")
        if self.move_cap < 1:
            raise ValueError(f"move_cap must be at least 1, got {self.move_cap}")
        if self.start_eye not in chess.SQUARE_NAMES:
            raise ValueError(f"unknown square {self.start_eye!r}")

    @classmethod
    def from_settings(cls, settings) -> "ChessConfig":
        return cls(
            opponent_policy=settings.opponent_policy,
            noise_color_volume=settings.noise_color_volume,
            noise_chessman_volume=settings.noise_chessman_volume,
            noise_king_volume=settings.noise_king_volume,
            move_cap=settings.move_cap,
        )

    def to_dict(self) -> dict:
        return {
            "opponent_policy": self.opponent_policy,
            "noise_color_volume": self.noise_color_volume,
            "noise_chessman_volume": self.noise_chessman_volume,
            "noise_king_volume": self.noise_king_volume,
            "move_cap": self.move_cap,
        }


@dataclass(frozen=True)
class ChessCumulativeState:
    """
    The whole hidden configuration: board, eye square, hand, game phase.

    ``hand`` is (piece type, origin square) or None; while a piece is held its
    origin square is empty on ``board_fen``.
    """

    board_fen: str
    eye: chess.Square
    hand: Optional[tuple[chess.PieceType, chess.Square]] = None
    phase: str = "play"
    ply: int = 0
    reward: int = 0

    def __post_init__(self) -> None:
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")

    def board(self) -> chess.Board:
        board = chess.Board(None)
        board.set_board_fen(self.board_fen)
        return board

    @cached_property
    def restored_fen(self) -> str:
        """Board with the held piece back on its origin square."""
        if self.hand is None:
            return self.board_fen
        board = self.board()
        piece_type, origin = self.hand
        board.set_piece_at(origin, chess.Piece(piece_type, chess.WHITE))
        return board.board_fen()

    @property
    def in_play(self) -> bool:
        return self.phase == "play"

    def to_line(self) -> str:
        """FEN-like snapshot: ``<board> <eye> <hand> <phase> <ply> <reward>``."""
        hand = "-"
        if self.hand is not None:
            hand = f"{chess.piece_symbol(self.hand[0]).upper()}@{chess.square_name(self.hand[1])}"
        return f"{self.board_fen} {chess.square_name(self.eye)} {hand} {self.phase} {self.ply} {REWARDS[self.reward]}"

    @classmethod
    def from_line(cls, line: str) -> "ChessCumulativeState":
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"expected 6 fields in a board snapshot, got {len(parts)}")
        board_fen, eye, hand, phase, ply, reward = parts
        held = None
        if hand != "-":
            symbol, origin = hand.split("@")
            held = (chess.Piece.from_symbol(symbol).piece_type, chess.parse_square(origin))
        chess.Board(None).set_board_fen(board_fen)  # raises ValueError on a bad board
        return cls(board_fen, chess.parse_square(eye), held, phase, int(ply), REWARDS.index(reward))

    def encode(self) -> CumulativeState:
        board = self.board()
        values = []
        for square in chess.SQUARES:
            piece = board.piece_at(square)
            values.extend(
                (
                    piece.piece_type if piece else 0,
                    (WHITE_INDEX if piece.color else BLACK_INDEX) if piece else 0,
                    self.reward if square == self.eye else 0,
                    self.hand[0] if self.hand is not None and self.hand[1] == square else 0,
                    PHASES.index(self.phase) if square == chess.A1 else 0,
                    self.ply if square == chess.A1 else 0,
                )
            )
        return CumulativeState(chess.SQUARE_NAMES[self.eye], tuple(values))

    @classmethod
    def decode(cls, cs: CumulativeState) -> "ChessCumulativeState":
        return _decode(cs)


@lru_cache(maxsize=65_536)
def _decode(cs: CumulativeState) -> ChessCumulativeState:
    values = cs.assignment
    board = chess.Board(None)
    hand = None
    for square in chess.SQUARES:
        base = square * STRIDE
        if values[base + _CHESSMAN]:
            color = values[base + _COLOR] == WHITE_INDEX
            board.set_piece_at(square, chess.Piece(values[base + _CHESSMAN], color))
        if values[base + _HAND]:
            hand = (values[base + _HAND], square)
    eye = chess.parse_square(cs.standard)
    return ChessCumulativeState(
        board.board_fen(),
        eye,
        hand,
        PHASES[values[chess.A1 * STRIDE + _PHASE]],
        values[chess.A1 * STRIDE + _PLY],
        values[eye * STRIDE + _REWARD],
    )


def chess_layout(cfg: ChessConfig) -> VariableLayout:
    return VariableLayout(
        states=tuple(chess.SQUARE_NAMES),
        visible=CHESS_SIGNATURE.observations,
        invisible=(
            Variable("hand", CHESSMEN),
            Variable("phase", PHASES),
            Variable("ply", tuple(str(i) for i in range(cfg.move_cap + 1))),
        ),
    )


@lru_cache(maxsize=200_000)
def white_targets(board_fen: str, origin: chess.Square) -> frozenset[chess.Square]:
    """Squares the white piece on ``origin`` can move to."""
    board = chess.Board(None)
    board.set_board_fen(board_fen)
    piece = board.piece_at(origin)
    if piece is not None and piece.piece_type == chess.PAWN and chess.square_rank(origin) == 7:
        # unpromoted pawn on the last rank: stuck
        return frozenset()
    board.turn = chess.WHITE
    return frozenset(m.to_square for m in board.generate_pseudo_legal_moves(from_mask=chess.BB_SQUARES[origin]))


def _move_key(move: chess.Move) -> tuple[int, int, int, int]:
    return (
        chess.square_file(move.from_square),
        chess.square_rank(move.from_square),
        chess.square_file(move.to_square),
        chess.square_rank(move.to_square),
    )


def _black_moves(board: chess.Board) -> list[chess.Move]:
    board = board.copy(stack=False)
    board.turn = chess.BLACK
    unique = {(m.from_square, m.to_square) for m in board.generate_pseudo_legal_moves()}
    return [chess.Move(f, t) for f, t in unique]


@lru_cache(maxsize=100_000)
def _choose(board_fen: str, policy: str) -> Optional[chess.Move]:
    board = chess.Board(None)
    board.set_board_fen(board_fen)
    moves = _black_moves(board)
    if not moves:
        return None
    if policy == "greedy-capture":
        captures = [
            m for m in moves if (p := board.piece_at(m.to_square)) is not None and p.color == chess.WHITE
        ]
        if captures:
            return min(captures, key=lambda m: (-PIECE_VALUES[board.piece_type_at(m.to_square)], _move_key(m)))
    return min(moves, key=_move_key)


def choose_opponent_move(board: chess.Board, policy: str = "greedy-capture") -> Optional[chess.Move]:
    """
    Black's reply: the capture of the most valuable white piece if there is one,
    otherwise the smallest move; ties by (file, rank) of origin then target.
    The same position always gets the same move. None when Black cannot move.
    """
    return _choose(board.board_fen(), policy)


def _apply(board: chess.Board, move: chess.Move) -> Optional[chess.Piece]:
    """Plays ``move`` in place without promotion; returns the captured piece."""
    piece = board.remove_piece_at(move.from_square)
    captured = board.piece_at(move.to_square)
    board.set_piece_at(move.to_square, piece)
    return captured


def chess_opponent_move(board: chess.Board, policy: str = "greedy-capture") -> Optional[chess.Board]:
    """The board after Black's reply, or None when Black has no move (the game ends)."""
    move = choose_opponent_move(board, policy)
    if move is None:
        return None
    after = board.copy(stack=False)
    _apply(after, move)
    return after


def _moved_eye(eye: chess.Square, action: Action) -> Optional[chess.Square]:
    file = chess.square_file(eye) + (0, -1, 1)[action[0]]
    rank = chess.square_rank(eye) + (0, 1, -1)[action[1]]
    if not (0 <= file < 8 and 0 <= rank < 8):
        return None
    return chess.square(file, rank)


def _can_pick_up(state: ChessCumulativeState, square: chess.Square) -> bool:
    if state.hand is not None or not state.in_play:
        return False
    board = state.board()
    piece = board.piece_at(square)
    # any own piece, even one with no legal move
    return piece is not None and piece.color == chess.WHITE


def chess_is_correct(state: ChessCumulativeState, action: Action) -> bool:
    """Correctness without playing the move (no opponent reply is computed)."""
    eye = _moved_eye(state.eye, action)
    if eye is None:
        return False
    command = action[2]
    if command == 0:
        return True
    if command == NEWGAME:
        return not state.in_play
    if command == PICKUP:
        return _can_pick_up(state, eye)
    return (
        state.in_play
        and state.hand is not None
        and eye != state.hand[1]
        and eye in white_targets(state.restored_fen, state.hand[1])
    )


def _new_game(cfg: ChessConfig, eye: chess.Square) -> ChessCumulativeState:
    return ChessCumulativeState(cfg.start_board, eye)


def chess_step(
    state: ChessCumulativeState, action: Action, cfg: ChessConfig = ChessConfig()
) -> ChessCumulativeState | IncorrectMove:
    """One step of the chess world; IncorrectMove leaves ``state`` untouched."""
    if not chess_is_correct(state, action):
        return IncorrectMove(state, action)
    eye = _moved_eye(state.eye, action)
    assert eye is not None
    command = action[2]
    if command == 0:
        return replace(state, eye=eye, reward=0)
    if command == NEWGAME:
        return _new_game(cfg, eye)
    if command == PICKUP:
        board = state.board()
        piece = board.remove_piece_at(eye)
        assert piece is not None
        return replace(state, board_fen=board.board_fen(), eye=eye, hand=(piece.piece_type, eye), reward=0)

    assert state.hand is not None
    board = state.board()
    board.set_piece_at(state.hand[1], chess.Piece(state.hand[0], chess.WHITE))
    captured = _apply(board, chess.Move(state.hand[1], eye))
    ply = state.ply + 1
    phase = "play"
    if captured is not None and captured.piece_type == chess.KING:
        phase = "won"
    elif ply >= cfg.move_cap:
        phase = "drawn"
    else:
        move = choose_opponent_move(board, cfg.opponent_policy)
        if move is None:
            phase = "drawn"
        else:
            taken = _apply(board, move)
            ply += 1
            if taken is not None and taken.piece_type == chess.KING:
                phase = "lost"
            elif ply >= cfg.move_cap:
                phase = "drawn"
    if phase != "play":
        logger.debug(f"Game over after {ply} plies: {phase}")
    return ChessCumulativeState(
        board.board_fen(), eye, None, phase, min(ply, cfg.move_cap), REWARD_BY_PHASE.get(phase, 0)
    )


def chess_noise(cfg: ChessConfig) -> NoiseRule:
    """
    Color noise on occupied squares (Black 1/2, White 1/2), chessman noise on
    Pawn and Bishop squares (Pawn 1/2, Bishop 1/2), King read as Queen. Empty
    squares and the reward are never noisy.
    """
    silent = [NoiseDescriptor.silent(c.cardinality) for c in CHESS_SIGNATURE.observations]
    pawn_bishop = NoiseDescriptor.over(
        cfg.noise_chessman_volume, len(CHESSMEN), {chess.PAWN: "1/2", chess.BISHOP: "1/2"}
    )
    king = NoiseDescriptor.over(cfg.noise_king_volume, len(CHESSMEN), {chess.QUEEN: 1})
    color = NoiseDescriptor.over(cfg.noise_color_volume, len(COLORS), {BLACK_INDEX: "1/2", WHITE_INDEX: "1/2"})
    positions = {name: i for i, name in enumerate(chess.SQUARE_NAMES)}

    def noise(cs: CumulativeState, state: str, j: int) -> NoiseDescriptor:
        chessman = cs.assignment[positions[state] * STRIDE + _CHESSMAN]
        if j == 0:
            if chessman in (chess.PAWN, chess.BISHOP):
                return pawn_bishop
            return king if chessman == chess.KING else silent[0]
        if j == 1:
            return color if chessman else silent[1]
        return silent[2]

    return noise


@dataclass(frozen=True)
class _ChessRules:
    cfg: ChessConfig

    def transition(self, cs: CumulativeState, action: Action) -> Optional[IntervalDistribution]:
        result = chess_step(_decode(cs), action, self.cfg)
        if isinstance(result, IncorrectMove):
            return None
        return IntervalDistribution.certain(result.encode())

    def correct(self, cs: CumulativeState, action: Action) -> bool:
        return chess_is_correct(_decode(cs), action)


def build_chess_world(cfg: ChessConfig = ChessConfig()) -> WorldDef4:
    """
    The chess world with its three noise overlays.

    Args:
        cfg: Opponent rule, noise volumes, move cap and starting position

    Returns:
        A WorldDef4 over CHESS_SIGNATURE with 64 standard states
    """
    rules = _ChessRules(cfg)
    start = ChessCumulativeState(cfg.start_board, chess.parse_square(cfg.start_eye))
    base = WorldDef3(
        CHESS_SIGNATURE,
        chess_layout(cfg),
        start.encode(),
        rules.transition,
        rules.correct,
        name="chess",
    )
    logger.info(
        f"Built chess world: {len(CHESS_SIGNATURE.action_space)} actions, "
        f"{len(base.states)} standard states, opponent {cfg.opponent_policy}"
    )
    return WorldDef4(base, chess_noise(cfg), name="chess")


def chess_action(horizontal: str = NOTHING, vertical: str = NOTHING, command: str = NOTHING) -> Action:
    """Action vector from value names, e.g. chess_action(command="pickup")."""
    return CHESS_SIGNATURE.parse_action_label(f"{horizontal},{vertical},{command}")
