"""
Bundled worlds and their standard theory setups.

Usage:
    from src.world_insight.worlds import build_chess_world, ChessConfig, StandardCatalog

    world = build_chess_world(ChessConfig(noise_color_volume=0.1))
    setup = StandardCatalog.get_setup("chess", world.signature)
"""

from typing import Any, Optional

from .catalog import CatalogEntry, StandardCatalog, TheorySetup, load_setup
from .chess_world import (
    CHESS_SIGNATURE,
    ChessConfig,
    ChessCumulativeState,
    build_chess_world,
    chess_action,
    chess_opponent_move,
    chess_step,
    choose_opponent_move,
)
from .doors_world import build_doors_world, door_locked, parse_schedule

BUILTIN_PREFIX = "builtin:"
DEFAULT_DOOR_SCHEDULES = ("L", "U", "ULLLLLL")


def is_builtin(spec: str) -> bool:
    return str(spec).startswith(BUILTIN_PREFIX)


def builtin_world(spec: str, settings: Optional[Any] = None) -> Any:
    """
    ``builtin:chess`` or ``builtin:doors`` (optionally ``builtin:doors:L,U,ULLLLLL``).

    Args:
        spec: Builtin world name
        settings: Settings carrying the chess volumes, opponent rule and move cap
    """
    name, _, arg = spec[len(BUILTIN_PREFIX):].partition(":")
    if name == "chess":
        return build_chess_world(ChessConfig.from_settings(settings) if settings is not None else ChessConfig())
    if name == "doors":
        schedules = arg.split(",") if arg else list(DEFAULT_DOOR_SCHEDULES)
        return build_doors_world(len(schedules), schedules)
    raise KeyError(f"unknown builtin world {spec!r}")


def builtin_catalog_name(spec: str) -> str:
    return spec[len(BUILTIN_PREFIX):].partition(":")[0]


__all__ = [
    "BUILTIN_PREFIX",
    "CHESS_SIGNATURE",
    "DEFAULT_DOOR_SCHEDULES",
    "CatalogEntry",
    "ChessConfig",
    "ChessCumulativeState",
    "StandardCatalog",
    "TheorySetup",
    "build_chess_world",
    "build_doors_world",
    "builtin_catalog_name",
    "builtin_world",
    "chess_action",
    "chess_opponent_move",
    "chess_step",
    "choose_opponent_move",
    "door_locked",
    "is_builtin",
    "load_setup",
    "parse_schedule",
]
