"""Shared fixtures: small hand-built worlds, the bundled spec files, chess and doors."""

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from src.world_insight.world.distribution import IntervalDistribution
from src.world_insight.world.model import WorldDef2
from src.world_insight.world.signature import Coordinate, MoveGroup, ScalarSignature
from src.world_insight.world.spec_io import load_world_spec
from src.world_insight.worlds import ChessConfig, build_chess_world, build_doors_world

settings.register_profile("fast", max_examples=25, deadline=None)
settings.register_profile(
    "ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))

SPECS = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture
def specs_dir() -> Path:
    return SPECS


@pytest.fixture
def coin_signature() -> ScalarSignature:
    return ScalarSignature(
        actions=(Coordinate("move", ("Nothing", "flip")),),
        observations=(Coordinate("face", ("Nothing", "heads", "tails")),),
        groups=(MoveGroup("flipping", (1,)),),
    )


@pytest.fixture
def coin_world(coin_signature) -> WorldDef2:
    """Two states; flipping lands on heads with probability between 0.3 and 0.7."""
    flip = IntervalDistribution.from_hundredths([("h", 30, 70), ("t", 30, 70)])
    transitions = {}
    for s in ("h", "t"):
        transitions[(s, (0,))] = IntervalDistribution.certain(s)
        transitions[(s, (1,))] = flip
    return WorldDef2(coin_signature, ("h", "t"), "h", transitions, {"h": (1,), "t": (2,)}, name="coin")


@pytest.fixture
def three_state():
    return load_world_spec(SPECS / "three_state.yaml")


@pytest.fixture
def lamp():
    return load_world_spec(SPECS / "lamp.yaml")


@pytest.fixture
def noisy_lamp():
    return load_world_spec(SPECS / "noisy_lamp.yaml")


@pytest.fixture(scope="session")
def chess_world():
    return build_chess_world(ChessConfig())


@pytest.fixture(scope="session")
def quiet_chess_world():
    return build_chess_world(
        ChessConfig(noise_color_volume=0, noise_chessman_volume=0, noise_king_volume=0)
    )


@pytest.fixture
def doors_world():
    return build_doors_world(3, ("L", "U", "ULLLLLL"))
