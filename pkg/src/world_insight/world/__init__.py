"""
World core: signatures, interval distributions, world models and their execution.

Usage:
    from src.world_insight.world import load_world_spec, WorldInstance, Streams, Seeds

    world = load_world_spec("specs/three_state.yaml")
    instance = WorldInstance(world, Streams.from_seeds(Seeds(predictable=1, unpredictable=2)))
    outcomes = instance.run(horizon=10)
"""

from .distribution import (
    Q_GRID,
    IntervalDistribution,
    IntervalOutcome,
    SplitDistribution,
    ValidationReport,
    Violation,
    sample_outcome,
    select_outcome,
    validate_distribution,
)
from .engine import (
    RenderDetail,
    StepOutcome,
    WorldInstance,
    choose_correct_action,
    initial_state,
    is_correct,
    move_correctness,
    render_view,
    render_view_detail,
    step_world,
    successors,
    transition_of,
    true_view,
    view_outputs,
)
from .model import (
    CumulativeState,
    IncorrectMove,
    NoiseDescriptor,
    Variable,
    VariableLayout,
    WorldDef2,
    WorldDef3,
    WorldDef4,
    embed_def3,
)
from .signature import (
    Coordinate,
    Correctness,
    MoveGroup,
    ScalarSignature,
    StepLetter,
)
from .spec_io import check_world_spec, load_world_spec
from .streams import DriftingStream, Seeds, Streams

__all__ = [
    "Q_GRID",
    "Coordinate",
    "Correctness",
    "CumulativeState",
    "DriftingStream",
    "IncorrectMove",
    "IntervalDistribution",
    "IntervalOutcome",
    "SplitDistribution",
    "MoveGroup",
    "NoiseDescriptor",
    "RenderDetail",
    "ScalarSignature",
    "Seeds",
    "StepLetter",
    "StepOutcome",
    "Streams",
    "ValidationReport",
    "Variable",
    "VariableLayout",
    "Violation",
    "WorldDef2",
    "WorldDef3",
    "WorldDef4",
    "WorldInstance",
    "check_world_spec",
    "choose_correct_action",
    "embed_def3",
    "initial_state",
    "is_correct",
    "load_world_spec",
    "move_correctness",
    "render_view",
    "render_view_detail",
    "sample_outcome",
    "select_outcome",
    "step_world",
    "successors",
    "transition_of",
    "true_view",
    "validate_distribution",
    "view_outputs",
]
