"""
World Insight Package

Interval-probability world models, the transforms between their definitions,
an event language over histories, and an agent that learns theories of tests.
"""

__version__ = "1.0.0"
__author__ = "World Insight"
__license__ = "MIT"

from src.world_insight.agent import AgentLoop, simulate
from src.world_insight.main import (
    run_agent,
    run_episodes,
    run_equiv_check,
    run_report,
    run_transform,
    run_validate,
)

__all__ = [
    "AgentLoop",
    "simulate",
    "run_agent",
    "run_episodes",
    "run_equiv_check",
    "run_report",
    "run_transform",
    "run_validate",
]
