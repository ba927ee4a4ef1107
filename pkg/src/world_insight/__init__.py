"""
world_insight - worlds with interval probabilities and the theories an agent learns in them.

Subpackages:
- world: signatures, interval distributions, Def2/Def3/Def4 models, execution, spec files
- transforms: Def2 -> Def1, Def3 -> Def2, Def4 -> Def3 and the trace-distance check
- events: histories, the event language and its matcher
- theory: tests, statistics, predictions and grouping automata
- worlds: the chess and doors worlds and their standard theory setups
"""

from .agent import AgentLoop, TheoryReport, build_report, simulate
from .config import Settings, load_settings

__all__ = ["AgentLoop", "Settings", "TheoryReport", "build_report", "load_settings", "simulate"]
