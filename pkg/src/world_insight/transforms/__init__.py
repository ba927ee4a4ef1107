"""
Transforms between world definitions and the trace-equivalence harness.

    def2_to_def1   chance hidden in generator counters (Def2 -> Def1)
    def3_to_def2   reachable cumulative states become standard states
    def2_to_def3   constants-only embedding
    def4_to_def3   noise moved into the transition
    trace_distance statistical check that two worlds look alike
"""

from .denoise import def4_to_def3
from .determinize import DeterminizedWorld, def2_to_def1
from .equivalence import TraceDistanceReport, trace_distance
from .flatten import def2_to_def3, def3_to_def2, reachable_states

__all__ = [
    "DeterminizedWorld",
    "TraceDistanceReport",
    "def2_to_def1",
    "def2_to_def3",
    "def3_to_def2",
    "def4_to_def3",
    "reachable_states",
    "trace_distance",
]
