"""Building the random regular graph and the contact process in tandem."""
from .cover_tree import (
    BLUE,
    HEALTHY,
    RED,
    CoverTreeRun,
    CoverTreeState,
    PairRun,
    explore_cover_tree,
    run_cover_tree,
    run_independent_pair,
)
from .events import EventLog, read_jsonl
from .pool import HalfEdgePool
from .vanilla import ExploreState, VanillaRun, explore, run_vanilla

__all__ = [
    "BLUE", "CoverTreeRun", "CoverTreeState", "EventLog", "ExploreState", "HEALTHY",
    "HalfEdgePool", "PairRun", "RED", "VanillaRun", "explore", "explore_cover_tree",
    "read_jsonl", "run_cover_tree", "run_independent_pair", "run_vanilla",
]
