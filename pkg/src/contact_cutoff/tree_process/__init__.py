"""Contact process, severed process and branching random walk on ``T_d``."""
from .border import (
    PioneerReport,
    border_mask_bruteforce,
    border_points,
    cheeger_bound,
    cheeger_constant,
    count_border_points,
    pioneer_mask,
    pioneer_mask_bruteforce,
    pioneer_points,
    state_words,
)
from .coupling import BRWRun, SeveredCoupledRun, run_brw, run_brw_coupled, run_severed_coupled
from .estimators import (
    GrowthEstimate,
    SurvivalEstimate,
    TailCheck,
    estimate_growth_rate,
    estimate_survival_prob,
    fit_log_mean,
    growth_from_series,
    survival_indicators,
    tail_check,
    tree_series,
)
from .lazy_tree import FULL, SEVERED, LazyTreeState, TreeRun, run_tree, tree_grid

__all__ = [
    "BRWRun", "FULL", "GrowthEstimate", "LazyTreeState", "PioneerReport", "SEVERED",
    "SeveredCoupledRun", "SurvivalEstimate", "TailCheck", "TreeRun", "border_mask_bruteforce",
    "border_points", "cheeger_bound", "cheeger_constant", "count_border_points",
    "estimate_growth_rate", "estimate_survival_prob", "fit_log_mean", "growth_from_series",
    "pioneer_mask", "pioneer_mask_bruteforce", "pioneer_points", "run_brw", "run_brw_coupled",
    "run_severed_coupled", "run_tree", "state_words", "survival_indicators", "tail_check",
    "tree_grid", "tree_series",
]
