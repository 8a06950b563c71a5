"""Desk-scale experiments on random regular graphs."""
from .census import CensusReport, classify, good_pair_census
from .config import (
    ANNEALED,
    QUENCHED,
    ExperimentConfig,
    build_config,
    load_config_file,
    with_tree_constants,
)
from .cutoff import CutoffReport, cutoff_experiment
from .density import DensityReport, density_experiment
from .intersection import IntersectionReport, intersection_experiment, pair_samples, summarize_pairs

__all__ = [
    "ANNEALED", "CensusReport", "build_config", "CutoffReport", "DensityReport", "ExperimentConfig",
    "IntersectionReport", "QUENCHED", "classify", "cutoff_experiment", "density_experiment",
    "good_pair_census", "intersection_experiment", "load_config_file", "pair_samples",
    "summarize_pairs", "with_tree_constants",
]
