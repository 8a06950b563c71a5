"""Contact process on finite graphs: Gillespie and graphical engines plus an
exact small-graph oracle."""
from .exact import (
    exact_distribution,
    exact_ever_hit_probability,
    exact_extinction_probability,
    exact_hit_probability,
    exact_size_distribution,
    generator_matrix,
    transient,
)
from .gillespie import (
    Event,
    HitOutcome,
    InfectionState,
    RunResult,
    gillespie_step,
    make_grid,
    ensemble_snapshots,
    run_until,
)
from .graphical import (
    GraphicalRecord,
    empty_record,
    extinction_time,
    percolate,
    percolate_mask,
    reach_matrix,
    record_from_marks,
    reverse,
    sample_graphical,
)

__all__ = [
    "Event", "GraphicalRecord", "HitOutcome", "InfectionState", "RunResult",
    "empty_record", "ensemble_snapshots", "exact_distribution", "exact_ever_hit_probability",
    "exact_extinction_probability", "exact_hit_probability", "exact_size_distribution",
    "extinction_time", "generator_matrix", "gillespie_step", "make_grid", "percolate",
    "percolate_mask", "reach_matrix", "record_from_marks", "reverse", "run_until",
    "sample_graphical", "transient",
]
