"""Grid-based SEIR epidemic simulation with small-world scale-up.

The toolkit runs spatial SEIR epidemics over grid-discretized trajectory
populations, measures the crowd-flow index (IDI) that drives contact
rates, and computes the time and number scaling factors that map a
subsampled ("small world") simulation onto the full population, with a
brute-force full-population oracle to validate those scaling laws.
"""

__version__ = "0.1.0"

from .config import ExperimentConfig
from .metrics import IdiReport, TimeWindow, compute_idi, visited_cells_count
from .policy import (
    Curfew,
    Lockdown,
    MobilityCap,
    PolicyComparison,
    StayHome,
    apply_policy,
    compare_policies,
)
from .scaling import (
    CalibrationFit,
    NumberScaling,
    TimeScaling,
    calibrate_k,
    compound_limit,
    contact_ratio,
    map_to_real,
    measure_time_to_threshold,
    number_scaling_factor,
    policy_factor_ratio,
    time_scaling_ratio,
)
from .seir import (
    CompartmentState,
    ContactModel,
    EpidemicSeries,
    MarkovTransition,
    SeirParams,
    build_markov,
    integrate_seir,
    simulate_agents,
    step_markov,
)
from .world import (
    GridSpec,
    MobilityParams,
    TimeFrameSpec,
    Trajectory,
    WorldModel,
    discretize,
    generate_synthetic_world,
    sample_small_world,
)

__all__ = [
    "__version__",
    "ExperimentConfig",
    "IdiReport",
    "TimeWindow",
    "compute_idi",
    "visited_cells_count",
    "Curfew",
    "Lockdown",
    "MobilityCap",
    "StayHome",
    "PolicyComparison",
    "apply_policy",
    "compare_policies",
    "CalibrationFit",
    "NumberScaling",
    "TimeScaling",
    "calibrate_k",
    "compound_limit",
    "contact_ratio",
    "map_to_real",
    "measure_time_to_threshold",
    "number_scaling_factor",
    "policy_factor_ratio",
    "time_scaling_ratio",
    "CompartmentState",
    "ContactModel",
    "EpidemicSeries",
    "MarkovTransition",
    "SeirParams",
    "build_markov",
    "integrate_seir",
    "simulate_agents",
    "step_markov",
    "GridSpec",
    "MobilityParams",
    "TimeFrameSpec",
    "Trajectory",
    "WorldModel",
    "discretize",
    "generate_synthetic_world",
    "sample_small_world",
]
