"""Exact and evolutionary multi-objective planning of day-ahead grid topologies."""

from .dataset import (
    GeneratorConfig,
    Instance,
    case_study_config,
    depth_histogram,
    generate_instance,
    load_instance,
    store_instance,
    validate_instance,
)
from .errors import InfeasibleError, InitializationError, OracleLimitError, ValidationError
from .objectives import ObjectiveVector, dominates, evaluate, pareto_front, rank_fronts, round_lf1

__version__ = "0.1.0"
