"""pslearn: learn the whole Pareto set of a multiobjective problem as one model."""

from .core import BoxBounds, DimensionError, OutOfBoundsError, RngStream
from .metrics import MetricContext, hv_gap, hypervolume, igd_plus, nondominated_filter
from .model import make_model, model_from_dict, sample_set
from .problems import Problem, get_problem
from .scalarize import UtopiaState, tchebycheff, update_ideal, weighted_sum
from .train import EsConfig, TrainConfig, TrainState, train

__version__ = "0.1.0"

__all__ = [
    "BoxBounds",
    "DimensionError",
    "EsConfig",
    "MetricContext",
    "OutOfBoundsError",
    "Problem",
    "RngStream",
    "TrainConfig",
    "TrainState",
    "UtopiaState",
    "get_problem",
    "hv_gap",
    "hypervolume",
    "igd_plus",
    "make_model",
    "model_from_dict",
    "nondominated_filter",
    "sample_set",
    "tchebycheff",
    "train",
    "update_ideal",
    "weighted_sum",
]
