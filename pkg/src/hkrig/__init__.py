"""Hierarchical (multi-fidelity) Kriging with parametric model selection."""

from .data import (
    Dataset,
    FidelityPair,
    Transform,
    aggregate_replicates,
    forrester_doe,
    forrester_hf,
    forrester_lf,
    load_csv,
    standardize,
    synthetic_3d_pair,
)
from .errors import KrigingError
from .gp import Estimation, KrigingModel, Prediction, fit, predict
from .hierarchical import HierarchicalModel, fit_hierarchical, fit_multilevel, predict_hierarchical
from .io import load_model, save_model
from .kernels import CorrelationSpec, Family, Structure, corr, corr1d, corr_matrix, cross_corr_vector
from .optimize import Method, OptimizerSpec, minimize
from .selection import CombinationGrid, enumerate_combinations, mae, q2, run_sweep, select_best
from .trend import TrendSpec

__version__ = "0.1.0"
