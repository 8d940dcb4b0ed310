"""Data-driven sparse polynomial chaos expansions.

Forward-selection sparse PCE (:func:`fit_fss_pce`) and a Gram-Schmidt +
least-angle-regression comparison method (:func:`fit_benchmark_sparse_pce`),
both working under the empirical measure of the training inputs, plus the
input samplers, test models and metrics used to compare them.
"""

import logging

__version__ = "0.1.0"

# library code only logs; applications decide where warnings go
logging.getLogger(__name__).addHandler(logging.NullHandler())

from .benchmark import BenchmarkConfig, BenchmarkResult, fit_benchmark_sparse_pce
from .errors import (
    ConditioningError,
    CovarianceError,
    DependenceError,
    DomainError,
    NumericError,
    ParameterError,
    ShapeError,
)
from .experiments import ExperimentConfig, run_experiment, run_sweep
from .fss import FssConfig, FssResult, cross_validate_threshold, fit_fss_pce
from .metrics import kl_divergence_knn, relative_error, summarize_runs
from .models import MODELS, TestModel, get_model, monte_carlo_reference
from .polybasis import Dataset, OrthonormalBasis, gram_schmidt_basis, modified_gram_schmidt, total_degree_indices
from .regression import PceModel, lar_path, least_squares_fit, predict
from .serialization import load_model, dump_model

__all__ = [
    "BenchmarkConfig", "BenchmarkResult", "fit_benchmark_sparse_pce",
    "ConditioningError", "CovarianceError", "DependenceError", "DomainError", "NumericError",
    "ParameterError", "ShapeError",
    "ExperimentConfig", "run_experiment", "run_sweep",
    "FssConfig", "FssResult", "cross_validate_threshold", "fit_fss_pce",
    "kl_divergence_knn", "relative_error", "summarize_runs",
    "MODELS", "TestModel", "get_model", "monte_carlo_reference",
    "Dataset", "OrthonormalBasis", "gram_schmidt_basis", "modified_gram_schmidt", "total_degree_indices",
    "PceModel", "lar_path", "least_squares_fit", "predict",
    "load_model", "dump_model",
]
