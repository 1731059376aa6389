"""SLOPE regression with Benjamini-Hochberg tuning and FDR simulation tools."""
from .datagen import GeneratorSpec, amplitude_strong, amplitude_weak, generate
from .diagnostics import (
    gamma_decomposition,
    hr_gamma_membership,
    hr_membership,
    q_events,
    resolvent_set,
    score_vector,
    t_vector,
    verify_theorems,
)
from .experiments import (
    ExperimentConfig,
    bh_orthogonal,
    fdr_decomposition,
    run_grid,
    selection_metrics,
)
from .seqgen import LambdaSequence, lambda_bh, lambda_constant, lambda_heuristic, normal_quantile
from .solver import Dataset, SlopeSolution, estimate_lipschitz, solve_slope, support
from .sorted_l1 import prox_sorted_l1, soft_threshold, sorted_l1_norm

__version__ = "0.1.0"
