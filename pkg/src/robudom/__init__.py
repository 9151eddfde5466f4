"""Robust domination in random graphs G(n, p) with a conflict graph H removed."""
from .constructors import (METHODS, ConstructionResult, ConstructorParams, PreconditionError, construct,
                           construct_alteration, construct_auto, construct_distinct_tuple, construct_greedy,
                           construct_iterative, construct_sampling, construct_sparse, greedy_baseline,
                           preprocess_high_degree)
from .exact import ExactResult, exact_domination, exact_gamma_pair
from .graph import (ConflictGraph, Graph, GraphSpec, GraphStats, VertexSet, build_conflict, gen_bernoulli,
                    graph_minus, is_dominating, parse_conflict, resample_vertex_edges, stats)
from .harness import (ExperimentConfig, SummaryStats, TrialRecord, chernoff_empirical_check, export,
                      lambda_sandwich, load, martingale_lipschitz_check, ratio_summary, run_trials,
                      sparse_scaling, variance_growth_check)
from .regime import (RegimeParams, TailBound, a_lambda, b_lambda, binary_entropy, chernoff_bound,
                     classify_regime, lambda_a, lambda_b, lower_tail_bound, t_n, u_n, u_n_xy,
                     un_decreasing_certificate)

__version__ = "0.1.0"
