"""Transition-model regularization for certainty-equivalence planning.

Discount regularization, Dirichlet priors and state-action-specific
weighted averaging, with the environments and sweep harness used to
compare them.
"""
from .environments import (EnvSpec, make_controlled_loop, make_random_chain, make_river_swim,
                           make_strens_loop, river_swim_left_right_prior)
from .errors import ConfigError, DiscregError, InvalidModelError, NumericalError, ParameterError
from .estimation import (dirichlet_posterior_mean, mle_estimate, prior_weight, uniform_matrix,
                         weighted_average_regularize, zeros_matrix)
from .experiments import (DatasetConfig, LossRecord, SweepConfig, compute_loss, export_results,
                          load_results, run_state_specific, run_sweep, run_theorem_check,
                          sample_dataset, summarize)
from .mdp import (Mdp, Solution, evaluate_policy, greedy_policy, policies_equivalent,
                  policy_iteration, solve, value_iteration)
from .model_free import QLearnConfig, q_learning_baseline, q_learning_regularized
from .regularizers import (RegularizerSpec, apply_regularizer, discount_to_eps,
                           eps_greedy_regularize, eps_star_eps_greedy, eps_star_posterior_sampled,
                           eps_star_uniform, eps_to_discount, implied_prior_magnitude, k_factor,
                           mse_uniform, regularize)

__version__ = "0.1.0"
