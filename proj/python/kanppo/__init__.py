"""Kolmogorov-Arnold networks as PPO function approximators.

Everything here is a thin re-export of the compiled core; see the C++
headers under include/kanppo for the authoritative contracts.
"""

from kanppo._kanppo import (
    ConfigError,
    Environment,
    Network,
    NumericError,
    arch_names,
    basis_derivatives,
    basis_values,
    clip_objective,
    compute_gae,
    count_params,
    env_names,
    eval_checkpoint,
    eval_spline,
    param_table,
    random_baseline,
    ratio,
    td_error,
    train_run,
)

__all__ = [
    "ConfigError",
    "Environment",
    "Network",
    "NumericError",
    "arch_names",
    "basis_derivatives",
    "basis_values",
    "clip_objective",
    "compute_gae",
    "count_params",
    "env_names",
    "eval_checkpoint",
    "eval_spline",
    "param_table",
    "random_baseline",
    "ratio",
    "td_error",
    "train_run",
]

__version__ = "0.1.0"
