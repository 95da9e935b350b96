"""Bayesian inference under unbounded differential privacy.

Thin wrappers over the C++ core. Experiment configs are JSON documents with
the same schema the ``dpsize`` CLI reads.
"""

import json

from ._dpsize import (
    DpsizeError,
    bernoulli_chain,
    bernoulli_posterior,
    clamp_normalize,
    discrete_gaussian_log_pmf,
    discrete_laplace_log_pmf,
    dp_to_tv_delta,
    expected_abs_deviation,
    lemma_a12_bound,
    n_posterior,
    privatize_count,
    regression_sensitivity,
    truncation_half_width,
)
from . import _dpsize

__all__ = [
    "DpsizeError",
    "bernoulli_chain",
    "bernoulli_posterior",
    "clamp_normalize",
    "default_config",
    "discrete_gaussian_log_pmf",
    "discrete_laplace_log_pmf",
    "dp_to_tv_delta",
    "expected_abs_deviation",
    "lemma_a12_bound",
    "n_posterior",
    "privatize_count",
    "regression_sensitivity",
    "run_experiment",
    "truncation_half_width",
]


def default_config(kind):
    """Default config for an experiment kind, as a dict."""
    return json.loads(_dpsize.default_config(kind))


def run_experiment(config, smoke=False):
    """Run a table1, mcem_table2, dirichlet or theory_check config.

    ``config`` may be a dict or a JSON string. Outputs are also written to
    the config's ``output_dir``.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    return _dpsize.run_experiment(text, smoke)
