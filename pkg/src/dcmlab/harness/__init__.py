"""Monte Carlo harness: statistics, experiments and the conjecture comparison."""

from dcmlab.harness.conjecture import compare_joint_law, conjecture_limit_sampler
from dcmlab.harness.experiment import (
    ConfigError,
    ExperimentConfig,
    TrialRecord,
    n_sweep,
    replay_summary,
    run_experiment,
    trial_seed,
)
from dcmlab.harness.stats import gof_poisson, poisson_cdf, poisson_pmf
