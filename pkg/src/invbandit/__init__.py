"""Inverse bandits: recover arm rewards from a low-regret demonstrator's actions."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .core import BanditInstance, GapProfile, RewardModel, RewardTape, gap_profile, make_instance, sample_reward
from .demonstrators import (
    DemonstratorConfig,
    Trajectory,
    confidence_width,
    run_etc,
    run_sae,
    run_ucb,
    simulate,
)
from .estimators import (
    EstimateReport,
    NaiveEstimatorConfig,
    estimate_naive,
    estimate_sae,
    estimate_ucb,
    most_pulled_arm,
    sae_switching_round,
    ucb_switching_round,
)
from .analysis import (
    aggregate,
    estimation_errors,
    kappa,
    loglog_slope,
    minimax_lower_bound,
    pseudo_regret,
    regret_upper_bound,
    tradeoff_curve,
)
from .harness import ExperimentConfig, ResultTable, run_experiment
