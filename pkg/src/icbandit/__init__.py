"""Measuring incentive-compatibility regret of black-box auctions by online learning."""

from .accounting import (
    GroundTruth,
    RegretLedger,
    bound_dsp,
    bound_known_value,
    bound_switching,
    discretization_error_bound,
    estimate_ground_truth,
    ic_regret_error,
    instantaneous_gap,
    optimal_m,
)
from .auction import (
    AuctionEnvironment,
    AuctionOutcome,
    BidGrid,
    BlockObservation,
    empirical_utility,
    sample_block,
    utility,
)
from .estimator import (
    ArmStats,
    UcbContext,
    regret_point_estimate,
    ucb_regret,
    ucb_utility,
)
from .gsp import GspConfig, GspEnvironment, SecondPriceEnvironment
from .harness import (
    ExperimentConfig,
    RunRecord,
    load_config,
    run_experiment,
    summarize,
    sweep,
)
from .policies import (
    EpsilonGreedy,
    RandomBids,
    RegretUcbDsp,
    RegretUcbKnownValue,
    RegretUcbSwitching,
    RoundPlan,
    execute_round,
    generate_bids,
    init_probe,
)

__version__ = "0.1.0"

__all__ = [
    "ArmStats",
    "AuctionEnvironment",
    "AuctionOutcome",
    "BidGrid",
    "BlockObservation",
    "EpsilonGreedy",
    "ExperimentConfig",
    "GroundTruth",
    "GspConfig",
    "GspEnvironment",
    "RandomBids",
    "RegretLedger",
    "RegretUcbDsp",
    "RegretUcbKnownValue",
    "RegretUcbSwitching",
    "RoundPlan",
    "RunRecord",
    "SecondPriceEnvironment",
    "UcbContext",
    "bound_dsp",
    "bound_known_value",
    "bound_switching",
    "discretization_error_bound",
    "empirical_utility",
    "estimate_ground_truth",
    "execute_round",
    "generate_bids",
    "ic_regret_error",
    "init_probe",
    "instantaneous_gap",
    "load_config",
    "optimal_m",
    "regret_point_estimate",
    "run_experiment",
    "sample_block",
    "summarize",
    "sweep",
    "ucb_regret",
    "ucb_utility",
    "utility",
]
