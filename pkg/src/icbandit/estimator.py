"""Per-bid running statistics and the UCB indices that drive bid selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .auction import BidGrid, BlockObservation


@dataclass(frozen=True)
class UcbContext:
    """Round context for the confidence bonuses.

    t is the current timestep (>= 1; at t=1 the bonus vanishes since
    ln 1 = 0), m the number of probe blocks, n the auctions per timestep
    (a multiple of m+1), and U the utility bound of the environment.
    """

    t: int
    m: int
    n: int
    U: float

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n < 1 or self.n % (self.m + 1) != 0:
            raise ValueError("n must be a positive multiple of m+1")
        if self.U < 0:
            raise ValueError("U must be non-negative")

    @property
    def block_size(self) -> int:
        return self.n // (self.m + 1)


class ArmStats:
    """Running count and mean allocation/payment per grid bid.

    Counts start at zero; absorbing the single block drawn per bid during
    the init probe brings every count to one. Bids not played in a round
    carry their statistics over unchanged.
    """

    def __init__(self, grid: BidGrid):
        self.grid = grid
        size = len(grid)
        self.counts = np.zeros(size, dtype=np.int64)
        self.mean_allocation = np.zeros(size)
        self.mean_payment = np.zeros(size)

    def absorb(self, obs: BlockObservation) -> None:
        """Fold one block observation into the running means.

        Uses the rescale-and-divide update (old_mean*old_count + obs)/new_count.
        Raises ValueError for bids outside the grid.
        """
        i = self.grid.index_of(obs.bid)
        count = self.counts[i]
        self.counts[i] = count + 1
        self.mean_allocation[i] = (self.mean_allocation[i] * count + obs.mean_allocation) / (count + 1)
        self.mean_payment[i] = (self.mean_payment[i] * count + obs.mean_payment) / (count + 1)

    def utility_estimates(self, v: float) -> np.ndarray:
        """Point estimates of expected utility of valuation v across all bids."""
        return self.mean_allocation * v - self.mean_payment

    def initialized(self) -> bool:
        return bool(self.counts.min() >= 1)

    def copy(self) -> "ArmStats":
        dup = ArmStats(self.grid)
        dup.counts = self.counts.copy()
        dup.mean_allocation = self.mean_allocation.copy()
        dup.mean_payment = self.mean_payment.copy()
        return dup


def _require_initialized(stats: ArmStats) -> None:
    if not stats.initialized():
        raise ValueError("stats must be initialized (every count >= 1)")


def ucb_utility(stats: ArmStats, ctx: UcbContext, v: float, b: float) -> float:
    """Upper confidence bound on the expected utility of bidding b with valuation v.

    Point estimate plus 2U * sqrt(2(m+1) ln t / (n(b) * n)). The 2U factor
    sits outside the square root (the estimate range is [-U, U], width 2U).
    """
    _require_initialized(stats)
    i = stats.grid.index_of(b)
    point = stats.mean_allocation[i] * v - stats.mean_payment[i]
    bonus = 2.0 * ctx.U * math.sqrt(2.0 * (ctx.m + 1) * math.log(ctx.t) / (stats.counts[i] * ctx.n))
    return float(point + bonus)


def ucb_utility_row(stats: ArmStats, ctx: UcbContext, v: float) -> np.ndarray:
    """Vector of ucb_utility(v, b) over the whole grid."""
    _require_initialized(stats)
    bonus = 2.0 * ctx.U * np.sqrt(2.0 * (ctx.m + 1) * math.log(ctx.t) / (stats.counts * ctx.n))
    return stats.utility_estimates(v) + bonus


def regret_point_estimate(stats: ArmStats, v: float, b: float) -> float:
    """Estimated regret of bidding truthfully: u_hat(v, b) - u_hat(v, v)."""
    i = stats.grid.index_of(v)
    j = stats.grid.index_of(b)
    own = stats.mean_allocation[i] * v - stats.mean_payment[i]
    alt = stats.mean_allocation[j] * v - stats.mean_payment[j]
    return float(alt - own)


def regret_matrix(stats: ArmStats) -> np.ndarray:
    """Point-estimate regret for every (valuation, bid) pair; rows index valuations."""
    levels = stats.grid.levels
    table = levels[:, None] * stats.mean_allocation[None, :] - stats.mean_payment[None, :]
    return table - np.diag(table)[:, None]


def ucb_regret(stats: ArmStats, ctx: UcbContext, v: float, b: float) -> float:
    """UCB on the regret of pair (v, b): point estimate plus
    4U * sqrt(3(m+1) ln t / (n * min(n(v), n(b))))."""
    _require_initialized(stats)
    i = stats.grid.index_of(v)
    j = stats.grid.index_of(b)
    pulls = min(stats.counts[i], stats.counts[j])
    bonus = 4.0 * ctx.U * math.sqrt(3.0 * (ctx.m + 1) * math.log(ctx.t) / (ctx.n * pulls))
    return regret_point_estimate(stats, v, b) + bonus


def ucb_regret_matrix(stats: ArmStats, ctx: UcbContext) -> np.ndarray:
    """Matrix of ucb_regret over every (valuation, bid) pair."""
    _require_initialized(stats)
    pulls = np.minimum.outer(stats.counts, stats.counts)
    bonus = 4.0 * ctx.U * np.sqrt(3.0 * (ctx.m + 1) * math.log(ctx.t) / (ctx.n * pulls))
    return regret_matrix(stats) + bonus
