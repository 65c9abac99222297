"""Bid-selection policies and round execution.

Each policy maps the current arm statistics to a round plan: m distinct
probe bids plus one anchor bid for the final block (the known valuation,
the chosen candidate valuation, or simply the last of m+1 bids when
valuation and bid roles may switch). Ties in every argmax are broken
toward the lower bid (then lower valuation), which keeps replays
deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .auction import AuctionEnvironment, BidGrid, empirical_utility, sample_block
from .estimator import (
    ArmStats,
    UcbContext,
    regret_matrix,
    ucb_regret_matrix,
    ucb_utility_row,
)


@dataclass(frozen=True)
class RoundPlan:
    """Bids for one timestep: m probe blocks plus the anchor block."""

    probe_bids: tuple[float, ...]
    anchor_bid: float

    def __post_init__(self):
        if len(set(self.probe_bids)) != len(self.probe_bids):
            raise ValueError("probe bids must be pairwise distinct")

    @property
    def all_bids(self) -> tuple[float, ...]:
        return self.probe_bids + (self.anchor_bid,)

    def require_all_distinct(self) -> None:
        """Switching plans need all m+1 bids pairwise distinct."""
        if self.anchor_bid in self.probe_bids:
            raise ValueError("switching plan has a repeated bid")


def _top_indices(values: np.ndarray, count: int, exclude: int | None = None) -> list[int]:
    # Stable sort on descending value resolves ties toward the lower index.
    order = np.argsort(-values, kind="stable")
    picked = []
    for i in order:
        if i == exclude:
            continue
        picked.append(int(i))
        if len(picked) == count:
            break
    return picked


def init_probe(env: AuctionEnvironment, grid: BidGrid, m: int, n: int) -> ArmStats:
    """Seed every arm with one block of n/(m+1) auctions at its own bid."""
    if m < 1 or n < 1 or n % (m + 1) != 0:
        raise ValueError("n must be a positive multiple of m+1")
    block_size = n // (m + 1)
    stats = ArmStats(grid)
    for level in grid.levels:
        stats.absorb(sample_block(env, float(level), block_size))
    return stats


def plan_known_value(stats: ArmStats, ctx: UcbContext, v: float) -> RoundPlan:
    """Probe the m bids with the largest utility UCB for valuation v; anchor at v."""
    if ctx.m >= len(stats.grid):
        raise ValueError("m must be smaller than the grid size")
    row = ucb_utility_row(stats, ctx, v)
    probes = _top_indices(row, ctx.m)
    levels = stats.grid.levels
    return RoundPlan(tuple(float(levels[i]) for i in probes), anchor_bid=float(v))


def plan_dsp(stats: ArmStats, ctx: UcbContext, probe_index: str = "regret") -> RoundPlan:
    """Pick the (valuation, bid) pair with the largest regret UCB, then fill
    the remaining m-1 probe slots.

    probe_index selects the index the remaining bids maximize: "regret"
    ranks by the regret UCB of (v_t, .), "utility" by the utility UCB of
    v_t (both readings appear in the source algorithm's description).
    """
    if ctx.m >= len(stats.grid):
        raise ValueError("m must be smaller than the grid size")
    if probe_index not in ("regret", "utility"):
        raise ValueError("probe_index must be 'regret' or 'utility'")
    table = ucb_regret_matrix(stats, ctx)
    size = len(stats.grid)
    vi, b1 = divmod(int(np.argmax(table)), size)  # first max = lexicographic tie-break
    probes = [b1]
    if ctx.m >= 2:
        levels = stats.grid.levels
        if probe_index == "regret":
            row = table[vi]
        else:
            row = ucb_utility_row(stats, ctx, float(levels[vi]))
        probes.extend(_top_indices(row, ctx.m - 1, exclude=b1))
    levels = stats.grid.levels
    return RoundPlan(tuple(float(levels[i]) for i in probes), anchor_bid=float(levels[vi]))


def generate_bids(table: np.ndarray, m: int, rng: np.random.Generator) -> list[int]:
    """Greedy selection of m+1 distinct bid indices from a pairwise UCB table.

    Repeatedly takes the largest entry whose pair has at least one member
    outside the chosen set and admits the new member(s); when only one slot
    remains and both members are new, one of the two is chosen at random.
    """
    size = table.shape[0]
    if not 1 <= m + 1 <= size:
        raise ValueError("need 1 <= m+1 <= grid size")
    chosen: list[int] = []
    in_set = np.zeros(size, dtype=bool)
    while len(chosen) < m + 1:
        fresh = ~in_set
        allowed = fresh[:, None] | fresh[None, :]
        flat = int(np.argmax(np.where(allowed, table, -np.inf)))
        b1, b2 = divmod(flat, size)
        new = [b for b in dict.fromkeys((b1, b2)) if not in_set[b]]
        if len(new) == 2 and m + 1 - len(chosen) == 1:
            new = [new[int(rng.integers(2))]]
        for b in new:
            in_set[b] = True
            chosen.append(b)
    return chosen


def plan_switching(stats: ArmStats, ctx: UcbContext, rng: np.random.Generator) -> RoundPlan:
    """All m+1 blocks are probes; bids come from the greedy pair selection
    over the full regret-UCB table."""
    if ctx.m + 1 > len(stats.grid):
        raise ValueError("need m+1 <= grid size")
    indices = sorted(generate_bids(ucb_regret_matrix(stats, ctx), ctx.m, rng))
    levels = stats.grid.levels
    bids = [float(levels[i]) for i in indices]
    plan = RoundPlan(tuple(bids[:-1]), anchor_bid=bids[-1])
    plan.require_all_distinct()
    return plan


def plan_random(grid: BidGrid, m: int, rng: np.random.Generator, known_v: float | None = None) -> RoundPlan:
    """m distinct uniform probe bids; anchor at the known valuation or a uniform one."""
    if m >= len(grid):
        raise ValueError("m must be smaller than the grid size")
    levels = grid.levels
    probes = sorted(rng.choice(len(grid), size=m, replace=False))
    if known_v is None:
        anchor = float(levels[rng.integers(len(grid))])
    else:
        anchor = float(known_v)
    return RoundPlan(tuple(float(levels[i]) for i in probes), anchor_bid=anchor)


def plan_epsilon_greedy(
    stats: ArmStats,
    ctx: UcbContext,
    epsilon: float,
    rng: np.random.Generator,
    known_v: float | None = None,
) -> RoundPlan:
    """With probability epsilon plan at random, otherwise greedily on point estimates.

    Advertiser side (known_v given): the m bids with the largest estimated
    utility. DSP side: the pair with the largest estimated regret, then the
    m-1 bids with the largest estimated utility under the chosen valuation.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if ctx.m >= len(stats.grid):
        raise ValueError("m must be smaller than the grid size")
    if rng.random() < epsilon:
        return plan_random(stats.grid, ctx.m, rng, known_v=known_v)
    levels = stats.grid.levels
    if known_v is not None:
        probes = _top_indices(stats.utility_estimates(known_v), ctx.m)
        return RoundPlan(tuple(float(levels[i]) for i in probes), anchor_bid=float(known_v))
    table = regret_matrix(stats)
    vi, b1 = divmod(int(np.argmax(table)), len(stats.grid))
    probes = [b1]
    if ctx.m >= 2:
        probes.extend(_top_indices(stats.utility_estimates(float(levels[vi])), ctx.m - 1, exclude=b1))
    return RoundPlan(tuple(float(levels[i]) for i in probes), anchor_bid=float(levels[vi]))


def _switching_empirical_regret(blocks) -> float:
    # max over ordered block pairs i != j of u~_j(b_i, .) - u~_i(b_i, b_i)
    bids = np.array([o.bid for o in blocks])
    alloc = np.array([o.mean_allocation for o in blocks])
    pay = np.array([o.mean_payment for o in blocks])
    cross = bids[:, None] * alloc[None, :] - pay[None, :]
    diff = cross - np.diag(cross)[:, None]
    np.fill_diagonal(diff, -np.inf)
    return float(diff.max())


def execute_round(
    env: AuctionEnvironment,
    plan: RoundPlan,
    stats: ArmStats,
    ctx: UcbContext,
    absorb_anchor: bool = False,
    switching: bool = False,
):
    """Sample one block per planned bid, update the played arms, and score
    the round's empirical regret.

    Probe blocks always update their arms. The anchor block updates its arm
    only when absorb_anchor is set (the DSP and switching algorithms update
    it, the known-valuation algorithm by default does not). Returns
    (observations, empirical regret); observations order is probes then anchor.
    """
    block_size = ctx.block_size
    if switching:
        plan.require_all_distinct()
    observations = [sample_block(env, b, block_size) for b in plan.probe_bids]
    anchor_obs = sample_block(env, plan.anchor_bid, block_size)
    observations.append(anchor_obs)
    for obs in observations[:-1]:
        stats.absorb(obs)
    if absorb_anchor or switching:
        stats.absorb(anchor_obs)
    if switching:
        empirical = _switching_empirical_regret(observations)
    else:
        v = plan.anchor_bid
        best_probe = max(empirical_utility(v, obs) for obs in observations[:-1])
        empirical = best_probe - empirical_utility(v, anchor_obs)
    return observations, float(empirical)


class Policy:
    """Base policy: owns its planning rule, RNG, and round-scoring kind."""

    label = "policy"
    gap_kind = "known_value"  # which indicator form scores this policy's rounds
    absorbs_anchor = False
    switching = False

    def plan(self, stats: ArmStats, ctx: UcbContext) -> RoundPlan:
        raise NotImplementedError


class RegretUcbKnownValue(Policy):
    """Advertiser-side UCB policy for a known valuation."""

    label = "regret_ucb_known_v"
    gap_kind = "known_value"

    def __init__(self, v: float, update_anchor: bool = False):
        self.v = float(v)
        self.absorbs_anchor = bool(update_anchor)

    def plan(self, stats, ctx):
        return plan_known_value(stats, ctx, self.v)


class RegretUcbDsp(Policy):
    """DSP-side UCB policy searching over (valuation, bid) pairs."""

    label = "regret_ucb_dsp"
    gap_kind = "dsp"
    absorbs_anchor = True

    def __init__(self, probe_index: str = "regret"):
        if probe_index not in ("regret", "utility"):
            raise ValueError("probe_index must be 'regret' or 'utility'")
        self.probe_index = probe_index

    def plan(self, stats, ctx):
        return plan_dsp(stats, ctx, probe_index=self.probe_index)


class RegretUcbSwitching(Policy):
    """DSP-side UCB policy that lets every planned bid act as valuation or bid."""

    label = "regret_ucb_switching"
    gap_kind = "switching"
    absorbs_anchor = True
    switching = True

    def __init__(self, rng: np.random.Generator | None = None):
        self.rng = rng if rng is not None else np.random.default_rng()

    def plan(self, stats, ctx):
        return plan_switching(stats, ctx, self.rng)


class RandomBids(Policy):
    """Uniformly random probes (and valuation, on the DSP side)."""

    label = "random_bids"

    def __init__(self, rng: np.random.Generator, known_v: float | None = None):
        self.rng = rng
        self.known_v = known_v
        if known_v is None:
            self.gap_kind = "dsp"
            self.absorbs_anchor = True

    def plan(self, stats, ctx):
        return plan_random(stats.grid, ctx.m, self.rng, known_v=self.known_v)


class EpsilonGreedy(Policy):
    """Point-estimate greedy probes with epsilon-uniform exploration."""

    label = "epsilon_greedy"

    def __init__(self, rng: np.random.Generator, epsilon: float = 0.1, known_v: float | None = None):
        if not 0 <= epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        self.rng = rng
        self.epsilon = float(epsilon)
        self.known_v = known_v
        if known_v is None:
            self.gap_kind = "dsp"
            self.absorbs_anchor = True

    def plan(self, stats, ctx):
        return plan_epsilon_greedy(stats, ctx, self.epsilon, self.rng, known_v=self.known_v)
