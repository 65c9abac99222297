"""Generalized second price simulation plus a truthful second-price control.

The GSP environment matches the standard sponsored-search model: each
auction draws fresh competitor bids and a fresh descending click-through
rate per slot; the test bidder at rank s receives the slot-s CTR and pays,
per unit CTR, the next-highest bid strictly below its own. Competitors win
ties against the test bidder. The single-slot second-price environment is
incentive compatible and serves as a control for the measurement pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .auction import AuctionEnvironment, AuctionOutcome, BidGrid

_CHUNK = 1 << 16


@dataclass(frozen=True)
class GspConfig:
    """Parameters of the simulated GSP market (defaults: 5 slots, 20 bidders,
    uniform [0, 10] competitor bids, Beta(2, 5) click-through rates)."""

    num_slots: int = 5
    num_competitors: int = 20
    competitor_low: float = 0.0
    competitor_high: float = 10.0
    ctr_alpha: float = 2.0
    ctr_beta: float = 5.0

    def validate(self) -> None:
        if self.num_slots < 1:
            raise ValueError("num_slots must be >= 1")
        if self.num_competitors < self.num_slots:
            raise ValueError("num_competitors must be >= num_slots")
        if not 0 <= self.competitor_low < self.competitor_high:
            raise ValueError("competitor bid range must satisfy 0 <= low < high")
        if self.ctr_alpha <= 0 or self.ctr_beta <= 0:
            raise ValueError("CTR Beta parameters must be positive")


def gsp_outcome(test_bid, competitor_bids, ctrs) -> AuctionOutcome:
    """Resolve a single GSP auction by hand rules (readable reference path).

    `ctrs` must be in descending slot order. The test bidder's 0-indexed
    rank equals the number of competitors bidding at or above `test_bid`
    (competitors win ties). A slot winner with no bid below it pays 0.
    """
    rank = sum(1 for c in competitor_bids if c >= test_bid)
    if rank >= len(ctrs):
        return AuctionOutcome(0.0, 0.0)
    below = [c for c in competitor_bids if c < test_bid]
    next_bid = max(below) if below else 0.0
    ctr = float(ctrs[rank])
    return AuctionOutcome(ctr, ctr * next_bid)


def second_price_outcome(test_bid, highest_competitor_bid) -> AuctionOutcome:
    """Single-slot second price with unit CTR; competitor wins ties."""
    if test_bid > highest_competitor_bid:
        return AuctionOutcome(1.0, float(highest_competitor_bid))
    return AuctionOutcome(0.0, 0.0)


def resolve_gsp(bid, competitor_bids, ctrs):
    """Vectorized GSP resolution for one test bid against drawn auctions.

    competitor_bids: (count, num_competitors); ctrs: (count, num_slots),
    descending along axis 1. Returns (allocations, payments).
    """
    num_slots = ctrs.shape[1]
    rank = (competitor_bids >= bid).sum(axis=1)
    won = rank < num_slots
    next_below = np.where(competitor_bids < bid, competitor_bids, 0.0).max(axis=1)
    slot_ctr = ctrs[np.arange(ctrs.shape[0]), np.minimum(rank, num_slots - 1)]
    alloc = np.where(won, slot_ctr, 0.0)
    return alloc, alloc * next_below


class GspEnvironment(AuctionEnvironment):
    """Stationary GSP sampler: fresh competitor bids and CTRs every auction."""

    def __init__(self, config: GspConfig | None = None, seed=0):
        self.config = config or GspConfig()
        self.config.validate()
        self.reseed(seed)

    def reseed(self, seed) -> None:
        self._rng = np.random.default_rng(seed)

    def _draw(self, count):
        cfg = self.config
        comp = self._rng.uniform(cfg.competitor_low, cfg.competitor_high, (count, cfg.num_competitors))
        ctrs = np.sort(self._rng.beta(cfg.ctr_alpha, cfg.ctr_beta, (count, cfg.num_slots)), axis=1)[:, ::-1]
        return comp, ctrs

    def outcomes(self, bid, count):
        alloc = np.empty(count)
        pay = np.empty(count)
        done = 0
        while done < count:
            size = min(_CHUNK, count - done)
            comp, ctrs = self._draw(size)
            alloc[done : done + size], pay[done : done + size] = resolve_gsp(bid, comp, ctrs)
            done += size
        return alloc, pay

    def utility_bound(self, grid: BidGrid) -> float:
        # CTR <= 1 and payment < test bid per click, so |u| <= max grid bid.
        return grid.max_bid


class SecondPriceEnvironment(AuctionEnvironment):
    """Single-slot second price against the max of i.i.d. uniform competitor bids.

    The price-setting bid (maximum of `num_competitors` uniforms) is sampled
    directly through its inverse CDF, which is distributionally identical to
    drawing all competitors and taking the max.
    """

    def __init__(self, config: GspConfig | None = None, seed=0):
        self.config = config or GspConfig()
        self.config.validate()
        self.reseed(seed)

    def reseed(self, seed) -> None:
        self._rng = np.random.default_rng(seed)

    def outcomes(self, bid, count):
        cfg = self.config
        u = self._rng.random(count)
        top = cfg.competitor_low + (cfg.competitor_high - cfg.competitor_low) * u ** (
            1.0 / cfg.num_competitors
        )
        won = bid > top
        return won.astype(float), np.where(won, top, 0.0)

    def utility_bound(self, grid: BidGrid) -> float:
        # Winning requires top < bid <= max grid bid, so |v - top| < max grid bid.
        return grid.max_bid
