"""Black-box auction interface: bid grid, outcomes, utilities, block sampling.

This module defines everything the learning side of the library is allowed
to see about an auction: a finite bid grid, single-auction outcomes, and
per-block averages of outcomes. Environments are opaque samplers; outcomes
for distinct calls are i.i.d. conditional on the submitted bid.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import NamedTuple

import numpy as np


class AuctionOutcome(NamedTuple):
    """Result of a single auction for the test bidder."""

    allocation: float  # expected click mass, in [0, 1]
    payment: float  # currency units, >= 0


class BlockObservation(NamedTuple):
    """Average allocation and payment over one block of same-bid auctions."""

    bid: float
    mean_allocation: float
    mean_payment: float
    block_size: int


class BidGrid:
    """Finite, strictly increasing set of non-negative bid levels.

    Levels are stored exactly as constructed and membership is exact float
    equality; grids built with `from_range` compute each level by a single
    multiplication (never repeated addition) so that e.g. 9.5 is the exact
    float 9.5 on the standard 0.01-step grid.
    """

    def __init__(self, levels, step=None):
        levels = np.asarray(levels, dtype=float)
        if levels.ndim != 1 or levels.size == 0:
            raise ValueError("bid grid needs at least one level")
        if np.any(levels < 0):
            raise ValueError("bid levels must be non-negative")
        if levels.size > 1 and np.any(np.diff(levels) <= 0):
            raise ValueError("bid levels must be strictly increasing")
        self.levels = levels
        self.levels.flags.writeable = False
        if step is None:
            step = float(np.min(np.diff(levels))) if levels.size > 1 else 0.0
        self.step = float(step)
        self._index = {float(b): i for i, b in enumerate(levels)}

    @classmethod
    def from_range(cls, low, high, step):
        """Uniform grid low, low+step, ..., high (endpoints included)."""
        if step <= 0:
            raise ValueError("step must be positive")
        if high < low:
            raise ValueError("high must be >= low")
        count = int(round((high - low) / step)) + 1
        levels = np.round(low + step * np.arange(count), 12)
        return cls(levels, step=step)

    def __len__(self):
        return self.levels.size

    def __contains__(self, bid):
        return float(bid) in self._index

    def __eq__(self, other):
        return isinstance(other, BidGrid) and np.array_equal(self.levels, other.levels)

    def __repr__(self):
        return f"BidGrid({self.levels[0]:g}..{self.levels[-1]:g}, step={self.step:g}, size={len(self)})"

    def index_of(self, bid) -> int:
        """Exact-match index of a grid level; raises ValueError for non-members."""
        try:
            return self._index[float(bid)]
        except KeyError:
            raise ValueError(f"bid {bid!r} is not a grid level") from None

    def require_member(self, value, name="value") -> float:
        """Validate grid membership at construction time; returns the float level."""
        if value not in self:
            raise ValueError(f"{name}={value!r} must be a grid level")
        return float(value)

    @property
    def max_bid(self) -> float:
        return float(self.levels[-1])


class AuctionEnvironment(ABC):
    """Abstract black-box auction sampler.

    Implementations hold a named, seedable generator (numpy PCG64);
    reseeding with the same seed reproduces the identical outcome sequence.
    A single instance is single-threaded; concurrent runs must each hold
    their own reseeded instance.
    """

    @abstractmethod
    def outcomes(self, bid: float, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw `count` independent outcomes for `bid`.

        Returns (allocations, payments) as float arrays of length `count`.
        """

    @abstractmethod
    def reseed(self, seed) -> None:
        """Reset the internal generator from a seed or numpy SeedSequence."""

    @abstractmethod
    def utility_bound(self, grid: BidGrid) -> float:
        """Bound U such that every achievable utility lies in [-U, U]."""

    def sample(self, bid: float) -> AuctionOutcome:
        """Draw one outcome."""
        alloc, pay = self.outcomes(bid, 1)
        return AuctionOutcome(float(alloc[0]), float(pay[0]))


def utility(v: float, outcome: AuctionOutcome) -> float:
    """Quasilinear utility of valuation v under one outcome: allocation*v - payment."""
    return outcome.allocation * v - outcome.payment


def empirical_utility(v: float, obs: BlockObservation) -> float:
    """Block-average utility of valuation v: mean_allocation*v - mean_payment."""
    return obs.mean_allocation * v - obs.mean_payment


def sample_block(env: AuctionEnvironment, bid: float, block_size: int) -> BlockObservation:
    """Draw one block of `block_size` auctions at `bid` and average the outcomes."""
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    alloc, pay = env.outcomes(bid, block_size)
    return BlockObservation(
        bid=float(bid),
        mean_allocation=float(alloc.mean()),
        mean_payment=float(pay.mean()),
        block_size=int(block_size),
    )
