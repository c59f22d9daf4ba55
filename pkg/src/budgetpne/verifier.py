"""Exact pure-Nash verification by sweeping each vendor's price line.

With the other prices fixed, the buyer's utility for a bundle containing
vendor ``i`` is ``a_S - x`` (``x`` = vendor i's price, feasible while
``x <= b_S``) and constant for bundles without ``i``.  The demand can only
switch at crossings ``a_S - x = g_T`` and budget edges ``x = b_S``, so
evaluating every breakpoint plus one point inside each gap covers the whole
deviation space exactly.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .demand import DemandOutcome, PriceVector, demand
from .valuations import Game, popcount


@dataclass(frozen=True)
class CriticalPriceSet:
    vendor: int
    breakpoints: tuple[Fraction, ...]


class _PriceLine:
    """Vendor ``i``'s view of the buyer, precomputed for fast point queries."""

    def __init__(self, game: Game, prices: Sequence[Fraction], vendor: int):
        n, table, B = game.n, game.valuation.table, game.budget
        bit = 1 << vendor
        costs = [Fraction(0)] * (1 << n)
        for m in range(1, 1 << n):
            low = m & -m
            j = low.bit_length() - 1
            costs[m] = costs[m ^ low] + (0 if j == vendor else prices[j])

        # bundles with i: (a_S, b_S, key) ; key = (size, -mask) for tie-breaks
        self.with_i = []
        self.without_best = None
        self.without_utils = set()
        for m in range(1 << n):
            c = costs[m]
            if m & bit:
                if c <= B:
                    self.with_i.append((table[m] - c, B - c, popcount(m), -m))
            elif c <= B:
                key = (table[m] - c, popcount(m), -m)
                self.without_utils.add(key[0])
                if self.without_best is None or key > self.without_best:
                    self.without_best = key

        # sort by budget edge descending; prefix maxima of (a, size, -mask)
        self.with_i.sort(key=lambda r: r[1], reverse=True)
        self._neg_edges = [-r[1] for r in self.with_i]
        self._prefix: list[tuple[Fraction, int, int]] = []
        best = None
        for a, _, size, negm in self.with_i:
            k = (a, size, negm)
            if best is None or k > best:
                best = k
            self._prefix.append(best)

    def breakpoints(self, current: Fraction) -> tuple[Fraction, ...]:
        points = {Fraction(0), current}
        for a, b, _, _ in self.with_i:
            points.add(b)
        for a, b, _, _ in self.with_i:
            for g in self.without_utils:
                x = a - g
                if 0 <= x <= b:
                    points.add(x)
        return tuple(sorted(points))

    def sold(self, x: Fraction) -> bool:
        # bundles with i still affordable at price x: those with b_S >= x
        count = bisect.bisect_right(self._neg_edges, -x)
        if count == 0:
            return False
        a, size, negm = self._prefix[count - 1]
        return (a - x, size, negm) > self.without_best


def critical_prices(game: Game, prices: Sequence[Fraction], vendor: int) -> CriticalPriceSet:
    line = _PriceLine(game, prices, vendor)
    return CriticalPriceSet(vendor, line.breakpoints(prices[vendor]))


@dataclass(frozen=True)
class BestResponse:
    vendor: int
    current_utility: Fraction
    sup_utility: Fraction
    sup_attained: bool
    witness_price: Fraction | None = None
    witness_outcome: DemandOutcome | None = None

    @property
    def gain(self) -> Fraction | None:
        if self.witness_price is None:
            return None
        return self.witness_price - self.current_utility

    @property
    def can_improve(self) -> bool:
        return self.witness_price is not None


def best_response(game: Game, prices: Sequence[Fraction], vendor: int) -> BestResponse:
    """Supremum of vendor ``i``'s payment over all unilateral prices.

    The payment is ``x`` wherever the item sells, so on each gap between
    breakpoints it is increasing and its supremum is the right end, attained
    only if the item still sells there.
    """
    prices = tuple(prices)
    line = _PriceLine(game, prices, vendor)
    current = prices[vendor]
    bps = line.breakpoints(current)
    sold_at = [line.sold(c) for c in bps]
    current_utility = current if sold_at[bps.index(current)] else Fraction(0)

    sup, attained, gap = Fraction(0), True, None
    for k, c in enumerate(bps):
        if sold_at[k] and c > sup:
            sup, attained, gap = c, True, None
        if k + 1 < len(bps):
            hi = bps[k + 1]
            if hi > sup and line.sold((c + hi) / 2):
                if not (sold_at[k + 1]):
                    sup, attained, gap = hi, False, (c, hi)
    # past the last breakpoint every bundle with i is over budget
    assert not line.sold(bps[-1] + 1)

    witness = None
    if sup > current_utility:
        if attained:
            witness = sup
        else:
            lo, hi = gap
            witness = (max(lo, current_utility) + hi) / 2
    outcome = None
    if witness is not None:
        trial = prices[:vendor] + (witness,) + prices[vendor + 1:]
        outcome = demand(game, trial)
        assert vendor in outcome.chosen
    return BestResponse(vendor, current_utility, sup, attained, witness, outcome)


@dataclass(frozen=True)
class VerifyReport:
    prices: PriceVector
    outcome: DemandOutcome
    per_vendor: tuple[BestResponse, ...]

    @property
    def is_pne(self) -> bool:
        return not any(r.can_improve for r in self.per_vendor)

    @property
    def deviators(self) -> tuple[int, ...]:
        return tuple(r.vendor for r in self.per_vendor if r.can_improve)


def verify_pne(game: Game, prices: Sequence[Fraction]) -> VerifyReport:
    prices = tuple(Fraction(p) for p in prices)
    if len(prices) != game.n:
        raise ValueError(f"expected {game.n} prices, got {len(prices)}")
    outcome = demand(game, prices)
    per_vendor = tuple(best_response(game, prices, i) for i in game.items)
    for r in per_vendor:
        assert (r.current_utility > 0) == (r.vendor in outcome.chosen and prices[r.vendor] > 0)
    return VerifyReport(prices, outcome, per_vendor)
