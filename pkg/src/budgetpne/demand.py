"""Budgeted quasi-linear buyer and its demand correspondence."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .valuations import Game, ItemSet, RationalLike, items_of, mask_of, popcount, to_rational

PriceVector = tuple[Fraction, ...]

# u_b of an over-budget bundle; compares below every rational
INFEASIBLE = None


def as_prices(prices: Iterable[RationalLike], n: int | None = None) -> PriceVector:
    """Validate and convert to an exact price vector."""
    out = tuple(to_rational(p) for p in prices)
    if n is not None and len(out) != n:
        raise ValueError(f"expected {n} prices, got {len(out)}")
    for i, p in enumerate(out):
        if p < 0:
            raise ValueError(f"price of item {i} is negative ({p})")
    return out


def parse_prices(text: str, n: int | None = None) -> PriceVector:
    """Parse "0.6,0.4,1/3" into a price vector."""
    parts = [t for t in text.replace(" ", "").split(",") if t]
    return as_prices(parts, n)


@dataclass(frozen=True)
class DemandOutcome:
    chosen: frozenset[int]
    cost: Fraction
    buyer_utility: Fraction
    positively_priced: frozenset[int]
    num_optima: int
    num_max_size_optima: int

    @property
    def chosen_mask(self) -> int:
        return mask_of(self.chosen)

    @property
    def tie_broken(self) -> bool:
        """True when the lexicographic rule, not maximality, picked the set."""
        return self.num_max_size_optima > 1


def buyer_utility(game: Game, S: ItemSet, prices: Sequence[Fraction]) -> Fraction | None:
    """``v(S) - p(S)``, or ``None`` when ``S`` is over budget."""
    m = mask_of(S)
    cost = sum((prices[i] for i in items_of(m)), Fraction(0))
    if cost > game.budget:
        return INFEASIBLE
    return game.valuation.value_mask(m) - cost


def _subset_costs(prices: Sequence[Fraction], n: int) -> list[Fraction]:
    costs = [Fraction(0)] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        costs[m] = costs[m ^ low] + prices[low.bit_length() - 1]
    return costs


def demand(game: Game, prices: Sequence[Fraction]) -> DemandOutcome:
    """The maximal buyer's chosen bundle.

    All ``2**n`` bundles are scanned.  Among affordable utility maximizers the
    largest is taken; equal-size ties go to the smallest bitmask.
    """
    n = game.n
    if len(prices) != n:
        raise ValueError(f"expected {n} prices, got {len(prices)}")
    table = game.valuation.table
    budget = game.budget
    costs = _subset_costs(prices, n)

    best_util = None
    best_masks: list[int] = []
    for m in range(1 << n):
        c = costs[m]
        if c > budget:
            continue
        u = table[m] - c
        if best_util is None or u > best_util:
            best_util, best_masks = u, [m]
        elif u == best_util:
            best_masks.append(m)

    sizes = [popcount(m) for m in best_masks]
    top = max(sizes)
    largest = [m for m, k in zip(best_masks, sizes) if k == top]
    pick = min(largest)
    chosen = frozenset(items_of(pick))
    return DemandOutcome(
        chosen=chosen,
        cost=costs[pick],
        buyer_utility=best_util,
        positively_priced=frozenset(i for i in chosen if prices[i] > 0),
        num_optima=len(best_masks),
        num_max_size_optima=len(largest),
    )


def vendor_utilities(outcome: DemandOutcome, prices: Sequence[Fraction]) -> PriceVector:
    """Each vendor is paid its price if its item is bought, else nothing."""
    return tuple(p if i in outcome.chosen else Fraction(0) for i, p in enumerate(prices))
