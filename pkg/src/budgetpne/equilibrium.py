"""Equal-utility price constructions, the base set, and market clearing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .demand import PriceVector, demand
from .valuations import Additive, Game, ItemSet, item_marginals, items_of, mask_of


class ConstraintViolation(ValueError):
    """Raised when an equal-utility construction's preconditions fail."""

    def __init__(self, message: str, item: int | None = None, threshold: Fraction | None = None):
        super().__init__(message)
        self.item = item
        self.threshold = threshold


@dataclass(frozen=True)
class ConstraintReport:
    items: tuple[int, ...]
    weights: dict[int, Fraction]
    thresholds: dict[int, Fraction | None]
    holds_per_item: dict[int, bool]
    budget: Fraction

    @property
    def holds(self) -> bool:
        return all(self.holds_per_item.values())

    @property
    def failing(self) -> tuple[int, ...]:
        return tuple(i for i in self.items if not self.holds_per_item[i])

    @property
    def total_weight(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))


def _weights_for(game: Game, weights: Sequence[Fraction] | None) -> tuple[Fraction, ...]:
    if weights is None:
        return item_marginals(game.valuation)
    w = tuple(Fraction(x) for x in weights)
    if len(w) != game.n:
        raise ValueError(f"expected {game.n} weights, got {len(w)}")
    return w


def constraint_thresholds(weights: Sequence[Fraction], budget: Fraction):
    """Per-item thresholds and verdicts for the weights of one set."""
    k = len(weights)
    total = sum(weights, Fraction(0))
    if k == 1:
        return [None], [weights[0] > 0]
    thresholds = [(total - w - budget) / (k - 1) for w in weights]
    return thresholds, [w > t for w, t in zip(weights, thresholds)]


def check_constraint(game: Game, S: ItemSet, weights: Sequence[Fraction] | None = None) -> ConstraintReport:
    """Relative valuation constraint on ``S``.

    Every ``i`` in ``S`` must satisfy ``w_i > (sum_{j in S-i} w_j - B) / (|S|-1)``.
    A singleton holds iff its weight is positive.  ``weights`` is a length-n
    vector (additive values, or marginals); it defaults to ``v(N) - v(N-i)``.
    """
    items = items_of(mask_of(S))
    if not items:
        raise ValueError("the constraint is undefined on the empty set")
    w = _weights_for(game, weights)
    B = game.budget
    thresholds, holds = constraint_thresholds([w[i] for i in items], B)
    thresholds = dict(zip(items, thresholds))
    holds = dict(zip(items, holds))
    return ConstraintReport(items, {i: w[i] for i in items}, thresholds, holds, B)


def equal_utility_prices(game: Game, S: ItemSet, weights: Sequence[Fraction] | None = None) -> PriceVector:
    """Prices on ``S`` that spend the whole budget and leave equal surplus.

    ``p_i = (B + (|S|-1) w_i - sum_{j in S-i} w_j) / |S|`` on ``S`` and 0
    elsewhere, so ``w_i - p_i = (w(S) - B) / |S|`` for every ``i`` in ``S``.
    """
    report = check_constraint(game, S, weights)
    if not report.holds:
        bad = report.failing[0]
        raise ConstraintViolation(
            f"relative valuation constraint fails at item {bad} "
            f"(weight {report.weights[bad]}, threshold {report.thresholds[bad]})",
            item=bad,
            threshold=report.thresholds[bad],
        )
    B = game.budget
    total = report.total_weight
    if total <= B:
        raise ConstraintViolation(f"total weight {total} does not exceed the budget {B}")
    k = len(report.items)
    prices = [Fraction(0)] * game.n
    for i in report.items:
        w = report.weights[i]
        prices[i] = (B + (k - 1) * w - (total - w)) / k
    return tuple(prices)


@dataclass(frozen=True)
class BaseSet:
    items: frozenset[int]
    order: tuple[int, ...]
    # first item refused by the greedy, with the value it failed to beat
    stop_witness: tuple[int, Fraction] | None


def base_set(game: Game) -> BaseSet:
    """Greedy prefix of the value-sorted items (additive games only).

    Items are added in non-increasing value order (ties by index) while the
    next value beats ``(v(L) - B) / |L|``.
    """
    val = game.valuation
    if not isinstance(val, Additive):
        raise TypeError(f"the base set is defined for additive valuations, not {val.kind}")
    B = game.budget
    v = val.values
    if sum(v) <= B:
        raise ValueError(f"v(N) = {sum(v)} does not exceed the budget {B}")
    order = tuple(sorted(range(game.n), key=lambda i: (-v[i], i)))
    chosen = [order[0]]
    total = v[order[0]]
    witness = None
    for i in order[1:]:
        threshold = (total - B) / len(chosen)
        if v[i] <= threshold:
            witness = (i, threshold)
            break
        chosen.append(i)
        total += v[i]

    assert total > B, "base set must hold more value than the budget"
    assert check_constraint(game, chosen, v).holds, "base set must satisfy the constraint"
    return BaseSet(frozenset(chosen), order, witness)


def base_set_prices(game: Game) -> PriceVector:
    """Equal-utility prices on the base set, zero elsewhere."""
    L = base_set(game)
    return equal_utility_prices(game, L.items, game.valuation.values)  # type: ignore[attr-defined]


def bnl_prices(game: Game) -> PriceVector:
    """Unbudgeted benchmark prices ``p_i = v(N) - v(N - i)``."""
    return item_marginals(game.valuation)


def is_market_clearing(game: Game, prices: Sequence[Fraction]) -> bool:
    if min(prices) <= 0:
        return False
    return len(demand(game, prices).chosen) == game.n
