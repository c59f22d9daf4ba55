"""Welfare of equilibria, best/worst equilibrium ratios, and the additive
family whose ratio grows linearly in n."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .demand import PriceVector, as_prices, demand
from .valuations import Additive, Game
from .verifier import verify_pne

# smallest n at which both constructed price vectors verify exactly
MIN_FAMILY_N = 8


@dataclass(frozen=True)
class WelfareReport:
    welfare: Fraction
    chosen: frozenset[int]
    excluded_free_items: frozenset[int]
    market_clearing: bool


def social_welfare(game: Game, prices: Sequence[Fraction]) -> WelfareReport:
    """Value of the bought items that carry a positive price.

    Free items stay in the buyer's bundle but add nothing to welfare.
    """
    out = demand(game, prices)
    paid = out.positively_priced
    return WelfareReport(
        welfare=game.valuation.value(paid),
        chosen=out.chosen,
        excluded_free_items=out.chosen - paid,
        market_clearing=len(out.chosen) == game.n and min(prices) > 0,
    )


class NoEquilibrium(ValueError):
    pass


@dataclass(frozen=True)
class RatioReport:
    equilibria: tuple[tuple[PriceVector, Fraction], ...]
    rejected: tuple[PriceVector, ...]
    best: Fraction
    worst: Fraction

    @property
    def ratio(self) -> Fraction:
        return self.best / self.worst


def equilibrium_ratio(game: Game, candidates: Iterable[Sequence[Fraction]]) -> RatioReport:
    """Best over worst welfare among the candidates that are exact PNE."""
    candidates = [tuple(Fraction(x) for x in p) for p in candidates]
    if not candidates:
        raise ValueError("no candidate price vectors given")
    kept, rejected = [], []
    for p in candidates:
        if verify_pne(game, p).is_pne:
            kept.append((p, social_welfare(game, p).welfare))
        else:
            rejected.append(p)
    if not kept:
        raise NoEquilibrium("none of the candidates is a pure Nash equilibrium")
    welfares = [w for _, w in kept]
    best, worst = max(welfares), min(welfares)
    if worst == 0:
        raise NoEquilibrium("the worst verified equilibrium has zero welfare")
    return RatioReport(tuple(kept), tuple(rejected), best, worst)


@dataclass(frozen=True)
class Family:
    game: Game
    worst: PriceVector
    best: PriceVector


def family_prices(n: int) -> tuple[PriceVector, PriceVector]:
    middle = n - 3
    worst = as_prices([1] + [0] * (n - 1))
    best = as_prices([Fraction(1, 2)] + [Fraction(1, 2 * middle)] * middle + [Fraction(1, 4)] * 2)
    return worst, best


def family_game(n: int, scale: int = 2) -> Game:
    if n < 4:
        raise ValueError("the family needs at least one middle item (n >= 4)")
    values = [Fraction(scale)] + [Fraction(scale - 1)] * (n - 3) + [Fraction(55, 100)] * 2
    return Game(Additive(tuple(values)), Fraction(1), max_items=max(n, 12))


def poa_family(n: int, scale: int = 2) -> Family:
    """Additive game with a cheap single-item PNE and a rich one.

    Values are ``(scale, scale-1 (n-3 times), 0.55, 0.55)`` with budget 1.
    The worst equilibrium gives the whole budget to item 0; the best splits
    it over item 0 and the middle items.  Both are checked exactly and a
    ``ValueError`` is raised if either fails.
    """
    if n < MIN_FAMILY_N:
        raise ValueError(f"the construction is not an equilibrium below n = {MIN_FAMILY_N}")
    game = family_game(n, scale)
    worst, best = family_prices(n)
    for name, p in (("worst", worst), ("best", best)):
        report = verify_pne(game, p)
        if not report.is_pne:
            raise ValueError(f"{name} price vector is not a PNE (vendors {report.deviators} deviate)")
    return Family(game, worst, best)
