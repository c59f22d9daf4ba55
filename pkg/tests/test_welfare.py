from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings

from budgetpne.demand import parse_prices
from budgetpne.equilibrium import equal_utility_prices
from budgetpne.valuations import Additive, Game
from budgetpne.verifier import verify_pne
from budgetpne.welfare import (
    MIN_FAMILY_N,
    NoEquilibrium,
    equilibrium_ratio,
    family_game,
    family_prices,
    poa_family,
    social_welfare,
)

from conftest import game_and_prices

F = Fraction


def test_free_items_excluded(bundled):
    game = bundled("budget_grab.game")
    report = social_welfare(game, parse_prices("1,0"))
    assert report.welfare == 2
    assert report.chosen == {0, 1}
    assert report.excluded_free_items == {1}
    assert not report.market_clearing


def test_market_clearing_welfare_is_total(bundled):
    game = bundled("add_222.game")
    report = social_welfare(game, equal_utility_prices(game, range(3)))
    assert report.market_clearing and report.welfare == 6


@given(game_and_prices(max_n=4))
@settings(max_examples=100, deadline=None)
def test_welfare_bounds(gp):
    game, prices = gp
    report = social_welfare(game, prices)
    assert 0 <= report.welfare <= game.valuation.value(game.items)
    assert all(prices[i] == 0 for i in report.excluded_free_items)


def test_family_ratios():
    for n, ratio in ((9, F(4)), (10, F(9, 2)), (8, F(7, 2))):
        fam = poa_family(n)
        report = equilibrium_ratio(fam.game, [fam.worst, fam.best])
        assert report.ratio == ratio
        assert report.ratio <= n
        assert not report.rejected


def test_family_welfares():
    fam = poa_family(9)
    assert social_welfare(fam.game, fam.worst).welfare == 2
    assert social_welfare(fam.game, fam.best).welfare == 8


@pytest.mark.parametrize("n", [6, 7])
def test_family_best_vector_fails_below_threshold(n):
    game = family_game(n)
    worst, best = family_prices(n)
    assert verify_pne(game, worst).is_pne
    assert not verify_pne(game, best).is_pne
    with pytest.raises(ValueError):
        poa_family(n)


def test_family_threshold_constant():
    assert MIN_FAMILY_N == 8
    poa_family(MIN_FAMILY_N)


def test_family_needs_middle_items():
    with pytest.raises(ValueError):
        family_game(3)


def test_large_family_lifts_item_cap():
    game = family_game(14)
    assert game.n == 14 and game.max_items == 14
    worst, best = family_prices(14)
    assert social_welfare(game, best).welfare / social_welfare(game, worst).welfare == F(13, 2)


def test_ratio_single_equilibrium_is_one(bundled):
    game = bundled("budget_grab.game")
    report = equilibrium_ratio(game, [parse_prices("1,0.5")])
    assert report.ratio == 1


def test_ratio_rejects_non_equilibria(bundled):
    game = bundled("budget_grab.game")
    report = equilibrium_ratio(game, [parse_prices("1,0.5"), parse_prices("0.5,0.5")])
    assert report.rejected == (parse_prices("0.5,0.5"),)
    with pytest.raises(NoEquilibrium):
        equilibrium_ratio(game, [parse_prices("0.5,0.5")])
    with pytest.raises(ValueError):
        equilibrium_ratio(game, [])


def test_ratio_zero_worst_welfare():
    # nothing is bought at a positive price when every item is free
    game = Game(Additive(("0", "0")), 1)
    with pytest.raises(NoEquilibrium, match="zero"):
        equilibrium_ratio(game, [(F(0), F(0))])
