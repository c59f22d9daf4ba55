from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budgetpne.demand import demand, parse_prices
from budgetpne.equilibrium import base_set, check_constraint, is_market_clearing
from budgetpne.oracle import GridSpec, grid_enumerate
from budgetpne.valuations import Additive, Game
from budgetpne.verifier import _PriceLine, best_response, critical_prices, verify_pne

from conftest import game_and_prices, games, rationals

F = Fraction


def _with(prices, i, x):
    return prices[:i] + (x,) + prices[i + 1:]


def _payment(game, prices, i, x):
    trial = _with(prices, i, x)
    return x if i in demand(game, trial).chosen else 0


# worked examples ---------------------------------------------------------------

@pytest.mark.parametrize("x", ["0", "0.25", "0.5", "1", "3"])
def test_budget_grab_family_is_pne(bundled, x):
    game = bundled("budget_grab.game")
    assert verify_pne(game, parse_prices(f"1,{x}")).is_pne


def test_budget_grab_other_prices_fail(bundled):
    game = bundled("budget_grab.game")
    report = verify_pne(game, parse_prices("0.5,0.5"))
    assert not report.is_pne and 0 in report.deviators


def test_x_neq_l_is_pne(bundled):
    report = verify_pne(bundled("x_neq_l.game"), parse_prices("0.9,0.1,0.9"))
    assert report.is_pne
    assert report.outcome.chosen == {0, 1}


def test_pne_not_l(bundled):
    report = verify_pne(bundled("pne_not_l.game"), parse_prices("0.6,0.4,0.3,0.3"))
    assert report.is_pne and report.outcome.chosen == {0, 1}


def test_xos_supremum_not_attained(bundled):
    game = bundled("xos_no_equal_utility.game")
    prices = (F(7, 6), F(1, 6), F(1, 6))
    r = best_response(game, prices, 0)
    assert r.current_utility == F(7, 6)
    assert r.sup_utility == F(4, 3) and not r.sup_attained
    assert r.witness_price == F(5, 4)
    assert r.gain == F(1, 12)
    assert not verify_pne(game, prices).is_pne


def test_budget_disclosure_restricted_pne(bundled):
    report = verify_pne(bundled("budget_disclosure.game"), parse_prices("0.5,0.5,0.25,0.25"))
    assert report.is_pne and report.outcome.chosen == {0, 1}


def test_wrong_length_rejected(bundled):
    with pytest.raises(ValueError):
        verify_pne(bundled("add_222.game"), parse_prices("1,1"))


def test_critical_prices_contents(bundled):
    game = bundled("x_neq_l.game")
    prices = parse_prices("0.9,0.1,0.9")
    cps = critical_prices(game, prices, 0)
    assert cps.vendor == 0
    bps = set(cps.breakpoints)
    assert {F(0), F(9, 10)} <= bps
    # budget edges B - p(S - 0) for bundles with item 0
    assert {F(1), F(9, 10), F(1, 10), F(0)} <= bps
    assert list(cps.breakpoints) == sorted(bps)


# properties --------------------------------------------------------------------

@given(game_and_prices(max_n=4), st.data())
@settings(max_examples=150, deadline=None)
def test_price_line_matches_demand(gp, data):
    game, prices = gp
    i = data.draw(st.integers(0, game.n - 1))
    line = _PriceLine(game, prices, i)
    xs = [data.draw(rationals(max_num=30, dens=(1, 2, 3, 5, 8))) for _ in range(6)]
    xs += list(line.breakpoints(prices[i]))
    for x in xs:
        assert line.sold(x) == (i in demand(game, _with(prices, i, x)).chosen)


@given(game_and_prices(max_n=4))
@settings(max_examples=150, deadline=None)
def test_witness_really_improves(gp):
    game, prices = gp
    for r in verify_pne(game, prices).per_vendor:
        assert r.current_utility == _payment(game, prices, r.vendor, prices[r.vendor])
        assert r.sup_utility >= r.current_utility
        if r.can_improve:
            assert _payment(game, prices, r.vendor, r.witness_price) == r.witness_price
            assert r.witness_price > r.current_utility
        else:
            assert r.sup_utility == r.current_utility


@given(game_and_prices(max_n=3))
@settings(max_examples=100, deadline=None)
def test_pne_verdict_survives_brute_force(gp):
    """A claimed PNE has no profitable deviation on a fine grid or near any breakpoint."""
    game, prices = gp
    report = verify_pne(game, prices)
    if not report.is_pne:
        return
    for r in report.per_vendor:
        i = r.vendor
        cands = {F(k, 48) * game.budget for k in range(49)}
        for c in critical_prices(game, prices, i).breakpoints:
            cands |= {c, c + F(1, 10**6), c - F(1, 10**6)}
        for x in cands:
            if x >= 0:
                assert _payment(game, prices, i, x) <= r.current_utility


@st.composite
def small_additive(draw):
    n = draw(st.integers(1, 3))
    values = tuple(draw(rationals(max_num=16, dens=(1, 2, 4))) for _ in range(n))
    budget = draw(st.sampled_from([F(1, 2), F(1), F(3, 2)]))
    if sum(values) <= budget:
        values = (values[0] + budget + F(1, 4),) + values[1:]
    return Game(Additive(values), budget)


@given(small_additive())
@settings(max_examples=40, deadline=None)
def test_base_set_inside_every_verified_pne(game):
    L = base_set(game).items
    v = game.valuation.values
    for s in grid_enumerate(game, GridSpec(F(1, 8))):
        if not s.exact_pne:
            continue
        assert L <= s.outcome.chosen
        # market clearing forces the constraint on N
        if is_market_clearing(game, s.prices):
            assert check_constraint(game, game.items, v).holds


@given(games(max_n=3))
@settings(max_examples=40, deadline=None)
def test_zero_prices_deviation_iff_positive_supremum(game):
    zero = (F(0),) * game.n
    report = verify_pne(game, zero)
    for r in report.per_vendor:
        assert r.current_utility == 0
        assert r.can_improve == (r.sup_utility > 0)
