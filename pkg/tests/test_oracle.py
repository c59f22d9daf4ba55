from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings

from budgetpne.demand import demand, parse_prices
from budgetpne.equilibrium import check_constraint, equal_utility_prices
from budgetpne.oracle import (
    BUDGET_RULES,
    CLASSES,
    EvaluationBudgetExceeded,
    GenerationFailed,
    GeneratorSpec,
    GridSpec,
    default_grid,
    generate,
    grid_enumerate,
    oracle_demand,
)
from budgetpne.valuations import Additive, Game, item_marginals, validate
from budgetpne.verifier import verify_pne

from conftest import game_and_prices

F = Fraction


@given(game_and_prices(max_n=5))
@settings(max_examples=200, deadline=None)
def test_oracle_matches_demand(gp):
    game, prices = gp
    assert oracle_demand(game, prices) == demand(game, prices)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(0)
    with pytest.raises(ValueError):
        GridSpec(F(1, 4), epsilon=F(-1))
    assert GridSpec("1/4").points(F(1)) == 5
    assert GridSpec("1/3").points(F(1, 2)) == 3


def test_default_grid_by_size(bundled):
    assert default_grid(bundled("add_222.game")).step == F(1, 24)
    assert default_grid(bundled("pne_not_l.game")).step == F(1, 8)


def test_budget_grab_grid(bundled):
    game = bundled("budget_grab.game")
    survivors = grid_enumerate(game, GridSpec("1/4"))
    assert all(s.exact_pne for s in survivors)
    assert {s.prices[0] for s in survivors} == {1}
    assert {s.prices[1] for s in survivors} == {F(k, 4) for k in range(5)}
    assert all(s.outcome.positively_priced == {0} for s in survivors)


def test_single_vendor_takes_the_budget():
    game = Game(Additive(("5",)), 1)
    assert [(s.prices, s.exact_pne) for s in grid_enumerate(game, GridSpec("1/2"))] == [((F(1),), True)]


def test_survivors_sorted_and_consistent(bundled):
    game = bundled("x_neq_l.game")
    survivors = grid_enumerate(game, GridSpec("1/10"))
    assert [s.prices for s in survivors] == sorted(s.prices for s in survivors)
    for s in survivors:
        assert s.exact_pne == verify_pne(game, s.prices).is_pne
        assert s.outcome == demand(game, s.prices)
    assert parse_prices("0.9,0.1,0.9") in {s.prices for s in survivors if s.exact_pne}


def test_epsilon_widens_the_filter(bundled):
    game = bundled("add_222.game")
    strict = grid_enumerate(game, GridSpec("1/6"))
    loose = grid_enumerate(game, GridSpec("1/6", epsilon="1/6"))
    assert {s.prices for s in strict} <= {s.prices for s in loose}
    assert len(loose) > len(strict)


def test_equal_utility_prices_found_on_grid(bundled):
    game = bundled("add_222.game")
    target = equal_utility_prices(game, range(3))
    exact = {s.prices for s in grid_enumerate(game, GridSpec("1/24")) if s.exact_pne}
    assert target in exact


def test_grid_handles_huge_denominators():
    # forces the object-dtype path; results must match the exact demand
    big = 10**19 + 1
    game = Game(Additive((F(3 * big + 1, big), F(1, 1))), F(2))
    survivors = grid_enumerate(game, GridSpec(F(1, 2)))
    for s in survivors:
        assert s.outcome == demand(game, s.prices)


def test_max_evals_guard(bundled):
    with pytest.raises(EvaluationBudgetExceeded):
        grid_enumerate(bundled("pne_not_l.game"), GridSpec("1/100", max_evals=1000))


# generators --------------------------------------------------------------------

@pytest.mark.parametrize("cls", CLASSES)
@pytest.mark.parametrize("rule", BUDGET_RULES)
def test_generators_honour_rules(cls, rule):
    for seed in range(15):
        n = 2 + seed % 3
        spec = GeneratorSpec(n, cls, budget_rule=rule, seed=seed, budget_max=F(2))
        game = generate(spec)
        assert game == generate(spec)
        assert game.n == n and validate(game.valuation).ok
        assert 0 < game.budget < game.valuation.value(game.items)
        assert game.budget <= 2
        if rule == "below-total":
            continue
        w = item_marginals(game.valuation)
        holds = check_constraint(game, game.items, w).holds
        if rule == "constraint-holds":
            assert holds and sum(w) > game.budget
        else:
            assert not holds


def test_coverage_tables_declared_and_valid():
    for seed in range(30):
        game = generate(GeneratorSpec(4, "submodular-coverage", seed=seed))
        report = validate(game.valuation)
        assert report.submodularity_checked and report.ok


def test_seeds_differ():
    games = {generate(GeneratorSpec(3, seed=s)) for s in range(10)}
    assert len(games) > 1


def test_generator_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(3, "supermodular")
    with pytest.raises(ValueError):
        GeneratorSpec(3, budget_rule="any")
    with pytest.raises(ValueError):
        GeneratorSpec(0)


def test_impossible_request_fails():
    # a single item always satisfies the constraint
    with pytest.raises(GenerationFailed):
        generate(GeneratorSpec(1, budget_rule="constraint-fails", max_attempts=50))
