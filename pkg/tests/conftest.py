from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from budgetpne.oracle import coverage_table
from budgetpne.repro import load_bundled_game
from budgetpne.valuations import XOS, Additive, BudgetAdditive, Game

# acceptance tests append (criterion, passed, detail) here
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def bundled():
    return load_bundled_game


# hypothesis strategies ------------------------------------------------------

def rationals(max_num: int = 16, dens=(1, 2, 3, 4, 8)):
    return st.builds(Fraction, st.integers(0, max_num), st.sampled_from(dens))


def positive_rationals(max_num: int = 16, dens=(1, 2, 3, 4, 8)):
    return st.builds(Fraction, st.integers(1, max_num), st.sampled_from(dens))


@st.composite
def additive_valuations(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    return Additive(tuple(draw(rationals()) for _ in range(n)))


@st.composite
def budget_additive_valuations(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    values = tuple(draw(rationals()) for _ in range(n))
    return BudgetAdditive(draw(rationals(max_num=40)), values)


@st.composite
def xos_valuations(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    k = draw(st.integers(1, 3))
    return XOS(tuple(tuple(draw(rationals()) for _ in range(n)) for _ in range(k)))


@st.composite
def coverage_valuations(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    universe = draw(st.integers(1, 6))
    covers = [frozenset(draw(st.sets(st.integers(0, universe - 1), max_size=universe)))
              for _ in range(n)]
    weights = [draw(rationals()) for _ in range(universe)]
    return coverage_table(covers, weights)


def valuations(min_n=1, max_n=5):
    return st.one_of(
        additive_valuations(min_n, max_n),
        budget_additive_valuations(min_n, max_n),
        xos_valuations(min_n, max_n),
        coverage_valuations(min_n, max_n),
    )


@st.composite
def games(draw, kinds=None, min_n=1, max_n=5):
    val = draw(kinds if kinds is not None else valuations(min_n, max_n))
    return Game(val, draw(positive_rationals(max_num=24)))


@st.composite
def game_and_prices(draw, kinds=None, min_n=1, max_n=5):
    game = draw(games(kinds, min_n, max_n))
    prices = tuple(draw(rationals(max_num=12)) for _ in range(game.n))
    return game, prices
