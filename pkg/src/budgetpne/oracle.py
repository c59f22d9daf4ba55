"""Brute-force cross-checks: a second demand, a price-grid equilibrium
search, and seeded random games for fuzzing."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .demand import DemandOutcome, PriceVector, demand
from .equilibrium import constraint_thresholds
from .valuations import (
    XOS,
    Additive,
    BudgetAdditive,
    Game,
    Table,
    Valuation,
    item_marginals,
    to_rational,
)
from .verifier import VerifyReport, verify_pne


def _direct_value(valuation: Valuation, items: tuple[int, ...]) -> Fraction:
    # straight from each kind's definition, bypassing the cached table
    if isinstance(valuation, Additive):
        return sum((valuation.values[i] for i in items), Fraction(0))
    if isinstance(valuation, BudgetAdditive):
        return min(valuation.cap, sum((valuation.values[i] for i in items), Fraction(0)))
    if isinstance(valuation, XOS):
        return max(sum((c[i] for i in items), Fraction(0)) for c in valuation.clauses)
    if isinstance(valuation, Table):
        return valuation.values[sum(1 << i for i in items)]
    raise TypeError(type(valuation).__name__)


def oracle_demand(game: Game, prices: Sequence[Fraction]) -> DemandOutcome:
    """Reference demand: enumerate bundles by size, keep every optimum."""
    n, B = game.n, game.budget
    feasible = []
    for size in range(n + 1):
        for items in itertools.combinations(range(n), size):
            cost = sum((prices[i] for i in items), Fraction(0))
            if cost <= B:
                feasible.append((items, cost, _direct_value(game.valuation, items) - cost))
    top = max(u for _, _, u in feasible)
    optima = [(items, cost) for items, cost, u in feasible if u == top]
    biggest = max(len(items) for items, _ in optima)
    largest = [(items, cost) for items, cost in optima if len(items) == biggest]
    items, cost = min(largest, key=lambda ic: sum(2**i for i in ic[0]))
    return DemandOutcome(
        chosen=frozenset(items),
        cost=cost,
        buyer_utility=top,
        positively_priced=frozenset(i for i in items if prices[i] != 0),
        num_optima=len(optima),
        num_max_size_optima=len(largest),
    )


class EvaluationBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Prices ``0, step, ..., ceil(B/step)*step`` per vendor."""

    step: Fraction
    epsilon: Fraction = Fraction(0)
    max_evals: int = 10**7

    def __post_init__(self):
        object.__setattr__(self, "step", to_rational(self.step))
        object.__setattr__(self, "epsilon", to_rational(self.epsilon))
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    def points(self, budget: Fraction) -> int:
        return math.ceil(budget / self.step) + 1


def default_grid(game: Game) -> GridSpec:
    return GridSpec(Fraction(1, 24) if game.n <= 3 else Fraction(1, 8))


@dataclass(frozen=True)
class GridSurvivor:
    prices: PriceVector
    outcome: DemandOutcome
    exact_pne: bool
    report: VerifyReport


def _lcm_denominators(values) -> int:
    d = 1
    for x in values:
        d = d * x.denominator // math.gcd(d, x.denominator)
    return d


_CHUNK = 1 << 16


def _grid_choices(game: Game, grid: GridSpec, points: int) -> np.ndarray:
    """Chosen-bundle bitmask at every grid point, shape ``(points,) * n``."""
    n = game.n
    table = game.valuation.table
    scale = _lcm_denominators([*table, game.budget, grid.step])
    vals = [int(v * scale) for v in table]
    budget = int(game.budget * scale)
    step = int(grid.step * scale)
    bound = (max(map(abs, vals)) + n * points * step + budget) * 4
    dtype = np.int64 if bound < 2**62 else object

    masks = np.arange(1 << n)
    members = ((masks[None, :] >> np.arange(n)[:, None]) & 1).astype(dtype)
    sizes = members.sum(axis=0).astype(np.int64)
    # prefer larger bundles, then smaller bitmasks
    tiebreak = sizes * (1 << n) + ((1 << n) - 1 - masks)
    vals_arr = np.array(vals, dtype=dtype)

    total = points**n
    out = np.empty(total, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        idx = np.stack(np.unravel_index(flat, (points,) * n), axis=1).astype(dtype)
        cost = (idx @ members) * step
        feasible = cost <= budget
        util = vals_arr[None, :] - cost
        floor = util.min() - 1
        util = np.where(feasible, util, floor)
        best = util.max(axis=1)
        score = np.where(util == best[:, None], tiebreak[None, :], -1)
        out[start:start + len(flat)] = masks[np.argmax(score, axis=1)]
    return out.reshape((points,) * n)


def grid_enumerate(game: Game, grid: GridSpec | None = None) -> list[GridSurvivor]:
    """On-grid epsilon-equilibria, each re-checked exactly.

    A grid point survives when no vendor has an on-grid price that raises
    its payment by more than ``epsilon``.  Survivors come back in
    lexicographic price order with an exact verdict from :func:`verify_pne`.
    """
    grid = grid or default_grid(game)
    n = game.n
    points = grid.points(game.budget)
    if points**n > grid.max_evals:
        raise EvaluationBudgetExceeded(
            f"{points}^{n} = {points**n} grid points exceeds max_evals={grid.max_evals}"
        )
    chosen = _grid_choices(game, grid, points)
    ok = np.ones(chosen.shape, dtype=bool)
    # payments in units of the step; epsilon compared in the same units
    eps_steps = grid.epsilon / grid.step
    ticks = np.arange(points)
    for i in range(n):
        shape = [1] * n
        shape[i] = points
        pay = np.where((chosen >> i) & 1, ticks.reshape(shape), 0)
        best = pay.max(axis=i, keepdims=True)
        # pay + eps >= best, cleared of the fraction's denominator
        ok &= (pay - best) * eps_steps.denominator + eps_steps.numerator >= 0

    survivors = []
    for idx in np.argwhere(ok):
        prices = tuple(int(k) * grid.step for k in idx)
        report = verify_pne(game, prices)
        assert report.outcome.chosen_mask == int(chosen[tuple(idx)])
        survivors.append(GridSurvivor(prices, report.outcome, report.is_pne, report))
    return survivors


class GenerationFailed(RuntimeError):
    pass


BUDGET_RULES = ("below-total", "constraint-holds", "constraint-fails")
CLASSES = ("additive", "submodular-coverage", "xos", "budget-additive")


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    cls: str = "additive"
    value_range: tuple[Fraction, Fraction] = (Fraction(1, 8), Fraction(2))
    budget_rule: str = "below-total"
    seed: int = 0
    denominator: int = 8
    budget_max: Fraction | None = None
    universe: int | None = None
    clauses: int | None = None
    max_attempts: int = 10_000

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}; choose from {CLASSES}")
        if self.budget_rule not in BUDGET_RULES:
            raise ValueError(f"unknown budget rule {self.budget_rule!r}; choose from {BUDGET_RULES}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        lo, hi = (to_rational(x) for x in self.value_range)
        if not 0 <= lo <= hi:
            raise ValueError(f"bad value range {self.value_range}")
        object.__setattr__(self, "value_range", (lo, hi))
        if self.budget_max is not None:
            object.__setattr__(self, "budget_max", to_rational(self.budget_max))


def _draw(rng: random.Random, lo: Fraction, hi: Fraction, den: int) -> Fraction:
    return Fraction(rng.randint(math.ceil(lo * den), math.floor(hi * den)), den)


def coverage_table(item_covers: Sequence[frozenset[int]], weights: Sequence[Fraction]) -> Table:
    """``v(S)`` = total weight of the universe elements covered by ``S``."""
    n = len(item_covers)
    values = []
    for m in range(1 << n):
        covered = set()
        for i in range(n):
            if m >> i & 1:
                covered |= item_covers[i]
        values.append(sum((weights[e] for e in covered), Fraction(0)))
    return Table(tuple(values), "submodular")


def _valuation(spec: GeneratorSpec, rng: random.Random) -> Valuation:
    lo, hi = spec.value_range
    den, n = spec.denominator, spec.n
    if spec.cls == "additive":
        return Additive(tuple(_draw(rng, lo, hi, den) for _ in range(n)))
    if spec.cls == "budget-additive":
        values = tuple(_draw(rng, lo, hi, den) for _ in range(n))
        cap = _draw(rng, max(values), sum(values), den)
        return BudgetAdditive(cap, values)
    if spec.cls == "xos":
        k = spec.clauses or rng.randint(2, 3)
        return XOS(tuple(tuple(_draw(rng, Fraction(0), hi, den) for _ in range(n)) for _ in range(k)))
    # one private element per item keeps every marginal positive
    shared = spec.universe if spec.universe is not None else n
    weights = [_draw(rng, lo, hi, den) for _ in range(n + shared)]
    covers = []
    for i in range(n):
        covers.append(frozenset([i]) | {n + e for e in range(shared) if rng.random() < 0.35})
    return coverage_table(covers, weights)


def generate(spec: GeneratorSpec) -> Game:
    """Seeded random game under the requested budget rule.

    Budgets are multiples of ``1/denominator`` strictly below ``v(N)``
    (and at most ``budget_max``).  Coverage games give each item a private
    universe element plus a random share of ``universe`` common elements.
    The constraint rules use the marginals ``v(N) - v(N-i)`` as weights and
    resample until the relative valuation constraint on ``N`` holds (with
    the weights summing past the budget) or fails.
    """
    rng = random.Random(spec.seed)
    den = spec.denominator
    for _ in range(spec.max_attempts):
        valuation = _valuation(spec, rng)
        total = valuation.value(range(spec.n))
        top = math.ceil(total * den) - 1
        if spec.budget_max is not None:
            top = min(top, math.floor(spec.budget_max * den))
        if top < 1:
            continue
        budget = Fraction(rng.randint(1, top), den)
        if spec.budget_rule != "below-total":
            weights = item_marginals(valuation)
            holds = all(constraint_thresholds(weights, budget)[1])
            if spec.budget_rule == "constraint-fails" and holds:
                continue
            if spec.budget_rule == "constraint-holds" and not (holds and sum(weights) > budget):
                continue
        return Game(valuation, budget)
    raise GenerationFailed(f"no game matching {spec} after {spec.max_attempts} attempts")
