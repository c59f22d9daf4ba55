"""Replay the bundled worked examples and compare against expected values.

Each case names a game (or a welfare family size) and a list of checks.  A
check runs one operation, turns its result into plain JSON values, and
compares the keys listed under ``expect``.  A check may also carry the
``published`` value where the exact computation disagrees with it; such a
case passes as ``confirmed-with-paper-discrepancy`` instead of ``confirmed``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any

from .demand import as_prices, buyer_utility, demand, vendor_utilities
from .equilibrium import (
    base_set,
    bnl_prices,
    check_constraint,
    equal_utility_prices,
    is_market_clearing,
)
from .gamefile import game_from_dict, jsonable
from .oracle import GridSpec, grid_enumerate
from .valuations import Game, item_marginals, marginal, set_marginals, validate, value
from .verifier import best_response, verify_pne
from .welfare import family_game, family_prices, social_welfare

CONFIRMED = "confirmed"
DISCREPANCY = "confirmed-with-paper-discrepancy"
FAILED = "failed"


@dataclass
class CheckResult:
    action: str
    basis: str
    ok: bool
    computed: dict
    expected: dict
    published: dict | None = None
    mismatches: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def discrepancy(self) -> bool:
        """The published value disagrees with what was computed."""
        if not self.published:
            return False
        return any(_norm(self.computed.get(k)) != _norm(v) for k, v in self.published.items())


@dataclass
class ReproCase:
    id: str
    title: str
    game: Game
    checks: list[CheckResult]

    @property
    def status(self) -> str:
        if not all(c.ok for c in self.checks):
            return FAILED
        if any(c.discrepancy for c in self.checks):
            return DISCREPANCY
        return CONFIRMED


def _norm(x: Any) -> Any:
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return x
    if isinstance(x, (list, tuple)):
        return [_norm(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _norm(v) for k, v in x.items()}
    return x


def _weights(game: Game, spec: Any, items: list[int]):
    if spec == "values":
        return game.valuation.values  # type: ignore[attr-defined]
    if spec == "marginals":
        return item_marginals(game.valuation)
    if spec == "set-marginals":
        return set_marginals(game.valuation, items)
    return as_prices(spec)


def _grid(game: Game, step: str) -> dict:
    survivors = [s for s in grid_enumerate(game, GridSpec(step)) if s.exact_pne]
    exact = [list(s.prices) for s in survivors]
    fixed = {}
    for i in game.items:
        seen = {p[i] for p in exact}
        if len(seen) == 1:
            fixed[str(i)] = seen.pop()
    unpaid = [i for i in game.items
              if all(i not in s.outcome.positively_priced for s in survivors)]
    return {"count_exact": len(exact), "exact": exact, "fixed": fixed, "unpaid": unpaid}


def _family(n: int) -> dict:
    game = family_game(n)
    worst, best = family_prices(n)
    rw, rb = verify_pne(game, worst), verify_pne(game, best)
    ww = social_welfare(game, worst).welfare
    wb = social_welfare(game, best).welfare
    return {
        "worst_pne": rw.is_pne,
        "best_pne": rb.is_pne,
        "best_deviators": list(rb.deviators),
        "worst_welfare": ww,
        "best_welfare": wb,
        "ratio": wb / ww,
    }


def run_check(game: Game, check: dict) -> dict:
    """Run one check's operation and return its result as a flat dict."""
    action = check["action"]
    prices = as_prices(check["prices"], game.n) if "prices" in check else None
    if action == "value":
        return {"value": value(game.valuation, check["set"])}
    if action == "marginal":
        return {"value": marginal(game.valuation, check["T"], check["S"])}
    if action == "marginals":
        m = item_marginals(game.valuation)
        return {"values": m, "sum": sum(m)}
    if action == "validate":
        r = validate(game.valuation)
        return {"ok": r.ok, "monotone": r.monotone, "submodular": r.submodular}
    if action == "utility":
        u = buyer_utility(game, check["set"], prices)
        return {"buyer_utility": "infeasible" if u is None else u}
    if action == "demand":
        out = demand(game, prices)
        res = jsonable(out)
        res["vendor_utilities"] = vendor_utilities(out, prices)
        return res
    if action == "constraint":
        r = check_constraint(game, check["set"], _weights(game, check["weights"], check["set"]))
        return {"holds": r.holds, "failing": list(r.failing), "thresholds": r.thresholds,
                "weights": r.weights}
    if action == "prices":
        p = equal_utility_prices(game, check["set"], _weights(game, check["weights"], check["set"]))
        return {"prices": p, "sum": sum(p)}
    if action == "base_set":
        L = base_set(game)
        return {"items": sorted(L.items), "stop_witness": L.stop_witness}
    if action == "bnl_prices":
        p = bnl_prices(game)
        return {"prices": p, "sum": sum(p), "within_budget": sum(p) <= game.budget}
    if action == "market_clearing":
        return {"market_clearing": is_market_clearing(game, prices)}
    if action == "verify":
        r = verify_pne(game, prices)
        return {"is_pne": r.is_pne, "chosen": sorted(r.outcome.chosen),
                "positively_priced": sorted(r.outcome.positively_priced),
                "deviators": list(r.deviators)}
    if action == "best_response":
        r = best_response(game, prices, check["vendor"])
        return {"sup_utility": r.sup_utility, "sup_attained": r.sup_attained,
                "current_utility": r.current_utility, "can_improve": r.can_improve,
                "witness_price": r.witness_price}
    if action == "grid":
        return _grid(game, check["step"])
    if action == "welfare":
        return jsonable(social_welfare(game, prices))
    if action == "family":
        return _family(check.get("n", game.n))
    raise ValueError(f"unknown check action {action!r}")


def _compare(computed: dict, expected: dict) -> list[str]:
    problems = []
    for key, want in expected.items():
        if key == "contains":
            have = _norm(computed.get("exact", []))
            for vec in want:
                if _norm(vec) not in have:
                    problems.append(f"exact survivors lack {vec}")
            continue
        got = _norm(jsonable(computed.get(key)))
        if key in computed and isinstance(want, dict) and isinstance(got, dict):
            # partial match on mappings such as per-item thresholds
            for k, v in want.items():
                if got.get(str(k)) != _norm(v):
                    problems.append(f"{key}[{k}]: expected {v}, got {jsonable(computed[key]).get(str(k))}")
            continue
        if got != _norm(want):
            problems.append(f"{key}: expected {want}, got {jsonable(computed.get(key))}")
    return problems


def load_cases() -> list[dict]:
    text = resources.files("budgetpne").joinpath("data/repro_cases.json").read_text()
    return json.loads(text)["cases"]


def load_bundled_game(name: str) -> Game:
    text = resources.files("budgetpne").joinpath(f"data/games/{name}").read_text()
    return game_from_dict(json.loads(text))


def run_case(spec: dict) -> ReproCase:
    if "family" in spec:
        game = family_game(spec["family"]["n"])
    else:
        game = load_bundled_game(spec["game"])
    results = []
    for check in spec["checks"]:
        expected = check["expect"]
        try:
            computed = run_check(game, check)
            mismatches = _compare(computed, expected)
            error = None
        except Exception as exc:  # a crash is a failed check, not a crashed run
            computed, mismatches, error = {}, [], f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(
            action=check["action"],
            basis=check.get("basis", "derived"),
            ok=error is None and not mismatches,
            computed=jsonable(computed),
            expected=expected,
            published=check.get("published"),
            mismatches=mismatches,
            error=error,
        ))
    return ReproCase(spec["id"], spec.get("title", ""), game, results)


def run_repro(case_id: str | None = None) -> list[ReproCase]:
    specs = load_cases()
    if case_id is not None:
        specs = [s for s in specs if case_id == s["id"] or case_id in s.get("aliases", ())]
        if not specs:
            raise KeyError(case_id)
    return [run_case(s) for s in specs]


def case_ids() -> list[str]:
    return [s["id"] for s in load_cases()]
