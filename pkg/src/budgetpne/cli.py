"""Command-line front end.

Exit codes: 0 on success or a positive verdict, 1 on a negative verdict
(not a PNE, constraint fails, failed repro case), 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

from .demand import demand, parse_prices, vendor_utilities
from .equilibrium import (
    ConstraintViolation,
    base_set,
    base_set_prices,
    bnl_prices,
    check_constraint,
    equal_utility_prices,
    is_market_clearing,
)
from .gamefile import GameFileError, format_rational, game_from_dict, game_to_dict, jsonable, load_game
from .oracle import (
    BUDGET_RULES,
    CLASSES,
    EvaluationBudgetExceeded,
    GenerationFailed,
    GeneratorSpec,
    GridSpec,
    default_grid,
    generate,
    grid_enumerate,
)
from .valuations import DEFAULT_MAX_ITEMS, Game, InvalidGame, format_set, item_marginals, validate
from .verifier import verify_pne
from .welfare import NoEquilibrium, equilibrium_ratio, family_prices, poa_family, social_welfare

OK, NEGATIVE, INPUT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return format_rational(x)


def _vec(xs: Sequence[Fraction]) -> str:
    return "(" + ", ".join(_fmt(x) for x in xs) + ")"


def _emit(args, doc, text: str) -> None:
    if args.format == "json":
        print(json.dumps(jsonable(doc), indent=2, sort_keys=True))
    else:
        print(text)


def _load(args) -> Game:
    if args.game is None:
        raise UsageError("--game is required")
    path = Path(args.game)
    if not path.exists():
        # fall back to the bundled example games
        bundled = resources.files("budgetpne").joinpath("data/games", args.game)
        if not bundled.is_file():
            raise UsageError(f"game file not found: {args.game}")
        return game_from_dict(json.loads(bundled.read_text()), args.max_items)
    return load_game(path, args.max_items)


def _prices(args, game: Game):
    if args.prices is None:
        raise UsageError("--prices is required")
    return parse_prices(args.prices, game.n)


def _item_set(args, game: Game) -> tuple[int, ...]:
    if not args.set:
        return tuple(game.items)
    items = tuple(sorted({int(t) for t in args.set.split(",") if t.strip()}))
    bad = [i for i in items if not 0 <= i < game.n]
    if bad:
        raise UsageError(f"items {bad} are outside 0..{game.n - 1}")
    return items


def _weights(args, game: Game):
    if args.weights == "values":
        values = getattr(game.valuation, "values", None)
        if values is None or game.valuation.kind != "additive":
            raise UsageError("--weights values needs an additive game")
        return values
    return item_marginals(game.valuation)


# subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        game = _load(args)
    except GameFileError as exc:
        if exc.field != "valuation":
            raise
        _emit(args, {"ok": False, "problem": exc.reason}, f"invalid: {exc.reason}")
        return NEGATIVE
    report = validate(game.valuation)
    text = [f"{report.kind} valuation on {game.n} items, budget {_fmt(game.budget)}: "
            f"{'ok' if report.ok else 'invalid'}"]
    text.append(f"  monotone: {report.monotone}")
    if report.submodularity_checked:
        text.append(f"  submodular: {report.submodular}")
    text += [f"  {p}" for p in report.problems()]
    doc = jsonable(report)
    doc["ok"] = report.ok
    _emit(args, doc, "\n".join(text))
    return OK if report.ok else NEGATIVE


def cmd_demand(args) -> int:
    game = _load(args)
    prices = _prices(args, game)
    out = demand(game, prices)
    utils = vendor_utilities(out, prices)
    text = (f"chosen {format_set(out.chosen)} cost {_fmt(out.cost)} "
            f"buyer utility {_fmt(out.buyer_utility)}\n"
            f"vendor utilities {_vec(utils)}")
    if out.tie_broken:
        text += f"\n{out.num_optima} optimal bundles, {out.num_max_size_optima} of maximum size"
    doc = jsonable(out)
    doc["vendor_utilities"] = jsonable(utils)
    _emit(args, doc, text)
    return OK


def cmd_constraint(args) -> int:
    game = _load(args)
    report = check_constraint(game, _item_set(args, game), _weights(args, game))
    lines = [f"constraint on {format_set(report.items)}: {'holds' if report.holds else 'fails'}"]
    for i in report.items:
        t = report.thresholds[i]
        rhs = "> 0" if t is None else f"> {_fmt(t)}"
        mark = "ok" if report.holds_per_item[i] else "FAILS"
        lines.append(f"  item {i}: weight {_fmt(report.weights[i])} {rhs}  {mark}")
    _emit(args, report, "\n".join(lines))
    return OK if report.holds else NEGATIVE


def cmd_prices(args) -> int:
    game = _load(args)
    items = _item_set(args, game)
    weights = _weights(args, game)
    try:
        prices = equal_utility_prices(game, items, weights)
    except ConstraintViolation as exc:
        hint = ""
        if sum(weights[i] for i in items) <= game.budget:
            hint = "; the weights fit within the budget, see bnl-prices"
        _emit(args, {"error": str(exc), "item": exc.item, "threshold": exc.threshold},
              f"no equal-utility prices: {exc}{hint}")
        return NEGATIVE
    _emit(args, {"prices": prices, "sum": sum(prices)}, _vec(prices))
    return OK


def cmd_base_set(args) -> int:
    game = _load(args)
    try:
        L = base_set(game)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    prices = base_set_prices(game)
    text = f"L = {format_set(L.items)}\nprices {_vec(prices)}"
    if L.stop_witness:
        i, t = L.stop_witness
        text += f"\nstopped at item {i}: value {_fmt(game.valuation.values[i])} <= {_fmt(t)}"
    _emit(args, {"base_set": L, "prices": prices}, text)
    return OK


def cmd_bnl_prices(args) -> int:
    game = _load(args)
    prices = bnl_prices(game)
    total = sum(prices)
    within = total <= game.budget
    text = f"{_vec(prices)} sum {_fmt(total)} ({'within' if within else 'exceeds'} budget {_fmt(game.budget)})"
    _emit(args, {"prices": prices, "sum": total, "within_budget": within}, text)
    return OK


def cmd_verify(args) -> int:
    game = _load(args)
    report = verify_pne(game, _prices(args, game))
    chosen = format_set(report.outcome.chosen)
    if report.is_pne:
        text = f"PNE; chosen {chosen}"
        if is_market_clearing(game, report.prices):
            text += " (market clearing)"
    else:
        lines = [f"not a PNE; chosen {chosen}"]
        for r in report.per_vendor:
            if r.can_improve:
                lines.append(
                    f"  vendor {r.vendor}: earns {_fmt(r.current_utility)}, price "
                    f"{_fmt(r.witness_price)} sells with chosen {format_set(r.witness_outcome.chosen)} "
                    f"(sup {_fmt(r.sup_utility)}{'' if r.sup_attained else ', not attained'})"
                )
        text = "\n".join(lines)
    _emit(args, report, text)
    return OK if report.is_pne else NEGATIVE


def cmd_enumerate(args) -> int:
    game = _load(args)
    base = default_grid(game)
    grid = GridSpec(
        args.grid_step if args.grid_step is not None else base.step,
        args.epsilon,
        args.max_evals,
    )
    survivors = grid_enumerate(game, grid)
    lines = [f"grid step {_fmt(grid.step)}, epsilon {_fmt(grid.epsilon)}: "
             f"{len(survivors)} survivors, {sum(s.exact_pne for s in survivors)} exact PNE"]
    for s in survivors:
        tag = "exact" if s.exact_pne else "grid-only"
        lines.append(f"  {_vec(s.prices)} chosen {format_set(s.outcome.chosen)} {tag}")
    doc = {
        "grid_step": grid.step,
        "epsilon": grid.epsilon,
        "survivors": [
            {"prices": s.prices, "chosen": s.outcome.chosen, "exact_pne": s.exact_pne,
             "deviators": s.report.deviators}
            for s in survivors
        ],
    }
    _emit(args, doc, "\n".join(lines))
    return OK


def cmd_welfare(args) -> int:
    game = _load(args)
    report = social_welfare(game, _prices(args, game))
    text = f"welfare {_fmt(report.welfare)}; chosen {format_set(report.chosen)}"
    if report.excluded_free_items:
        text += f"; free items {format_set(report.excluded_free_items)} excluded"
    _emit(args, report, text)
    return OK


def _read_candidates(path: str, n: int) -> list:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        # one comma-separated vector per line
        return [parse_prices(line, n) for line in text.splitlines() if line.strip()]
    if isinstance(doc, dict):
        doc = doc.get("candidates")
    if not isinstance(doc, list):
        raise UsageError("candidates file must be a JSON array of price arrays")
    return [parse_prices(",".join(map(str, row)), n) for row in doc]


def cmd_ratio(args) -> int:
    game = _load(args)
    if args.candidates is None:
        raise UsageError("--candidates is required")
    try:
        report = equilibrium_ratio(game, _read_candidates(args.candidates, game.n))
    except NoEquilibrium as exc:
        _emit(args, {"error": str(exc)}, str(exc))
        return NEGATIVE
    lines = [f"ratio {_fmt(report.ratio)} (best {_fmt(report.best)}, worst {_fmt(report.worst)})"]
    lines += [f"  PNE {_vec(p)} welfare {_fmt(w)}" for p, w in report.equilibria]
    lines += [f"  rejected {_vec(p)}" for p in report.rejected]
    _emit(args, report, "\n".join(lines))
    return OK


def cmd_family(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    try:
        fam = poa_family(args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    worst, best = family_prices(args.n)
    doc = game_to_dict(fam.game)
    doc["equilibria"] = {"worst": [_fmt(p) for p in worst], "best": [_fmt(p) for p in best]}
    # the game document is always JSON so it can be saved and reloaded
    print(json.dumps(doc, indent=2))
    return OK


def cmd_generate(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    spec = GeneratorSpec(
        n=args.n,
        cls=args.cls,
        budget_rule=args.budget_rule,
        seed=args.seed,
        denominator=args.denominator,
        budget_max=args.budget_max,
    )
    print(json.dumps(game_to_dict(generate(spec)), indent=2))
    return OK


def cmd_repro(args) -> int:
    from .repro import FAILED, run_repro

    try:
        cases = run_repro(args.case)
    except KeyError:
        raise UsageError(f"unknown case {args.case!r}") from None
    failed = [c for c in cases if c.status == FAILED]
    if args.format == "json":
        doc = [{"id": c.id, "status": c.status,
                "checks": [{"action": ch.action, "basis": ch.basis, "ok": ch.ok,
                            "computed": ch.computed, "expected": ch.expected,
                            "published": ch.published, "mismatches": ch.mismatches,
                            "error": ch.error} for ch in c.checks]}
               for c in cases]
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        width = max(len(c.id) for c in cases)
        for c in cases:
            print(f"{c.id:<{width}}  {c.status}  ({len(c.checks)} checks)")
            for ch in c.checks:
                if ch.discrepancy:
                    for key, pub in ch.published.items():
                        print(f"    {ch.action}: {key} computed {ch.computed.get(key)}, published {pub}")
                for m in ch.mismatches:
                    print(f"    FAILED {ch.action}: {m}")
                if ch.error:
                    print(f"    FAILED {ch.action}: {ch.error}")
        print(f"{len(cases)} cases, {len(failed)} failed")
    return NEGATIVE if failed else OK


# parser --------------------------------------------------------------------

def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--game", help="game file (JSON); bundled example names also work")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-items", type=int, default=DEFAULT_MAX_ITEMS)

    parser = argparse.ArgumentParser(prog="budgetpne", description="Budgeted pricing games: demand, equilibria, welfare.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check the valuation's properties")
    p = add("demand", cmd_demand, "buyer's chosen bundle at given prices")
    p.add_argument("--prices", help="comma-separated, e.g. 0.6,0.4,1/3")
    for name, func, help_ in (("constraint", cmd_constraint, "relative valuation constraint on a set"),
                              ("prices", cmd_prices, "equal-utility prices on a set")):
        p = add(name, func, help_)
        p.add_argument("--set", help="comma-separated items (default: all)")
        p.add_argument("--weights", choices=("marginals", "values"), default="marginals")
    add("base-set", cmd_base_set, "greedy base set and its prices (additive)")
    add("bnl-prices", cmd_bnl_prices, "unbudgeted benchmark prices v(N) - v(N-i)")
    p = add("verify", cmd_verify, "exact PNE check")
    p.add_argument("--prices")
    p = add("enumerate", cmd_enumerate, "grid search for epsilon-equilibria, verified exactly")
    p.add_argument("--grid-step", type=_fraction)
    p.add_argument("--epsilon", type=_fraction, default=Fraction(0))
    p.add_argument("--max-evals", type=int, default=10**7)
    p = add("welfare", cmd_welfare, "welfare of the outcome at given prices")
    p.add_argument("--prices")
    p = add("ratio", cmd_ratio, "best/worst welfare over verified candidate equilibria")
    p.add_argument("--candidates", help="JSON array of price arrays, or one vector per line")
    p = add("family", cmd_family, "additive family with a large welfare gap")
    p.add_argument("--n", type=int)
    p = add("generate", cmd_generate, "seeded random game")
    p.add_argument("--n", type=int)
    p.add_argument("--class", dest="cls", choices=CLASSES, default="additive")
    p.add_argument("--budget-rule", choices=BUDGET_RULES, default="below-total")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--denominator", type=int, default=8)
    p.add_argument("--budget-max", type=_fraction)
    p = add("repro", cmd_repro, "replay the bundled worked examples")
    p.add_argument("--case", help="case id or alias")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GameFileError, InvalidGame, EvaluationBudgetExceeded,
            GenerationFailed, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
