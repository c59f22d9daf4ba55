"""JSON game files and JSON-ready report conversion.

A game file looks like::

    {"n": 3, "budget": "1",
     "valuation": {"kind": "additive", "values": ["2", "2", "2"]}}

``kind`` is one of ``additive``, ``budget_additive`` (adds ``cap``),
``table`` (``table`` holds all 2**n values in bitmask order, optional
``declared``) or ``xos`` (``clauses``).  Numbers are decimal or ``p/q``
strings and are read exactly.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .valuations import (
    DEFAULT_MAX_ITEMS,
    SUBMODULAR,
    XOS,
    Additive,
    BudgetAdditive,
    Game,
    Table,
    Valuation,
    to_rational,
)

KINDS = ("additive", "budget_additive", "table", "xos")


class GameFileError(ValueError):
    """Malformed game document; ``field`` names the offending entry."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


def format_rational(x: Fraction) -> str:
    """Exact decimal when the value terminates, else ``p/q``."""
    x = Fraction(x)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    if x.denominator == 1:
        return str(x.numerator)
    digits = max(twos, fives)
    scaled = abs(x.numerator) * 10**digits // x.denominator
    sign = "-" if x < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")


def _rationals(doc: dict, key: str, where: str) -> list[Fraction]:
    raw = doc.get(key)
    if not isinstance(raw, list):
        raise GameFileError(f"{where}.{key}", "expected an array of numbers")
    out = []
    for k, x in enumerate(raw):
        out.append(_rational(x, f"{where}.{key}[{k}]"))
    return out


def _rational(x: Any, field: str) -> Fraction:
    if isinstance(x, float):
        raise GameFileError(field, "write numbers as strings so they stay exact")
    try:
        return to_rational(x)
    except (TypeError, ValueError) as exc:
        raise GameFileError(field, str(exc)) from None


def game_from_dict(doc: dict, max_items: int = DEFAULT_MAX_ITEMS) -> Game:
    if not isinstance(doc, dict):
        raise GameFileError("<root>", "expected an object")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise GameFileError("n", "expected a positive integer")
    if n > max_items:
        raise GameFileError("n", f"{n} items exceeds the cap of {max_items}")
    if "budget" not in doc:
        raise GameFileError("budget", "missing")
    budget = _rational(doc["budget"], "budget")
    val = doc.get("valuation")
    if not isinstance(val, dict):
        raise GameFileError("valuation", "expected an object")
    kind = val.get("kind")
    if kind not in KINDS:
        raise GameFileError("valuation.kind", f"expected one of {KINDS}, got {kind!r}")

    valuation: Valuation
    if kind == "additive":
        valuation = Additive(tuple(_rationals(val, "values", "valuation")))
    elif kind == "budget_additive":
        valuation = BudgetAdditive(_rational(val.get("cap"), "valuation.cap"),
                                   tuple(_rationals(val, "values", "valuation")))
    elif kind == "table":
        table = _rationals(val, "table", "valuation")
        if len(table) != 1 << n:
            raise GameFileError("valuation.table", f"expected {1 << n} entries, got {len(table)}")
        try:
            valuation = Table(tuple(table), val.get("declared", SUBMODULAR))
        except ValueError as exc:
            raise GameFileError("valuation.declared", str(exc)) from None
    else:
        clauses = val.get("clauses")
        if not isinstance(clauses, list) or not clauses:
            raise GameFileError("valuation.clauses", "expected a non-empty array of arrays")
        rows = []
        for k, c in enumerate(clauses):
            if not isinstance(c, list):
                raise GameFileError(f"valuation.clauses[{k}]", "expected an array")
            rows.append(tuple(_rational(x, f"valuation.clauses[{k}][{j}]") for j, x in enumerate(c)))
        valuation = XOS(tuple(rows))

    if valuation.n != n:
        raise GameFileError("n", f"declares {n} items but the valuation has {valuation.n}")
    try:
        return Game(valuation, budget, max_items=max_items)
    except ValueError as exc:
        raise GameFileError("valuation" if budget > 0 else "budget", str(exc)) from None


def game_to_dict(game: Game) -> dict:
    v = game.valuation
    fmt = format_rational
    if isinstance(v, Additive):
        val = {"kind": "additive", "values": [fmt(x) for x in v.values]}
    elif isinstance(v, BudgetAdditive):
        val = {"kind": "budget_additive", "cap": fmt(v.cap), "values": [fmt(x) for x in v.values]}
    elif isinstance(v, Table):
        val = {"kind": "table", "declared": v.declared, "table": [fmt(x) for x in v.values]}
    elif isinstance(v, XOS):
        val = {"kind": "xos", "clauses": [[fmt(x) for x in c] for c in v.clauses]}
    else:
        raise TypeError(type(v).__name__)
    return {"n": game.n, "budget": fmt(game.budget), "valuation": val}


def load_game(path: str | Path, max_items: int = DEFAULT_MAX_ITEMS) -> Game:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GameFileError("<root>", f"not valid JSON ({exc})") from None
    return game_from_dict(doc, max_items)


def dump_game(game: Game) -> str:
    return json.dumps(game_to_dict(game), indent=2)


def jsonable(obj: Any) -> Any:
    """Recursively convert reports to JSON types (Fractions become strings)."""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(x) for x in obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for name in ("is_pne", "holds", "ratio", "gain", "deviators", "failing", "tie_broken"):
            if hasattr(type(obj), name) and isinstance(getattr(type(obj), name), property):
                out[name] = jsonable(getattr(obj, name))
        return out
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")
