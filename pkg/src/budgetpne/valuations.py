"""Buyer valuations over item subsets, evaluated exactly.

Item sets are handled internally as bitmasks (bit ``i`` set means item ``i``
is in the set).  Public helpers accept any iterable of item indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

DEFAULT_MAX_ITEMS = 12

RationalLike = Union[int, str, Fraction]
ItemSet = Iterable[int]


def to_rational(x: RationalLike) -> Fraction:
    """Convert ``x`` to an exact Fraction.

    Strings may be decimals ("1.135") or fractions ("1/3").  Floats are
    refused since they cannot carry the exact values the game needs.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, float):
        raise TypeError(f"float {x!r} is not exact; pass a string or Fraction")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {x!r} as a rational") from exc
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def mask_of(items: ItemSet) -> int:
    mask = 0
    for i in items:
        if i < 0:
            raise ValueError(f"negative item index {i}")
        mask |= 1 << i
    return mask


def items_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def format_set(items: Iterable[int]) -> str:
    return "{" + ",".join(str(i) for i in sorted(items)) + "}"


class Valuation:
    """Common interface: ``n`` items and ``value_mask(mask)``.

    Concrete kinds are frozen dataclasses; the full value table is built
    lazily and cached since demand scans touch every subset.
    """

    n: int
    kind: str

    def _evaluate(self, mask: int) -> Fraction:
        raise NotImplementedError

    @cached_property
    def table(self) -> tuple[Fraction, ...]:
        return tuple(self._evaluate(m) for m in range(1 << self.n))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def value_mask(self, mask: int) -> Fraction:
        if mask < 0 or mask > self.full_mask:
            raise ValueError(f"subset mask {mask} outside {self.n} items")
        return self.table[mask]

    def value(self, items: ItemSet) -> Fraction:
        return self.value_mask(mask_of(items))

    def _check_n(self) -> None:
        if self.n < 1:
            raise ValueError("a valuation needs at least one item")


def _fractions(values: Iterable[RationalLike]) -> tuple[Fraction, ...]:
    return tuple(to_rational(v) for v in values)


@dataclass(frozen=True, eq=True)
class Additive(Valuation):
    values: tuple[Fraction, ...]
    kind: str = field(default="additive", init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _fractions(self.values))

    @property
    def n(self) -> int:  # type: ignore[override]
        return len(self.values)

    def _evaluate(self, mask: int) -> Fraction:
        return sum((self.values[i] for i in items_of(mask)), Fraction(0))


@dataclass(frozen=True, eq=True)
class BudgetAdditive(Valuation):
    """``v(S) = min(cap, sum of item values in S)``."""

    cap: Fraction
    values: tuple[Fraction, ...]
    kind: str = field(default="budget_additive", init=False)

    def __post_init__(self):
        object.__setattr__(self, "cap", to_rational(self.cap))
        object.__setattr__(self, "values", _fractions(self.values))

    @property
    def n(self) -> int:  # type: ignore[override]
        return len(self.values)

    def _evaluate(self, mask: int) -> Fraction:
        total = sum((self.values[i] for i in items_of(mask)), Fraction(0))
        return min(self.cap, total)


SUBMODULAR = "submodular"
GENERAL_MONOTONE = "general-monotone"


@dataclass(frozen=True, eq=True)
class Table(Valuation):
    """Explicit value for each of the ``2**n`` subsets, indexed by bitmask.

    ``declared`` records what the table claims to be; :func:`validate`
    checks the claim rather than trusting it.
    """

    values: tuple[Fraction, ...]
    declared: str = SUBMODULAR
    kind: str = field(default="table", init=False)

    def __post_init__(self):
        vals = _fractions(self.values)
        size = len(vals)
        if size < 2 or size & (size - 1):
            raise ValueError(f"table length {size} is not 2**n for n >= 1")
        if self.declared not in (SUBMODULAR, GENERAL_MONOTONE):
            raise ValueError(f"unknown declared class {self.declared!r}")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:  # type: ignore[override]
        return len(self.values).bit_length() - 1

    @cached_property
    def table(self) -> tuple[Fraction, ...]:
        return self.values

    def _evaluate(self, mask: int) -> Fraction:
        return self.values[mask]

    @classmethod
    def from_sets(cls, n: int, entries: dict, declared: str = SUBMODULAR) -> "Table":
        """Build from a mapping of item-tuples (or strings of letters) to values.

        Letters map ``a -> 0``, ``b -> 1`` and so on; unlisted subsets are an
        error, so fixtures must be fully expanded.
        """
        vals: list[Fraction | None] = [None] * (1 << n)
        vals[0] = Fraction(0)
        for key, v in entries.items():
            if isinstance(key, str):
                items = [ord(ch) - ord("a") for ch in key]
            else:
                items = list(key)
            vals[mask_of(items)] = to_rational(v)
        missing = [items_of(m) for m, v in enumerate(vals) if v is None]
        if missing:
            raise ValueError(f"table is missing subsets {missing}")
        return cls(tuple(vals), declared)  # type: ignore[arg-type]


@dataclass(frozen=True, eq=True)
class XOS(Valuation):
    """Pointwise maximum over additive clauses."""

    clauses: tuple[tuple[Fraction, ...], ...]
    kind: str = field(default="xos", init=False)

    def __post_init__(self):
        clauses = tuple(_fractions(c) for c in self.clauses)
        if not clauses:
            raise ValueError("XOS valuation needs at least one clause")
        widths = {len(c) for c in clauses}
        if len(widths) != 1:
            raise ValueError(f"XOS clauses have differing lengths {sorted(widths)}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def n(self) -> int:  # type: ignore[override]
        return len(self.clauses[0])

    def _evaluate(self, mask: int) -> Fraction:
        items = items_of(mask)
        return max(sum((c[i] for i in items), Fraction(0)) for c in self.clauses)


def value(valuation: Valuation, items: ItemSet) -> Fraction:
    return valuation.value(items)


def marginal(valuation: Valuation, T: ItemSet, S: ItemSet) -> Fraction:
    """Marginal value of ``S`` for completing ``T``: ``v(T) - v(T \\ S)``."""
    t, s = mask_of(T), mask_of(S)
    if s & ~t:
        raise ValueError(f"{format_set(items_of(s))} is not a subset of {format_set(items_of(t))}")
    return valuation.value_mask(t) - valuation.value_mask(t & ~s)


def set_marginals(valuation: Valuation, S: ItemSet) -> tuple[Fraction, ...]:
    """Per-item marginals within ``S``, as a length-n vector (0 off ``S``)."""
    s = mask_of(S)
    vs = valuation.value_mask(s)
    return tuple(
        vs - valuation.value_mask(s & ~(1 << i)) if s >> i & 1 else Fraction(0)
        for i in range(valuation.n)
    )


def item_marginals(valuation: Valuation) -> tuple[Fraction, ...]:
    """``v(N) - v(N \\ {i})`` for each item ``i``."""
    return set_marginals(valuation, range(valuation.n))


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    normalized: bool
    negative_entries: tuple[str, ...] = ()
    # (S, S + x) pairs with v(S) > v(S + x)
    monotone_violations: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    # (S, T, x) with S <= T, x not in T and v(S+x)-v(S) < v(T+x)-v(T)
    submodular_violations: tuple[tuple[tuple[int, ...], tuple[int, ...], int], ...] = ()
    submodularity_checked: bool = False

    @property
    def monotone(self) -> bool:
        return not self.monotone_violations and not self.negative_entries

    @property
    def submodular(self) -> bool:
        return self.submodularity_checked and not self.submodular_violations

    @property
    def ok(self) -> bool:
        return self.normalized and self.monotone and not self.submodular_violations

    def problems(self) -> list[str]:
        out = []
        if not self.normalized:
            out.append("v(empty set) != 0")
        out.extend(self.negative_entries)
        for s, t in self.monotone_violations:
            out.append(f"monotonicity: v({format_set(s)}) > v({format_set(t)})")
        for s, t, x in self.submodular_violations:
            out.append(
                f"submodularity: marginal of {x} at {format_set(s)} below marginal at {format_set(t)}"
            )
        return out


def _submodular_violations(table: Sequence[Fraction], n: int):
    full = (1 << n) - 1
    violations = []
    for x in range(n):
        bit = 1 << x
        rest = full & ~bit
        # walk T over subsets of N - x, S over subsets of T
        t = rest
        while True:
            gain_t = table[t | bit] - table[t]
            s = t
            while True:
                if table[s | bit] - table[s] < gain_t:
                    violations.append((items_of(s), items_of(t), x))
                if s == 0:
                    break
                s = (s - 1) & t
            if t == 0:
                break
            t = (t - 1) & rest
    violations.sort()
    return tuple(violations)


def validate(valuation: Valuation) -> ValidationReport:
    """Check normalization, monotonicity and any declared submodularity.

    Additive, budget-additive and XOS kinds are normalized and monotone by
    construction whenever their entries are nonnegative, so only the sign of
    the entries is inspected.  Tables are checked exhaustively.
    """
    negatives: list[str] = []
    if isinstance(valuation, Additive):
        negatives = [f"negative value for item {i}" for i, v in enumerate(valuation.values) if v < 0]
        return ValidationReport("additive", True, tuple(negatives), submodularity_checked=True)
    if isinstance(valuation, BudgetAdditive):
        negatives = [f"negative value for item {i}" for i, v in enumerate(valuation.values) if v < 0]
        if valuation.cap < 0:
            negatives.append("negative cap")
        return ValidationReport("budget_additive", True, tuple(negatives), submodularity_checked=True)
    if isinstance(valuation, XOS):
        for k, clause in enumerate(valuation.clauses):
            negatives += [f"negative entry for item {i} in clause {k}" for i, v in enumerate(clause) if v < 0]
        return ValidationReport("xos", True, tuple(negatives))
    if not isinstance(valuation, Table):
        raise TypeError(f"unknown valuation type {type(valuation).__name__}")

    n, tab = valuation.n, valuation.table
    monotone = []
    for m in range(1 << n):
        for i in range(n):
            bit = 1 << i
            if not m & bit and tab[m] > tab[m | bit]:
                monotone.append((items_of(m), items_of(m | bit)))
    sub = ()
    if valuation.declared == SUBMODULAR:
        sub = _submodular_violations(tab, n)
    return ValidationReport(
        "table",
        tab[0] == 0,
        monotone_violations=tuple(monotone),
        submodular_violations=sub,
        submodularity_checked=valuation.declared == SUBMODULAR,
    )


class InvalidGame(ValueError):
    pass


@dataclass(frozen=True)
class Game:
    """A single-buyer budgeted pricing game: one vendor per item."""

    valuation: Valuation
    budget: Fraction
    max_items: int = field(default=DEFAULT_MAX_ITEMS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "budget", to_rational(self.budget))
        if self.budget <= 0:
            raise InvalidGame(f"budget must be positive, got {self.budget}")
        if self.valuation.n < 1:
            raise InvalidGame("game needs at least one item")
        if self.valuation.n > self.max_items:
            raise InvalidGame(f"{self.valuation.n} items exceeds the cap of {self.max_items}")
        report = validate(self.valuation)
        if not report.ok:
            raise InvalidGame("invalid valuation: " + "; ".join(report.problems()[:5]))

    @property
    def n(self) -> int:
        return self.valuation.n

    @property
    def items(self) -> range:
        return range(self.valuation.n)
