"""Exact equilibrium analysis for budgeted single-buyer pricing games."""

from .demand import DemandOutcome, as_prices, buyer_utility, demand, parse_prices, vendor_utilities
from .equilibrium import (
    BaseSet,
    ConstraintReport,
    ConstraintViolation,
    base_set,
    base_set_prices,
    bnl_prices,
    check_constraint,
    equal_utility_prices,
    is_market_clearing,
)
from .gamefile import GameFileError, dump_game, game_from_dict, game_to_dict, load_game
from .oracle import GeneratorSpec, GridSpec, generate, grid_enumerate, oracle_demand
from .valuations import (
    XOS,
    Additive,
    BudgetAdditive,
    Game,
    InvalidGame,
    Table,
    item_marginals,
    marginal,
    set_marginals,
    validate,
    value,
)
from .verifier import BestResponse, VerifyReport, best_response, critical_prices, verify_pne
from .welfare import equilibrium_ratio, poa_family, social_welfare

__version__ = "0.1.0"

__all__ = [
    "Additive", "BaseSet", "BestResponse", "BudgetAdditive", "ConstraintReport",
    "ConstraintViolation", "DemandOutcome", "Game", "GameFileError", "GeneratorSpec",
    "GridSpec", "InvalidGame", "Table", "VerifyReport", "XOS", "as_prices", "base_set",
    "base_set_prices", "bnl_prices", "best_response", "buyer_utility", "check_constraint",
    "critical_prices", "demand", "dump_game", "equal_utility_prices", "equilibrium_ratio",
    "game_from_dict", "game_to_dict", "generate", "grid_enumerate", "is_market_clearing",
    "item_marginals", "load_game", "marginal", "oracle_demand", "parse_prices", "poa_family",
    "set_marginals", "social_welfare", "validate", "value", "vendor_utilities", "verify_pne",
]
