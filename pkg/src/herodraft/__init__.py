"""Best-of-N hero drafting engine: game rules, search, learning, evaluation."""

from .game import (CAMP1, CAMP2, PLAYER1, PLAYER2, DraftState, GameConfig,
                   IllegalActionError, format_draft, parse_draft,
                   terminal_reward)
from .oracle import MatchDataset, SyntheticOracle, generate_matches, sample_oracle
from .search import SearchParams, run_search, sample_action
from .solver import exact_solve
from .strategies import KINDS, StrategySpec, build_strategy

__all__ = [
    "CAMP1", "CAMP2", "PLAYER1", "PLAYER2", "DraftState", "GameConfig",
    "IllegalActionError", "format_draft", "parse_draft", "terminal_reward",
    "MatchDataset", "SyntheticOracle", "generate_matches", "sample_oracle",
    "SearchParams", "run_search", "sample_action", "exact_solve",
    "KINDS", "StrategySpec", "build_strategy",
]

__version__ = "0.1.0"
