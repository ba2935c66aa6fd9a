import numpy as np
import pytest

from herodraft.game import GameConfig
from herodraft.oracle import SyntheticOracle, sample_oracle


@pytest.fixture
def tiny_config():
    """4 heroes, 2 picks per round, one round: the smallest legal game."""
    return GameConfig(n_heroes=4, picks_per_round=2, rounds=1,
                      round_order=(0, 1), first_player=(0,))


@pytest.fixture
def small_config():
    """8 heroes, 1-2-2-1 order, one round."""
    return GameConfig(n_heroes=8, picks_per_round=4, rounds=1,
                      round_order=(0, 1, 1, 0), first_player=(0,))


@pytest.fixture
def bo2_config():
    """8 heroes, 1-2-2-1 order, two rounds, alternating first pick."""
    return GameConfig(n_heroes=8, picks_per_round=4, rounds=2,
                      round_order=(0, 1, 1, 0), first_player=(0, 1))


@pytest.fixture
def small_oracle():
    return sample_oracle(seed=7, n_heroes=8, lineup_size=2)


def strength_oracle(base, temperature=1.0):
    """Oracle with only base strengths (no synergy/counter terms)."""
    b = np.asarray(base, dtype=np.float64)
    n = len(b)
    return SyntheticOracle(base_strength=b,
                           synergy=np.zeros((n, n)),
                           counter=np.zeros((n, n)),
                           temperature=temperature)
