"""Synthetic ground-truth win-rate oracle and match-data generator.

The oracle scores a lineup pair with per-hero strengths, a symmetric
teammate-synergy matrix and an antisymmetric cross-team counter matrix,
then squashes through a temperature-scaled sigmoid.  It is deterministic
given its seed, exactly antisymmetric, and serves both as the data
generator for the learned win-rate model and as the φ function behind
the exact solver and search tests.

Randomness uses numpy's Philox counter-based generator so matrices and
datasets are bit-reproducible across platforms.  Fill order: strengths,
then the synergy upper triangle (row-major), then the counter upper
triangle.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SyntheticOracle:
    base_strength: np.ndarray   # (N,)
    synergy: np.ndarray         # (N, N) symmetric, zero diagonal
    counter: np.ndarray         # (N, N) antisymmetric
    temperature: float
    seed: int = -1

    def __post_init__(self):
        n = len(self.base_strength)
        if self.synergy.shape != (n, n) or self.counter.shape != (n, n):
            raise ValueError("synergy/counter must be square, matching base_strength")
        if not np.allclose(self.synergy, self.synergy.T):
            raise ValueError("synergy must be symmetric")
        if np.any(np.diag(self.synergy) != 0):
            raise ValueError("synergy diagonal must be zero")
        if not np.allclose(self.counter, -self.counter.T):
            raise ValueError("counter must be antisymmetric")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    @property
    def n_heroes(self) -> int:
        return len(self.base_strength)

    def score(self, lineup_a, lineup_b) -> float:
        a = np.asarray(sorted(lineup_a), dtype=np.intp)
        b = np.asarray(sorted(lineup_b), dtype=np.intp)
        if set(lineup_a) & set(lineup_b):
            raise ValueError("lineups must be disjoint")
        s = float(self.base_strength[a].sum() - self.base_strength[b].sum())
        # synergy is symmetric with a zero diagonal, so the i<j pair sum
        # within a team is half the full block sum; counter pairs cross teams
        s += 0.5 * float(self.synergy[a[:, None], a].sum())
        s -= 0.5 * float(self.synergy[b[:, None], b].sum())
        s += float(self.counter[a[:, None], b].sum())
        return s

    def winrate(self, lineup_c1, lineup_c2) -> float:
        """Camp1 winning probability in (0, 1).

        Exactly antisymmetric: the score is always evaluated in a canonical
        lineup orientation and the reversed call returns the float
        complement, so winrate(A,B) + winrate(B,A) == 1.0 bit-exactly.
        """
        a = tuple(sorted(lineup_c1))
        b = tuple(sorted(lineup_c2))
        if a > b:
            return 1.0 - self.winrate(b, a)
        x = self.score(a, b) / self.temperature
        if x >= 0:
            e = math.exp(-x)
            return 1.0 / (1.0 + e)
        e = math.exp(x)
        return e / (1.0 + e)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "temperature": self.temperature,
            "base_strength": self.base_strength.tolist(),
            "synergy": self.synergy.tolist(),
            "counter": self.counter.tolist(),
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json(), f)

    @classmethod
    def load(cls, path) -> "SyntheticOracle":
        with open(path) as f:
            d = json.load(f)
        return cls(
            base_strength=np.asarray(d["base_strength"], dtype=np.float64),
            synergy=np.asarray(d["synergy"], dtype=np.float64),
            counter=np.asarray(d["counter"], dtype=np.float64),
            temperature=d["temperature"],
            seed=d.get("seed", -1),
        )


def sample_oracle(seed: int, n_heroes: int, strength_scale: float = 1.0,
                  synergy_scale: float = 0.3, counter_scale: float = 0.3,
                  temperature: float | None = None,
                  lineup_size: int = 5) -> SyntheticOracle:
    """Draw a random oracle.  Deterministic given ``seed`` (Philox)."""
    if n_heroes < 2:
        raise ValueError("n_heroes must be >= 2")
    for name, v in [("strength_scale", strength_scale),
                    ("synergy_scale", synergy_scale),
                    ("counter_scale", counter_scale)]:
        if v < 0:
            raise ValueError(f"{name} must be >= 0")
    if temperature is None:
        # keeps typical winrates away from 0/1 saturation
        temperature = 2.0 * math.sqrt(lineup_size)
    rng = np.random.Generator(np.random.Philox(seed))
    n = n_heroes
    strength = strength_scale * rng.standard_normal(n)
    iu = np.triu_indices(n, 1)
    synergy = np.zeros((n, n))
    synergy[iu] = synergy_scale * rng.standard_normal(len(iu[0]))
    synergy += synergy.T
    counter = np.zeros((n, n))
    counter[iu] = counter_scale * rng.standard_normal(len(iu[0]))
    counter -= counter.T
    return SyntheticOracle(strength, synergy, counter, temperature, seed=seed)


@dataclass
class MatchDataset:
    """Uniformly sampled lineup pairs with Bernoulli win labels (camp1 view)."""

    camp1: np.ndarray   # (n, K) hero ids, ascending within a row
    camp2: np.ndarray   # (n, K)
    win: np.ndarray     # (n,) in {0, 1}

    def __len__(self) -> int:
        return len(self.win)

    @property
    def lineup_size(self) -> int:
        return self.camp1.shape[1] if self.camp1.ndim == 2 else 0

    def save_csv(self, path):
        k = self.lineup_size
        header = [f"c1h{i+1}" for i in range(k)] + [f"c2h{i+1}" for i in range(k)] + ["win"]
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(header)
            for a, b, y in zip(self.camp1, self.camp2, self.win):
                w.writerow([*a.tolist(), *b.tolist(), int(y)])

    @classmethod
    def load_csv(cls, path) -> "MatchDataset":
        with open(path, newline="") as f:
            r = csv.reader(f)
            header = next(r)
            k = (len(header) - 1) // 2
            rows = [[int(v) for v in row] for row in r]
        if not rows:
            z = np.zeros((0, k), dtype=np.int64)
            return cls(z, z.copy(), np.zeros(0, dtype=np.int64))
        arr = np.asarray(rows, dtype=np.int64)
        return cls(arr[:, :k], arr[:, k:2 * k], arr[:, 2 * k])


def generate_matches(oracle: SyntheticOracle, n_matches: int,
                     lineup_size: int, seed: int) -> MatchDataset:
    """Sample disjoint uniform lineups and label with Bernoulli(φ)."""
    if 2 * lineup_size > oracle.n_heroes:
        raise ValueError("2 * lineup_size must not exceed the hero pool")
    rng = np.random.Generator(np.random.Philox(seed))
    k, n = lineup_size, n_matches
    c1 = np.zeros((n, k), dtype=np.int64)
    c2 = np.zeros((n, k), dtype=np.int64)
    win = np.zeros(n, dtype=np.int64)
    for i in range(n):
        heroes = rng.choice(oracle.n_heroes, size=2 * k, replace=False)
        a = np.sort(heroes[:k])
        b = np.sort(heroes[k:])
        phi = oracle.winrate(a, b)
        c1[i], c2[i] = a, b
        win[i] = 1 if rng.random() < phi else 0
    return MatchDataset(c1, c2, win)
